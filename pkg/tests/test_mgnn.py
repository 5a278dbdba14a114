import numpy as np
import pytest

from multigraphy.diffusion import DiffusionTree
from multigraphy.exceptions import ArgumentsError
from multigraphy.exceptions import ParseError
from multigraphy.exceptions import TrainingError
from multigraphy.filters import MimoFilter
from multigraphy.filters import MultigraphFilter
from multigraphy.filters import apply_filter
from multigraphy.mgnn import Adam
from multigraphy.mgnn import LayerSpec
from multigraphy.mgnn import MGNNModel
from multigraphy.mgnn import Readout
from multigraphy.mgnn import TrainConfig
from multigraphy.mgnn import backward
from multigraphy.mgnn import build_baseline
from multigraphy.mgnn import build_model
from multigraphy.mgnn import check_permutation_equivariance
from multigraphy.mgnn import count_parameters
from multigraphy.mgnn import cross_entropy
from multigraphy.mgnn import evaluate
from multigraphy.mgnn import forward
from multigraphy.mgnn import load_model
from multigraphy.mgnn import mse
from multigraphy.mgnn import predict
from multigraphy.mgnn import save_model
from multigraphy.mgnn import train
from multigraphy.mgnn import train_primal_dual
from multigraphy.multigraph import Multigraph
from multigraphy.multigraph import Permutation
from multigraphy.sampling import PoolConfig
from multigraphy.sampling import SelectionPlan

IDENTITY_TREE = DiffusionTree(1, 0, [()])


def random_multigraph(n, m, seed):
    rng = np.random.default_rng(seed)
    return Multigraph(
        [rng.standard_normal((n, n)) for _ in range(m)]
    ).normalized()


def single_word_model(F, nonlinearity="identity", readout=None):
    layer = LayerSpec(MimoFilter(IDENTITY_TREE, {(): F}), nonlinearity)
    return MGNNModel([[layer]], readout)


def numeric_gradients(model, operators, X, U, h=1e-6):
    numeric = []
    for p in model.parameters():
        g = np.zeros_like(p)
        for idx in np.ndindex(*p.shape):
            saved = p[idx]
            p[idx] = saved + h
            plus = np.sum(U * forward(model, operators, X)[0])
            p[idx] = saved - h
            minus = np.sum(U * forward(model, operators, X)[0])
            p[idx] = saved
            g[idx] = (plus - minus) / (2 * h)
        numeric.append(g)
    return numeric


def random_case(seed):
    """Small smooth model with its inputs; covers variants, readouts,
    pooling with a plan and per-sample operators."""
    rng = np.random.default_rng(seed)
    n, m, batch = 5, 2, 2
    variant = ("mgnn", "merged", "parallel")[seed % 3]
    nonlinearity = ("tanh", "sigmoid", "identity")[(seed // 3) % 3]
    readout = (None, "graph", "node")[(seed // 2) % 3]
    tree = DiffusionTree.full(m, 2)
    pooled = seed % 4 == 1
    batched = not pooled and seed % 4 == 2
    plan = None
    kwargs = {}
    if pooled:
        plan = SelectionPlan(rng.permutation(n), (n, 4, 3))
        kwargs["pooling"] = PoolConfig(1, "mean")
    model = build_model(
        tree,
        [3, 2],
        f_in=2,
        nonlinearity=nonlinearity,
        variant=variant,
        n_outputs=None if readout is None else 3,
        readout_mode=readout or "graph",
        n_nodes=n,
        plan=plan,
        seed=seed,
        **kwargs,
    )
    if batched:
        operators = 0.5 * rng.standard_normal((batch, m, n, n))
    else:
        operators = random_multigraph(n, m, seed)
    X = rng.standard_normal((batch, n, 2))
    return model, operators, X, rng


class TestGradients:
    @pytest.mark.parametrize("seed", range(20))
    def test_finite_differences(self, seed):
        model, operators, X, rng = random_case(seed)
        out, tape = forward(model, operators, X)
        U = rng.standard_normal(out.shape)
        grads = backward(model, tape, U).arrays(model)
        numeric = numeric_gradients(model, operators, X, U)
        assert len(grads) == len(numeric)
        for g, n in zip(grads, numeric):
            np.testing.assert_allclose(g, n, rtol=1e-4, atol=1e-7)

    def test_relu_at_zero(self):
        model = single_word_model(np.zeros((1, 1)), "relu")
        X = np.ones((3, 1))
        out, tape = forward(model, Multigraph([np.eye(3)]), X)
        np.testing.assert_array_equal(out, np.zeros((3, 1)))
        grads = backward(model, tape, np.ones((3, 1)))
        assert grads.max_abs() == 0.0

    def test_zero_upstream(self):
        model, operators, X, _ = random_case(4)
        out, tape = forward(model, operators, X)
        grads = backward(model, tape, np.zeros(out.shape))
        assert grads.max_abs() == 0.0

    def test_identity_word(self):
        rng = np.random.default_rng(0)
        model = single_word_model(rng.standard_normal((2, 3)))
        X = rng.standard_normal((4, 2))
        U = rng.standard_normal((4, 3))
        _, tape = forward(model, Multigraph([np.eye(4)]), X)
        grads = backward(model, tape, U).arrays(model)
        np.testing.assert_allclose(grads[0], X.T @ U, rtol=1e-12)

    def test_upstream_shape(self):
        model, operators, X, _ = random_case(0)
        out, tape = forward(model, operators, X)
        with pytest.raises(ValueError):
            backward(model, tape, np.zeros(out.shape + (1,)))

    def test_foreign_tape(self):
        model, operators, X, _ = random_case(0)
        _, tape = forward(model, operators, X)
        other = build_model(DiffusionTree.full(2, 2), [3], f_in=2)
        with pytest.raises(ValueError):
            backward(other, tape, np.zeros(1))


class TestForward:
    def test_zero_init(self):
        model = build_model(
            DiffusionTree.full(2, 2),
            [4],
            n_outputs=3,
            n_nodes=5,
            init="zeros",
        )
        X = np.ones((2, 5, 1))
        out, _ = forward(model, random_multigraph(5, 2, 0), X)
        np.testing.assert_array_equal(out, np.zeros((2, 3)))

    def test_graph_readout_flattens_rows(self):
        readout = Readout([(np.eye(6), np.zeros(6))], "graph")
        model = single_word_model(np.eye(2), readout=readout)
        X = np.arange(6.0).reshape(3, 2)
        out, _ = forward(model, Multigraph([np.eye(3)]), X)
        np.testing.assert_array_equal(out, X.ravel())

    def test_node_readout(self):
        W = np.array([[1.0], [-1.0]])
        readout = Readout([(W, np.array([0.5]))], "node")
        model = single_word_model(np.eye(2), readout=readout)
        X = np.array([[3.0, 1.0], [0.0, 2.0]])
        out, _ = forward(model, Multigraph([np.eye(2)]), X)
        np.testing.assert_array_equal(out, [[2.5], [-1.5]])

    def test_single_layer_is_a_filter(self):
        rng = np.random.default_rng(0)
        mg = random_multigraph(6, 2, 0)
        tree = DiffusionTree.full(2, 2)
        coeffs = {w: float(rng.standard_normal()) for w in tree}
        layer = LayerSpec(
            MimoFilter(tree, {w: [[c]] for w, c in coeffs.items()}),
            "identity",
        )
        x = rng.standard_normal(6)
        out, _ = forward(MGNNModel([[layer]]), mg, x)
        np.testing.assert_allclose(
            out[:, 0],
            apply_filter(MultigraphFilter(tree, coeffs), mg, x),
            rtol=1e-12,
            atol=1e-14,
        )

    def test_parallel_towers_concatenate(self):
        mg = random_multigraph(4, 2, 1)
        model = build_baseline("parallel", 2, 2, [3], f_in=2, seed=1)
        X = np.random.default_rng(1).standard_normal((4, 2))
        out, _ = forward(model, mg, X)
        assert out.shape == (4, 6)
        for t, tower in enumerate(model.towers):
            single = MGNNModel([tower])
            part, _ = forward(single, mg, X)
            np.testing.assert_array_equal(out[:, 3 * t : 3 * t + 3], part)

    def test_selection_keeps_nodes(self):
        mg = random_multigraph(6, 2, 2)
        plan = SelectionPlan([5, 1, 0, 2, 3, 4], (6, 4, 2))
        model = build_model(DiffusionTree.full(2, 1), [3, 2], plan=plan)
        out, _ = forward(model, mg, np.ones(6))
        assert out.shape == (2, 2)

    def test_batched_operators_with_pooling(self):
        rng = np.random.default_rng(0)
        plan = SelectionPlan(np.arange(4), (4, 2))
        model = build_model(
            DiffusionTree.full(2, 1),
            [2],
            plan=plan,
            pooling=PoolConfig(1, "max"),
        )
        operators = rng.standard_normal((3, 2, 4, 4))
        with pytest.raises(ArgumentsError):
            forward(model, operators, np.ones((3, 4, 1)))

    @pytest.mark.parametrize(
        "X", [np.ones(5), np.ones((4, 2)), np.ones((2, 5, 1))]
    )
    def test_invalid_signal(self, X):
        model = build_model(DiffusionTree.full(2, 1), [2])
        with pytest.raises(ValueError):
            forward(model, random_multigraph(4, 2, 0), X)

    def test_class_count_mismatch(self):
        model = build_model(DiffusionTree.full(3, 1), [2])
        with pytest.raises(ValueError):
            forward(model, random_multigraph(4, 2, 0), np.ones(4))


class TestEquivariance:
    def test_identity_permutation(self):
        model, _, _, _ = random_case(0)
        mg = random_multigraph(5, 2, 0)
        X = np.random.default_rng(0).standard_normal((5, 2))
        p = Permutation.identity(5)
        assert check_permutation_equivariance(model, mg, X, p) == 0.0

    def test_random_permutations(self):
        rng = np.random.default_rng(1)
        for trial in range(100):
            n = int(rng.integers(2, 7))
            m = int(rng.integers(1, 4))
            model = build_model(
                DiffusionTree.full(m, 2),
                [3, 2],
                nonlinearity=("relu", "tanh")[trial % 2],
                variant=("mgnn", "merged", "parallel")[trial % 3],
                seed=trial,
            )
            mg = random_multigraph(n, m, trial)
            x = rng.standard_normal(n)
            p = Permutation.random(n, trial)
            assert check_permutation_equivariance(model, mg, x, p) < 1e-10

    def test_requires_multigraph(self):
        model = build_model(DiffusionTree.full(1, 1), [2])
        with pytest.raises(TypeError):
            check_permutation_equivariance(
                model, np.eye(3)[None], np.ones(3), Permutation.identity(3)
            )


def two_node_dataset(n_samples, seed):
    """Class 0 puts its mass on node 0, class 1 on node 1."""
    rng = np.random.default_rng(seed)
    y = np.arange(n_samples) % 2
    X = np.zeros((n_samples, 4))
    X[np.arange(n_samples), y] = rng.uniform(1.0, 2.0, n_samples)
    return X, y


class TestTrain:
    def setup_method(self):
        cycle = np.roll(np.eye(4), 1, axis=0)
        self.mg = Multigraph([cycle]).normalized()
        self.tree = DiffusionTree.full(1, 1)

    def _model(self, seed=0):
        return build_model(
            self.tree,
            [2],
            nonlinearity="identity",
            n_outputs=2,
            n_nodes=4,
            seed=seed,
        )

    def test_zero_learning_rate(self):
        model = self._model()
        cfg = TrainConfig(lr=0.0, epochs=2, batch_size=4)
        trained, _ = train(model, self.mg, two_node_dataset(8, 0), cfg)
        for a, b in zip(model.parameters(), trained.parameters()):
            np.testing.assert_array_equal(a, b)

    def test_returns_copy(self):
        model = self._model()
        before = [p.copy() for p in model.parameters()]
        cfg = TrainConfig(lr=0.05, epochs=2, batch_size=4)
        trained, _ = train(model, self.mg, two_node_dataset(8, 0), cfg)
        for a, b in zip(before, model.parameters()):
            np.testing.assert_array_equal(a, b)
        assert trained.metadata["train"]["lr"] == 0.05

    def test_separable(self):
        X, y = two_node_dataset(40, 1)
        cfg = TrainConfig(lr=0.05, epochs=20, batch_size=8, seed=1)
        trained, losses = train(self._model(1), self.mg, (X, y), cfg)
        assert len(losses) == 20
        assert losses[-1] < losses[0]
        assert evaluate(trained, self.mg, X, y) == 1.0
        np.testing.assert_array_equal(predict(trained, self.mg, X), y)

    def test_single_sample_regression(self):
        model = MGNNModel(
            [[LayerSpec(MimoFilter.zeros(IDENTITY_TREE, 1, 1), "identity")]]
        )
        X = np.array([[[1.0], [2.0], [3.0]]])
        cfg = TrainConfig(loss="mse", lr=0.05, epochs=400, batch_size=1)
        trained, losses = train(
            model, Multigraph([np.eye(3)]), (X, 2.0 * X), cfg
        )
        assert losses[-1] < 1e-6
        coeff = trained.layers[0].filter.coeffs[()]
        assert coeff[0, 0] == pytest.approx(2.0, abs=1e-3)

    def test_deterministic(self):
        data = two_node_dataset(16, 2)
        cfg = TrainConfig(lr=0.01, epochs=3, batch_size=5, seed=4)
        a, losses_a = train(self._model(), self.mg, data, cfg)
        b, losses_b = train(self._model(), self.mg, data, cfg)
        assert losses_a == losses_b
        for p, q in zip(a.parameters(), b.parameters()):
            np.testing.assert_array_equal(p, q)

    def test_non_finite_loss(self):
        X, y = two_node_dataset(4, 0)
        X[1, 2] = np.inf
        cfg = TrainConfig(epochs=1, batch_size=4)
        with pytest.raises(TrainingError) as e:
            train(self._model(), self.mg, (X, y), cfg)
        assert e.value.tensor == "tower 0 layer 0 convolution"

    def test_sample_count_mismatch(self):
        X, y = two_node_dataset(4, 0)
        with pytest.raises(ValueError):
            train(self._model(), self.mg, (X, y[:3]), TrainConfig())

    def test_environment_loss(self):
        cfg = TrainConfig(loss="negative_sum_rate")
        with pytest.raises(ArgumentsError):
            train(self._model(), self.mg, two_node_dataset(4, 0), cfg)


class ConstantEnv:
    """Fixed operators and signals with a mean-output constraint."""

    def __init__(self, objective_weight=0.0, offset=0.0):
        self.objective_weight = objective_weight
        self.offset = offset

    def sample_batch(self, rng, size):
        return np.eye(2)[None], np.ones((size, 2, 1)), None

    def objective(self, out, context):
        value = -self.objective_weight * float(out.mean())
        return value, np.full(out.shape, -self.objective_weight / out.size)

    def constraint(self, out, context):
        value = float(out.mean()) + self.offset
        return value, np.full(out.shape, 1.0 / out.size)


class TestPrimalDual:
    def _model(self):
        return single_word_model(np.ones((1, 1)))

    def test_inactive_constraint(self):
        cfg = TrainConfig(lr=0.01, iterations=20, batch_size=2)
        _, trace = train_primal_dual(self._model(), ConstantEnv(1.0, -10), cfg)
        assert list(trace.columns) == ["step", "loss", "lambda", "slack"]
        assert (trace["lambda"] == 0.0).all()
        assert (trace["slack"] < 0).all()

    def test_dual_ascent(self):
        cfg = TrainConfig(lr=0.0, iterations=5, batch_size=2, dual_lr=0.5)
        _, trace = train_primal_dual(self._model(), ConstantEnv(), cfg)
        np.testing.assert_allclose(trace["lambda"], [0.5, 1.0, 1.5, 2.0, 2.5])

    def test_penalty_lowers_output(self):
        cfg = TrainConfig(lr=0.01, iterations=50, batch_size=2, dual_lr=0.1)
        trained, trace = train_primal_dual(
            self._model(), ConstantEnv(), cfg, lambda_init=1.0
        )
        coeff = trained.layers[0].filter.coeffs[()][0, 0]
        assert 0.0 < coeff < 1.0
        assert (np.diff(trace["lambda"]) >= 0).all()
        assert trained.metadata["lambda"] == trace["lambda"].iloc[-1]

    def test_negative_lambda(self):
        with pytest.raises(ValueError):
            train_primal_dual(
                self._model(), ConstantEnv(), TrainConfig(), lambda_init=-1
            )


class TestLosses:
    def test_cross_entropy_uniform(self):
        loss, grad = cross_entropy(np.zeros((2, 2)), np.array([0, 1]))
        assert loss == pytest.approx(np.log(2.0))
        np.testing.assert_allclose(grad, [[-0.25, 0.25], [0.25, -0.25]])

    def test_cross_entropy_shift(self):
        logits = np.array([[1.0, 3.0, -2.0]])
        a, _ = cross_entropy(logits, [1])
        b, _ = cross_entropy(logits + 100.0, [1])
        assert a == pytest.approx(b)

    def test_mse(self):
        loss, grad = mse(np.array([[1.0, 2.0]]), np.array([[0.0, 4.0]]))
        assert loss == pytest.approx(2.5)
        np.testing.assert_allclose(grad, [[1.0, -2.0]])


class TestAdam:
    def test_first_step(self):
        p = np.array([1.0, -2.0])
        Adam([p], lr=0.1).step([np.array([0.5, -3.0])])
        np.testing.assert_allclose(p, [0.9, -1.9], rtol=1e-6)

    def test_decay(self):
        p = np.zeros(1)
        optimizer = Adam([p], lr=0.1, decay=0.5)
        optimizer.step([np.ones(1)])
        assert optimizer.current_lr == 0.05

    def test_gradient_count(self):
        with pytest.raises(ValueError):
            Adam([np.zeros(1)]).step([])


class TestTrainConfig:
    @pytest.mark.parametrize(
        "kwargs, error",
        [
            ({"loss": "hinge"}, ArgumentsError),
            ({"lr": -1.0}, ValueError),
            ({"decay": 0.0}, ValueError),
            ({"decay": 1.5}, ValueError),
            ({"epochs": 0}, ValueError),
            ({"batch_size": 2.5}, ValueError),
            ({"dual_lr": -0.1}, ValueError),
        ],
    )
    def test_invalid(self, kwargs, error):
        with pytest.raises(error):
            TrainConfig(**kwargs)

    def test_from_params(self):
        cfg = TrainConfig.from_params(
            {"primal_lr": 0.5, "primal_epochs": 3, "lr": 0.1}, "primal_"
        )
        assert cfg.lr == 0.5
        assert cfg.epochs == 3
        assert cfg.to_dict()["batch_size"] == 32


class TestArchitecture:
    def test_merged_words(self):
        model = build_baseline("merged", 2, 2, [3])
        assert model.layers[0].tree.words == (
            (),
            (0,),
            (1,),
            (0, 0),
            (1, 1),
        )

    def test_parallel_towers(self):
        model = build_baseline("parallel", 3, 2, [4, 2])
        assert len(model.towers) == 3
        for g, tower in enumerate(model.towers):
            assert tower[0].tree.words == ((), (g,), (g, g))
        assert model.n_features_out == 6

    def test_invalid_baseline(self):
        with pytest.raises(ArgumentsError):
            build_baseline("mgnn", 2, 2, [3])

    def test_parameter_count(self):
        tree = DiffusionTree.full(2, 2)
        model = build_model(tree, [4, 2])
        assert count_parameters(model) == 7 * 1 * 4 + 7 * 4 * 2
        for n in (5, 50):
            out, _ = forward(model, random_multigraph(n, 2, n), np.ones(n))
            assert out.shape == (n, 2)
        assert count_parameters(model) == 84

    def test_readout_parameters(self):
        model = build_model(
            DiffusionTree.full(1, 1), [2], n_outputs=3, n_nodes=4, hidden=(5,)
        )
        assert count_parameters(model) == 2 * 2 + (8 * 5 + 5) + (5 * 3 + 3)

    def test_mgnn_subsumes_merged(self):
        mg = random_multigraph(5, 2, 3)
        merged = build_baseline("merged", 2, 2, [3, 2], f_in=2, seed=3)
        tree = DiffusionTree.full(2, 2)
        layers = []
        for layer in merged.layers:
            coeffs = {
                w: layer.filter.coeffs.get(
                    w, np.zeros((layer.f_in, layer.f_out))
                )
                for w in tree
            }
            layers.append(LayerSpec(MimoFilter(tree, coeffs)))
        full = MGNNModel([layers])
        X = np.random.default_rng(3).standard_normal((5, 2))
        np.testing.assert_array_equal(
            forward(full, mg, X)[0], forward(merged, mg, X)[0]
        )

    def test_mgnn_subsumes_parallel(self):
        mg = random_multigraph(5, 2, 4)
        parallel = build_baseline("parallel", 2, 2, [3], seed=4)
        tree = DiffusionTree.full(2, 2)
        coeffs = {w: np.zeros((1, 6)) for w in tree}
        for t, tower in enumerate(parallel.towers):
            for w, F in tower[0].filter.coeffs.items():
                coeffs[w][:, 3 * t : 3 * t + 3] += F
        full = MGNNModel([[LayerSpec(MimoFilter(tree, coeffs))]])
        x = np.random.default_rng(4).standard_normal(5)
        np.testing.assert_allclose(
            forward(full, mg, x)[0],
            forward(parallel, mg, x)[0],
            rtol=1e-12,
            atol=1e-14,
        )


class TestValidation:
    def test_layer_spec(self):
        F = MimoFilter.zeros(IDENTITY_TREE, 1, 1)
        with pytest.raises(TypeError):
            LayerSpec(np.zeros((1, 1)))
        with pytest.raises(ArgumentsError):
            LayerSpec(F, "gelu")
        with pytest.raises(ValueError):
            LayerSpec(F, selected_nodes=0)
        with pytest.raises(TypeError):
            LayerSpec(F, pooling="mean")

    def test_readout(self):
        with pytest.raises(ValueError):
            Readout([])
        with pytest.raises(ArgumentsError):
            Readout([(np.ones((2, 1)), np.ones(1))], mode="edge")
        with pytest.raises(ValueError):
            Readout([(np.ones((2, 1)), np.ones(2))])
        with pytest.raises(ValueError):
            Readout(
                [(np.ones((2, 3)), np.ones(3)), (np.ones((2, 1)), np.ones(1))]
            )

    def test_model(self):
        tree = DiffusionTree.full(2, 2)
        layer = LayerSpec(MimoFilter.zeros(tree, 1, 1))
        with pytest.raises(ArgumentsError):
            MGNNModel([[layer]], variant="deep")
        with pytest.raises(ValueError):
            MGNNModel([[layer]], variant="merged")
        with pytest.raises(ValueError):
            MGNNModel([[layer], [layer]], variant="parallel")
        with pytest.raises(ValueError):
            MGNNModel([[]])
        pooled = LayerSpec(MimoFilter.zeros(tree, 1, 1), pooling=PoolConfig())
        with pytest.raises(ArgumentsError):
            MGNNModel([[pooled]])

    def test_build_model(self):
        tree = DiffusionTree.full(2, 1)
        with pytest.raises(ValueError):
            build_model(tree, [])
        with pytest.raises(ArgumentsError):
            build_model(tree, [2], n_outputs=2)
        with pytest.raises(ArgumentsError):
            build_model(tree, [2], init="normal")
        with pytest.raises(ValueError):
            build_model(tree, [2, 2], plan=SelectionPlan.identity(4))


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        model, operators, X, _ = random_case(1)
        model.metadata["note"] = "pooled"
        path = str(tmp_path / "model.json")
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.variant == model.variant
        assert loaded.metadata == {"note": "pooled"}
        assert loaded.plan.counts == model.plan.counts
        np.testing.assert_array_equal(
            forward(loaded, operators, X)[0], forward(model, operators, X)[0]
        )

    def test_missing_key(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"variant": "mgnn"}')
        with pytest.raises(ParseError):
            load_model(str(path))

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("{\n\n  oops")
        with pytest.raises(ParseError) as e:
            load_model(str(path))
        assert e.value.line == 3
