import json

import numpy as np
import pytest

from multigraphy.diffusion import DiffusionTree
from multigraphy.diffusion import generate_pruned_tree
from multigraphy.diffusion import word_operator
from multigraphy.exceptions import ArgumentsError
from multigraphy.exceptions import ParseError
from multigraphy.filters import MimoFilter
from multigraphy.filters import MultigraphFilter
from multigraphy.filters import apply_filter
from multigraphy.filters import apply_mimo
from multigraphy.filters import compose_filters
from multigraphy.filters import diffuse
from multigraphy.filters import diffuse_adjoint
from multigraphy.filters import filter_from_dict
from multigraphy.filters import filter_matrix
from multigraphy.filters import filter_to_dict
from multigraphy.filters import is_shift_invariant
from multigraphy.filters import load_filter
from multigraphy.filters import save_filter
from multigraphy.multigraph import Multigraph


def random_multigraph(n, m, seed):
    rng = np.random.default_rng(seed)
    return Multigraph(
        [rng.standard_normal((n, n)) for _ in range(m)]
    ).normalized()


def random_filter(tree, rng):
    return MultigraphFilter(
        tree, {w: float(rng.standard_normal()) for w in tree.words}
    )


class TestApplyFilter:
    def test_identity(self):
        mg = random_multigraph(5, 2, 0)
        x = np.arange(5.0)
        h = MultigraphFilter.identity(DiffusionTree.full(2, 2))
        np.testing.assert_array_equal(apply_filter(h, mg, x), x)

    def test_one_hop(self):
        mg = random_multigraph(5, 2, 1)
        x = np.random.default_rng(1).standard_normal(5)
        h = MultigraphFilter(DiffusionTree.full(2, 1), {(1,): 1.0})
        np.testing.assert_allclose(
            apply_filter(h, mg, x), mg.matrices[1] @ x, rtol=1e-12
        )

    def test_dense_oracle(self):
        rng = np.random.default_rng(0)
        for trial in range(100):
            n = int(rng.integers(2, 7))
            m = int(rng.integers(1, 4))
            depth = int(rng.integers(0, 4))
            mg = random_multigraph(n, m, trial)
            h = random_filter(DiffusionTree.full(m, depth), rng)
            x = rng.standard_normal(n)
            dense = sum(
                c * word_operator(w, mg) @ x for w, c in h.coeffs.items()
            )
            np.testing.assert_allclose(
                apply_filter(h, mg, x), dense, rtol=1e-9, atol=1e-12
            )

    def test_linearity(self):
        rng = np.random.default_rng(3)
        mg = random_multigraph(6, 2, 3)
        h = random_filter(DiffusionTree.full(2, 3), rng)
        x, y = rng.standard_normal(6), rng.standard_normal(6)
        np.testing.assert_allclose(
            apply_filter(h, mg, 2.0 * x - 3.0 * y),
            2.0 * apply_filter(h, mg, x) - 3.0 * apply_filter(h, mg, y),
            atol=1e-12,
        )

    def test_matches_filter_matrix(self):
        rng = np.random.default_rng(4)
        mg = random_multigraph(5, 3, 4)
        h = random_filter(DiffusionTree.full(3, 2), rng)
        x = rng.standard_normal(5)
        np.testing.assert_allclose(
            filter_matrix(h, mg) @ x, apply_filter(h, mg, x), atol=1e-12
        )

    def test_pruned_tree(self):
        mg = Multigraph([np.diag([1.0, 0.5]), np.diag([0.2, 1.0])])
        tree = generate_pruned_tree(mg.normalized(), 1e-8, 2)
        h = MultigraphFilter(tree, {(0, 1): 1.0})
        np.testing.assert_allclose(
            apply_filter(h, mg, np.ones(2)), [0.2, 0.5]
        )

    def test_class_mismatch(self):
        h = MultigraphFilter.identity(DiffusionTree.full(3, 1))
        with pytest.raises(ValueError):
            apply_filter(h, random_multigraph(4, 2, 0), np.ones(4))

    def test_signal_length(self):
        h = MultigraphFilter.identity(DiffusionTree.full(2, 1))
        with pytest.raises(ValueError):
            apply_filter(h, random_multigraph(4, 2, 0), np.ones(3))


class TestMimo:
    def test_single_feature_matches_scalar(self):
        rng = np.random.default_rng(0)
        mg = random_multigraph(6, 2, 0)
        tree = DiffusionTree.full(2, 2)
        h = random_filter(tree, rng)
        H = MimoFilter(tree, {w: [[c]] for w, c in h.coeffs.items()})
        x = rng.standard_normal(6)
        np.testing.assert_allclose(
            apply_mimo(H, mg, x[:, None])[:, 0],
            apply_filter(h, mg, x),
            rtol=1e-13,
            atol=1e-15,
        )

    def test_columns_are_scalar_filters(self):
        rng = np.random.default_rng(1)
        mg = random_multigraph(5, 2, 1)
        tree = DiffusionTree.full(2, 2)
        coeffs = {w: rng.standard_normal((3, 2)) for w in tree.words}
        H = MimoFilter(tree, coeffs)
        X = rng.standard_normal((5, 3))
        Y = apply_mimo(H, mg, X)
        assert Y.shape == (5, 2)
        for g in range(2):
            expected = sum(
                apply_filter(
                    MultigraphFilter(
                        tree, {w: float(c[f, g]) for w, c in coeffs.items()}
                    ),
                    mg,
                    X[:, f],
                )
                for f in range(3)
            )
            np.testing.assert_allclose(Y[:, g], expected, atol=1e-12)

    def test_zeros(self):
        tree = DiffusionTree.full(2, 2)
        H = MimoFilter.zeros(tree, 3, 4)
        assert H.n_parameters() == 7 * 12
        Y = apply_mimo(H, random_multigraph(4, 2, 0), np.ones((4, 3)))
        np.testing.assert_array_equal(Y, np.zeros((4, 4)))

    def test_feature_mismatch(self):
        H = MimoFilter.zeros(DiffusionTree.full(2, 1), 3, 1)
        with pytest.raises(ValueError):
            apply_mimo(H, random_multigraph(4, 2, 0), np.ones((4, 2)))

    def test_missing_dimensions(self):
        with pytest.raises(ArgumentsError):
            MimoFilter(DiffusionTree.full(2, 1))

    def test_inconsistent_shapes(self):
        tree = DiffusionTree.full(1, 1)
        with pytest.raises(ValueError):
            MimoFilter(tree, {(): np.ones((2, 2)), (0,): np.ones((2, 3))})

    def test_batched_operators(self):
        rng = np.random.default_rng(2)
        tree = DiffusionTree.full(2, 2)
        matrices = rng.standard_normal((3, 2, 4, 4))
        X = rng.standard_normal((3, 4, 1))
        diffused = diffuse(tree, matrices, X)
        for b in range(3):
            single = diffuse(tree, matrices[b], X[b])
            for got, want in zip(diffused, single):
                np.testing.assert_allclose(
                    got[b], want, rtol=1e-13, atol=1e-13
                )


class TestDiffuseAdjoint:
    def test_inner_product(self):
        rng = np.random.default_rng(0)
        tree = DiffusionTree.full(3, 3)
        matrices = rng.standard_normal((3, 5, 5))
        X = rng.standard_normal((5, 2))
        upstream = [rng.standard_normal((5, 2)) for _ in tree.words]
        diffused = diffuse(tree, matrices, X)
        lhs = sum(np.sum(d * u) for d, u in zip(diffused, upstream))
        rhs = np.sum(X * diffuse_adjoint(tree, matrices, upstream))
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_skipped_words(self):
        rng = np.random.default_rng(1)
        tree = DiffusionTree.full(2, 2)
        matrices = rng.standard_normal((2, 4, 4))
        U = rng.standard_normal((4, 1))
        upstream = [None] * len(tree)
        upstream[tree.index((1, 0))] = U
        np.testing.assert_allclose(
            diffuse_adjoint(tree, matrices, upstream),
            (matrices[1] @ matrices[0]).T @ U,
            rtol=1e-12,
            atol=1e-12,
        )

    def test_all_none(self):
        tree = DiffusionTree.full(2, 1)
        assert diffuse_adjoint(tree, np.ones((2, 3, 3)), [None] * 3) is None


class TestComposeFilters:
    def test_identity(self):
        rng = np.random.default_rng(0)
        tree = DiffusionTree.full(2, 2)
        h = random_filter(tree, rng)
        product, dropped = compose_filters(
            MultigraphFilter.identity(tree), h, 2
        )
        assert dropped == 0.0
        assert product.coeffs == h.coeffs

    def test_square(self):
        tree = DiffusionTree.full(1, 1)
        h = MultigraphFilter(tree, {(0,): 1.0})
        product, _ = compose_filters(h, h, 2)
        assert product.coeffs == {(0, 0): 1.0}

    def test_order_is_kept(self):
        tree = DiffusionTree.full(2, 1)
        a = MultigraphFilter(tree, {(0,): 2.0})
        b = MultigraphFilter(tree, {(1,): 3.0})
        product, _ = compose_filters(a, b, 2)
        assert product.coeffs == {(0, 1): 6.0}
        reverse, _ = compose_filters(b, a, 2)
        assert reverse.coeffs == {(1, 0): 6.0}

    def test_dropped_mass(self):
        tree = DiffusionTree.full(2, 1)
        a = MultigraphFilter(tree, {(): 1.0, (0,): -2.0})
        b = MultigraphFilter(tree, {(): 0.5, (1,): 3.0})
        product, dropped = compose_filters(a, b, 1)
        assert dropped == 6.0
        assert product.coeffs == {(): 0.5, (1,): 3.0, (0,): -1.0}
        assert product.tree.depth == 1

    def test_dense_product(self):
        rng = np.random.default_rng(5)
        mg = random_multigraph(4, 2, 5)
        a = random_filter(DiffusionTree.full(2, 2), rng)
        b = random_filter(DiffusionTree.full(2, 2), rng)
        product, dropped = compose_filters(a, b, 4)
        assert dropped == 0.0
        np.testing.assert_allclose(
            filter_matrix(product, mg),
            filter_matrix(a, mg) @ filter_matrix(b, mg),
            atol=1e-12,
        )

    def test_class_mismatch(self):
        with pytest.raises(ValueError):
            compose_filters(
                MultigraphFilter.identity(DiffusionTree.full(1, 1)),
                MultigraphFilter.identity(DiffusionTree.full(2, 1)),
                2,
            )


class TestShiftInvariance:
    def test_single_class_filter(self):
        rng = np.random.default_rng(0)
        mg = random_multigraph(5, 2, 0)
        h = MultigraphFilter(
            DiffusionTree.full(2, 3),
            {(): 1.0, (0,): 0.5, (0, 0, 0): -0.25},
        )
        assert is_shift_invariant(h, (0,), mg)
        assert is_shift_invariant(h, (0, 0), mg)
        assert not is_shift_invariant(h, (1,), mg)
        assert is_shift_invariant(random_filter(h.tree, rng), (), mg)

    def test_commuting_family(self):
        rng = np.random.default_rng(1)
        Q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        mg = Multigraph(
            [Q @ np.diag(rng.random(5)) @ Q.T for _ in range(2)]
        )
        h = random_filter(DiffusionTree.full(2, 2), rng)
        assert is_shift_invariant(h, (1, 0), mg)


class TestFilterIO:
    def test_scalar_file(self, tmp_path):
        rng = np.random.default_rng(0)
        h = random_filter(DiffusionTree.full(2, 2), rng)
        path = str(tmp_path / "filter.json")
        save_filter(h, path)
        loaded = load_filter(path)
        assert loaded.tree == h.tree
        assert loaded.coeffs == h.coeffs

    def test_mimo_dict(self):
        rng = np.random.default_rng(1)
        tree = DiffusionTree.full(1, 2)
        H = MimoFilter(tree, {w: rng.standard_normal((2, 3)) for w in tree})
        content = json.loads(json.dumps(filter_to_dict(H)))
        assert content["f_in"] == 2
        assert set(content["coeffs"]) == {"I", "0", "0-0"}
        loaded = filter_from_dict(content)
        assert (loaded.f_in, loaded.f_out) == (2, 3)
        for w in tree:
            np.testing.assert_array_equal(loaded.coeffs[w], H.coeffs[w])

    def test_sparse_filter(self):
        h = MultigraphFilter(DiffusionTree.full(2, 3), {(1, 0, 1): 2.0})
        loaded = filter_from_dict(filter_to_dict(h))
        assert loaded.coeffs == {(1, 0, 1): 2.0}
        assert loaded.tree.words == ((), (1,), (0, 1), (1, 0, 1))

    @pytest.mark.parametrize(
        "content",
        [
            {"m": 2, "coeffs": {}},
            {"depth": 1, "m": 2},
            {"depth": "x", "m": 2, "coeffs": {}},
            {"depth": None, "m": 2, "coeffs": {}},
        ],
    )
    def test_malformed(self, content):
        with pytest.raises(ParseError):
            filter_from_dict(content)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "filter.json"
        path.write_text('{"depth": 1,\n  "m": }')
        with pytest.raises(ParseError) as e:
            load_filter(str(path))
        assert e.value.line == 2


class TestValidation:
    def test_word_outside_tree(self):
        with pytest.raises(ArgumentsError):
            MultigraphFilter(DiffusionTree.full(2, 1), {(0, 1): 1.0})

    @pytest.mark.parametrize("value", [np.nan, np.inf, "1"])
    def test_invalid_coefficient(self, value):
        with pytest.raises(ValueError):
            MultigraphFilter(DiffusionTree.full(1, 1), {(0,): value})

    def test_tree_type(self):
        with pytest.raises(TypeError):
            MultigraphFilter([(), (0,)], {(): 1.0})

    def test_coefficient(self):
        h = MultigraphFilter(DiffusionTree.full(2, 1), {(1,): 2.0})
        assert h.coefficient((1,)) == 2.0
        assert h.coefficient(()) == 0.0
