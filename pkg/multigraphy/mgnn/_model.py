import numbers

import numpy as np

from ..diffusion import DiffusionTree
from ..diffusion import split_homogeneous
from ..exceptions import ArgumentsError
from ..filters import MimoFilter
from ..sampling import PoolConfig
from ..sampling import SelectionPlan
from ..utils import as_generator

NONLINEARITIES = ("relu", "sigmoid", "tanh", "identity")
VARIANTS = ("mgnn", "merged", "parallel")
READOUT_MODES = ("graph", "node")
OUTPUT_ACTIVATIONS = ("identity", "relu")
INITS = ("uniform", "zeros")


class LayerSpec:
    """One multigraph perceptron: sample or pool, convolve, apply
    ``nonlinearity`` pointwise.

    Parameters
    ----------

    filter : MimoFilter
        Trainable per-word coefficient matrices.

    nonlinearity : str, default="relu"

    pooling : PoolConfig, optional
        Pool over neighborhoods instead of plain sampling.

    selected_nodes : int, optional
        ``N_l``; None keeps every node of the previous layer.

    """

    def __init__(
        self, filter, nonlinearity="relu", pooling=None, selected_nodes=None
    ):
        self.filter = filter
        self.nonlinearity = nonlinearity
        self.pooling = pooling
        self.selected_nodes = selected_nodes
        self.__validate_input()

    def __validate_input(self):
        if not isinstance(self.filter, MimoFilter):
            raise TypeError(
                f"'filter' should be a MimoFilter. Received {self.filter} of"
                f" type {type(self.filter)}"
            )
        if self.nonlinearity not in NONLINEARITIES:
            raise ArgumentsError(
                f"Allowed values for nonlinearity are {NONLINEARITIES}, got"
                f" {self.nonlinearity}"
            )
        if self.pooling is not None and not isinstance(
            self.pooling, PoolConfig
        ):
            raise TypeError(
                f"'pooling' should be a PoolConfig. Received {self.pooling}"
                f" of type {type(self.pooling)}"
            )
        if self.selected_nodes is not None and (
            not isinstance(self.selected_nodes, numbers.Integral)
            or self.selected_nodes < 1
        ):
            raise ValueError(
                "selected_nodes should be a positive integer, got"
                f" {self.selected_nodes}"
            )

    @property
    def tree(self):
        return self.filter.tree

    @property
    def f_in(self):
        return self.filter.f_in

    @property
    def f_out(self):
        return self.filter.f_out

    def __repr__(self):
        return (
            f"LayerSpec({self.filter!r}, nonlinearity={self.nonlinearity!r},"
            f" pooling={self.pooling!r}, selected_nodes={self.selected_nodes})"
        )


class Readout:
    """Dense affine layers on top of the convolutional stack.

    ``layers`` holds ``(W, b)`` pairs with ``W`` of shape (in, out); relu is
    applied between layers and ``output_activation`` after the last one.
    In "graph" mode the final ``N_L x G`` features are flattened (row-major)
    before the first layer; in "node" mode every node is mapped by the same
    layers.
    """

    def __init__(self, layers, mode="graph", output_activation="identity"):
        self.layers = [
            (np.array(W, dtype=float), np.array(b, dtype=float))
            for W, b in layers
        ]
        self.mode = mode
        self.output_activation = output_activation
        self.__validate_input()

    def __validate_input(self):
        if len(self.layers) == 0:
            raise ValueError("Readout needs at least one affine layer")
        if self.mode not in READOUT_MODES:
            raise ArgumentsError(
                f"Allowed values for mode are {READOUT_MODES}, got"
                f" {self.mode}"
            )
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ArgumentsError(
                "Allowed values for output_activation are"
                f" {OUTPUT_ACTIVATIONS}, got {self.output_activation}"
            )
        for k, (W, b) in enumerate(self.layers):
            if W.ndim != 2 or b.shape != (W.shape[1],):
                raise ValueError(
                    f"Readout layer {k} has weight shape {W.shape} and bias"
                    f" shape {b.shape}"
                )
            if k and W.shape[0] != self.layers[k - 1][0].shape[1]:
                raise ValueError(
                    f"Readout layer {k} expects {W.shape[0]} inputs, previous"
                    f" layer gives {self.layers[k - 1][0].shape[1]}"
                )

    @property
    def n_inputs(self):
        return self.layers[0][0].shape[0]

    @property
    def n_outputs(self):
        return self.layers[-1][0].shape[1]


class MGNNModel:
    """Multigraph neural network: one or more towers of ``LayerSpec`` whose
    final features are concatenated and passed to an optional ``Readout``.

    Parameters
    ----------

    towers : list of list of LayerSpec
        "mgnn" and "merged" models have one tower, "parallel" models one per
        edge class.

    readout : Readout, optional
        Without a readout the output is the concatenated tower features.

    variant : str, default="mgnn"

    plan : SelectionPlan, optional
        Node selection shared by every tower.

    """

    def __init__(self, towers, readout=None, variant="mgnn", plan=None):
        self.towers = [list(t) for t in towers]
        self.readout = readout
        self.variant = variant
        self.plan = plan
        self.metadata = {}
        self.__validate_input()

    def __validate_input(self):
        if self.variant not in VARIANTS:
            raise ArgumentsError(
                f"Allowed values for variant are {VARIANTS}, got"
                f" {self.variant}"
            )
        if len(self.towers) == 0 or any(len(t) == 0 for t in self.towers):
            raise ValueError("Every tower needs at least one layer")
        if self.variant != "parallel" and len(self.towers) != 1:
            raise ValueError(
                f"A {self.variant} model has a single tower, got"
                f" {len(self.towers)}"
            )
        if self.plan is not None and not isinstance(
            self.plan, SelectionPlan
        ):
            raise TypeError(
                f"'plan' should be a SelectionPlan. Received {self.plan} of"
                f" type {type(self.plan)}"
            )
        if self.readout is not None and not isinstance(self.readout, Readout):
            raise TypeError(
                f"'readout' should be a Readout. Received {self.readout} of"
                f" type {type(self.readout)}"
            )

        depth = len(self.towers[0])
        for t, tower in enumerate(self.towers):
            if len(tower) != depth:
                raise ValueError("All towers must have the same depth")
            if tower[0].f_in != self.towers[0][0].f_in:
                raise ValueError(
                    f"Tower {t} expects {tower[0].f_in} input features,"
                    f" tower 0 expects {self.towers[0][0].f_in}"
                )
            for k, layer in enumerate(tower):
                if k and layer.f_in != tower[k - 1].f_out:
                    raise ValueError(
                        f"Tower {t} layer {k} expects {layer.f_in} features,"
                        f" layer {k - 1} produces {tower[k - 1].f_out}"
                    )
                self.__validate_selection(t, k, layer)
                if self.variant == "merged":
                    _, mixed = split_homogeneous(layer.tree)
                    if mixed:
                        raise ValueError(
                            "A merged model only holds pure powers, tower"
                            f" {t} layer {k} has {len(mixed)} mixed words"
                        )
                if self.variant == "parallel":
                    used = {i for w in layer.filter.coeffs for i in w}
                    if not used <= {t}:
                        raise ValueError(
                            f"Parallel tower {t} layer {k} uses classes"
                            f" {sorted(used)}"
                        )

    def __validate_selection(self, t, k, layer):
        wanted = None if self.plan is None else self.plan.counts[k + 1]
        if self.plan is not None and self.plan.n_layers != len(self.towers[0]):
            raise ValueError(
                f"Selection plan covers {self.plan.n_layers} layers, model"
                f" has {len(self.towers[0])}"
            )
        if layer.selected_nodes != wanted:
            raise ValueError(
                f"Tower {t} layer {k} selects {layer.selected_nodes} nodes,"
                f" the selection plan gives {wanted}"
            )
        if layer.pooling is not None and self.plan is None:
            raise ArgumentsError(
                f"Tower {t} layer {k} pools without a selection plan"
            )

    @property
    def layers(self):
        """Layers of the first tower."""
        return self.towers[0]

    @property
    def n_classes(self):
        return self.towers[0][0].tree.m

    @property
    def f_in(self):
        return self.towers[0][0].f_in

    @property
    def n_features_out(self):
        return sum(tower[-1].f_out for tower in self.towers)

    def parameters(self):
        """Trainable arrays in a fixed order: towers, layers and words in
        tree order, then readout weights and biases."""
        params = []
        for tower in self.towers:
            for layer in tower:
                params.extend(
                    layer.filter.coeffs[w]
                    for w in layer.tree.words
                    if w in layer.filter.coeffs
                )
        if self.readout is not None:
            for W, b in self.readout.layers:
                params.extend([W, b])
        return params

    def __repr__(self):
        return (
            f"MGNNModel(variant={self.variant!r}, towers={len(self.towers)},"
            f" layers={len(self.towers[0])}, plan={self.plan!r})"
        )


def layer_parameter_count(layer):
    """``|words| * F * G``; independent of the node count."""
    return layer.filter.n_parameters()


def count_parameters(model):
    total = sum(
        layer_parameter_count(layer)
        for tower in model.towers
        for layer in tower
    )
    if model.readout is not None:
        total += sum(W.size + b.size for W, b in model.readout.layers)
    return total


def merged_tree(tree):
    """Identity and pure powers ``S_i^k`` of ``tree``."""
    homogeneous, _ = split_homogeneous(tree)
    return DiffusionTree(tree.m, tree.depth, homogeneous)


def single_class_tree(m, depth, g):
    return DiffusionTree.from_words(
        m, depth, [(g,) * k for k in range(1, depth + 1)]
    )


def _init_coeffs(tree, f_in, f_out, init, rng):
    if init == "zeros":
        return MimoFilter.zeros(tree, f_in, f_out)
    bound = np.sqrt(6.0 / (f_in + f_out)) / len(tree)
    return MimoFilter(
        tree,
        {w: rng.uniform(-bound, bound, (f_in, f_out)) for w in tree.words},
        f_in,
        f_out,
    )


def _init_readout(sizes, init, rng):
    layers = []
    for a, b in zip(sizes, sizes[1:]):
        if init == "zeros":
            W = np.zeros((a, b))
        else:
            bound = np.sqrt(6.0 / (a + b))
            W = rng.uniform(-bound, bound, (a, b))
        layers.append((W, np.zeros(b)))
    return layers


def build_model(
    tree,
    widths,
    f_in=1,
    nonlinearity="relu",
    last_nonlinearity=None,
    variant="mgnn",
    n_outputs=None,
    readout_mode="graph",
    hidden=(),
    output_activation="identity",
    n_nodes=None,
    plan=None,
    pooling=None,
    init="uniform",
    seed=0,
):
    """Randomly initialized model over the words of ``tree``.

    Parameters
    ----------

    tree : DiffusionTree
        Words available to every layer; "merged" keeps its pure powers and
        "parallel" builds one single-class tower per edge class.

    widths : sequence of int
        ``G_l`` per layer.

    f_in : int, default=1

    nonlinearity : str, default="relu"

    last_nonlinearity : str, optional
        Nonlinearity of the last layer, ``nonlinearity`` by default.

    variant : str, default="mgnn"

    n_outputs : int, optional
        Readout output size; no readout when None.

    readout_mode : str, default="graph"

    hidden : sequence of int, default=()
        Hidden readout widths.

    output_activation : str, default="identity"

    n_nodes : int, optional
        Node count, required by a "graph" readout without a plan.

    plan : SelectionPlan, optional

    pooling : PoolConfig or list of PoolConfig, optional
        One config for every layer or one per layer.

    init : str, default="uniform"
        "uniform" draws per-word matrices in ``+-sqrt(6 / (F + G))``
        divided by the number of words; "zeros" starts from zero.

    seed : int or numpy Generator, default=0

    Returns
    -------

    model : MGNNModel

    """
    if variant not in VARIANTS:
        raise ArgumentsError(
            f"Allowed values for variant are {VARIANTS}, got {variant}"
        )
    if init not in INITS:
        raise ArgumentsError(
            f"Allowed values for init are {INITS}, got {init}"
        )
    widths = [int(g) for g in widths]
    if len(widths) == 0 or any(g < 1 for g in widths):
        raise ValueError(f"widths should be positive integers, got {widths}")
    if plan is not None and plan.n_layers != len(widths):
        raise ValueError(
            f"Selection plan covers {plan.n_layers} layers, got"
            f" {len(widths)} widths"
        )
    if pooling is None or isinstance(pooling, PoolConfig):
        pooling = [pooling] * len(widths)
    if len(pooling) != len(widths):
        raise ValueError(
            f"Got {len(pooling)} pooling configs for {len(widths)} layers"
        )
    if last_nonlinearity is None:
        last_nonlinearity = nonlinearity
    rng = as_generator(seed)

    if variant == "mgnn":
        trees = [tree]
    elif variant == "merged":
        trees = [merged_tree(tree)]
    else:
        trees = [
            single_class_tree(tree.m, tree.depth, g) for g in range(tree.m)
        ]

    towers = []
    for t_tree in trees:
        tower = []
        sizes = [f_in] + widths
        for k in range(len(widths)):
            last = k == len(widths) - 1
            tower.append(
                LayerSpec(
                    _init_coeffs(t_tree, sizes[k], sizes[k + 1], init, rng),
                    last_nonlinearity if last else nonlinearity,
                    pooling[k],
                    None if plan is None else plan.counts[k + 1],
                )
            )
        towers.append(tower)

    readout = None
    if n_outputs is not None:
        features = widths[-1] * len(towers)
        if readout_mode == "graph":
            n_last = plan.counts[-1] if plan is not None else n_nodes
            if n_last is None:
                raise ArgumentsError(
                    "A graph readout needs n_nodes or a selection plan"
                )
            n_in = n_last * features
        else:
            n_in = features
        readout = Readout(
            _init_readout([n_in, *hidden, n_outputs], init, rng),
            readout_mode,
            output_activation,
        )
    return MGNNModel(towers, readout, variant, plan)


def build_baseline(variant, m, K, widths, **kwargs):
    """Merged or parallel baseline over the full depth-``K`` word set.

    Keyword arguments are passed on to ``build_model``.
    """
    if variant not in ("parallel", "merged"):
        raise ArgumentsError(
            f"Baselines are 'parallel' or 'merged', got {variant}"
        )
    return build_model(
        DiffusionTree.full(m, K), widths, variant=variant, **kwargs
    )
