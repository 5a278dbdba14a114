import numbers

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from ..exceptions import ArgumentsError
from ..utils import as_generator

METHODS = ("degree", "random", "coverage")
AGGREGATORS = ("mean", "median", "max")

# entries of operator powers at or below this magnitude count as zero
SUPPORT_THRESHOLD = 1e-12


class SelectionPlan:
    """Nested node selection for every layer.

    Nodes are relabeled so that the nodes kept at layer ``l`` are the first
    ``counts[l]`` entries of ``node_order``; ``counts[0]`` is N.

    Parameters
    ----------

    node_order : array_like of int
        Permutation of the original node ids.

    counts : sequence of int
        ``N_0 >= N_1 >= ... >= N_L``.

    """

    def __init__(self, node_order, counts):
        self.node_order = np.asarray(node_order, dtype=np.int64)
        self.counts = tuple(int(c) for c in counts)
        self.__validate_input()
        self.node_order.setflags(write=False)

    def __validate_input(self):
        n = self.node_order.shape[0]
        if not np.array_equal(np.sort(self.node_order), np.arange(n)):
            raise ValueError("node_order must be a permutation of 0..N-1")
        if len(self.counts) == 0 or self.counts[0] != n:
            raise ValueError(
                f"counts must start with the node count {n}, got"
                f" {self.counts}"
            )
        if any(c < 1 for c in self.counts):
            raise ValueError(f"counts must be positive, got {self.counts}")
        if any(a < b for a, b in zip(self.counts, self.counts[1:])):
            raise ValueError(
                f"counts must be non-increasing, got {self.counts}"
            )

    @classmethod
    def identity(cls, n_nodes, n_layers=1):
        return cls(np.arange(n_nodes), (n_nodes,) * (n_layers + 1))

    @property
    def n_layers(self):
        return len(self.counts) - 1

    def selected(self, layer):
        """Original ids of the nodes kept at ``layer``."""
        return self.node_order[: self.counts[layer]]

    def relabeled_operators(self, mg):
        idx = self.node_order
        return mg.matrices[:, idx][:, :, idx]

    def to_dict(self):
        return {
            "node_order": self.node_order.tolist(),
            "counts": list(self.counts),
        }

    @classmethod
    def from_dict(cls, content):
        return cls(content["node_order"], content["counts"])

    def __repr__(self):
        return f"SelectionPlan(counts={self.counts})"


class PoolConfig:
    """Pooling reach ``alpha`` and aggregation for one layer."""

    def __init__(self, alpha=1, aggregator="mean"):
        if not isinstance(alpha, numbers.Integral) or alpha < 0:
            raise ValueError(
                f"alpha should be a non-negative integer, got {alpha}"
            )
        if aggregator not in AGGREGATORS:
            raise ArgumentsError(
                f"Allowed values for aggregator are {AGGREGATORS}, got"
                f" {aggregator}"
            )
        self.alpha = int(alpha)
        self.aggregator = aggregator

    def to_dict(self):
        return {"alpha": self.alpha, "aggregator": self.aggregator}

    def __repr__(self):
        return (
            f"PoolConfig(alpha={self.alpha},"
            f" aggregator={self.aggregator!r})"
        )


def _total_degree(mg):
    weights = np.abs(mg.matrices).copy()
    idx = np.arange(mg.n_nodes)
    weights[:, idx, idx] = 0
    return weights.sum(axis=(0, 1)) + weights.sum(axis=(0, 2))


def _coverage_ranking(mg):
    union = np.any(mg.matrices != 0, axis=0)
    hops = shortest_path(
        csr_matrix(union.astype(float)), directed=False, unweighted=True
    )
    degree = _total_degree(mg)
    first = int(np.lexsort((np.arange(mg.n_nodes), -degree))[0])
    ranking = [first]
    closest = hops[first].copy()
    closest[first] = -1
    for _ in range(mg.n_nodes - 1):
        nxt = int(np.argmax(closest))
        ranking.append(nxt)
        closest = np.minimum(closest, hops[nxt])
        closest[ranking] = -1
    return np.asarray(ranking)


def select_nodes(mg, counts, method="degree", seed=None):
    """Heuristic nested selection.

    Parameters
    ----------

    mg : Multigraph

    counts : sequence of int
        ``N_1 >= ... >= N_L``; ``N_0 = N`` is implied.

    method : str, default="degree"
        "degree" ranks by total degree summed across classes (ties by id),
        "random" by a seeded shuffle, "coverage" greedily maximizes the
        minimal hop distance to already ranked nodes on the union graph.

    seed : int, optional

    Returns
    -------

    plan : SelectionPlan
        Within each group of nodes dropped at the same layer, original ids
        keep their order, so keeping every node gives the identity plan.

    """
    n = mg.n_nodes
    counts = tuple(int(c) for c in counts)
    if any(c > n for c in counts):
        raise ValueError(f"counts {counts} exceed the node count {n}")
    if any(c < 1 for c in counts):
        raise ValueError(f"counts must be positive, got {counts}")
    full = (n,) + counts
    if any(a < b for a, b in zip(full, full[1:])):
        raise ValueError(f"counts must be non-increasing, got {counts}")
    if method not in METHODS:
        raise ArgumentsError(
            f"Allowed values for method are {METHODS}, got {method}"
        )

    if method == "degree":
        ranking = np.lexsort((np.arange(n), -_total_degree(mg)))
    elif method == "random":
        ranking = as_generator(seed).permutation(n)
    else:
        ranking = _coverage_ranking(mg)

    layer_of = np.zeros(n, dtype=np.int64)
    for layer, count in enumerate(full):
        layer_of[ranking[:count]] = layer
    # deepest layer first, ids ascending inside a layer
    node_order = np.lexsort((np.arange(n), -layer_of))
    return SelectionPlan(node_order, full)


def sampling_matrices(plan, layer):
    """Binary ``D_l`` (``N_l x N_{l-1}``) and ``E_l`` (``N_l x N``)."""
    if not 1 <= layer <= plan.n_layers:
        raise ValueError(
            f"layer should be in [1, {plan.n_layers}], got {layer}"
        )
    D = np.eye(plan.counts[layer], plan.counts[layer - 1])
    E = np.eye(plan.counts[layer], plan.counts[0])
    return D, E


def pooled_operators(plan, mg, layer):
    """Operators of ``layer`` in plan coordinates,
    ``S_{l,g} = D_l S_{l-1,g} D_l^T`` with ``S_{0,g}`` the relabeled
    ``S_g``."""
    if not 0 <= layer <= plan.n_layers:
        raise ValueError(
            f"layer should be in [0, {plan.n_layers}], got {layer}"
        )
    matrices = plan.relabeled_operators(mg)
    for k in range(1, layer + 1):
        n = plan.counts[k]
        matrices = matrices[:, :n, :n]
    return [S.copy() for S in matrices]


def _power_supports(S, alpha):
    support = np.eye(S.shape[0], dtype=bool)
    power = np.eye(S.shape[0])
    for _ in range(alpha):
        power = S @ power
        support |= np.abs(power) > SUPPORT_THRESHOLD
    return support


def neighborhood(plan, mg, layer, i, g, alpha):
    """``alpha``-hop neighborhood of node ``i`` (layer-``l`` label) on class
    ``g``, restricted to the nodes kept at layer ``l - 1``.

    Returns a set of plan labels.
    """
    if not 1 <= layer <= plan.n_layers:
        raise ValueError(
            f"layer should be in [1, {plan.n_layers}], got {layer}"
        )
    if not 0 <= i < plan.counts[layer]:
        raise ValueError(
            f"node {i} is not selected at layer {layer}"
        )
    S = plan.relabeled_operators(mg)[g]
    support = _power_supports(S, alpha)
    row = support[i, : plan.counts[layer - 1]]
    return set(np.flatnonzero(row).tolist())


def multigraph_neighborhood(plan, mg, layer, i, alpha):
    """Union over edge classes of ``neighborhood``."""
    nodes = set()
    for g in range(mg.n_classes):
        nodes |= neighborhood(plan, mg, layer, i, g, alpha)
    return nodes


def stack_neighborhoods(matrices, n_keep, n_prev, alpha):
    """Sorted multigraph neighborhoods of the first ``n_keep`` nodes of an
    already relabeled ``(m, N, N)`` operator stack, restricted to the first
    ``n_prev`` nodes."""
    n = matrices.shape[-1]
    support = np.zeros((n, n), dtype=bool)
    for S in matrices:
        support |= _power_supports(S, alpha)
    return [np.flatnonzero(support[i, :n_prev]) for i in range(n_keep)]


def layer_neighborhoods(plan, mg, layer, alpha):
    """Sorted multigraph neighborhoods of every node kept at ``layer``."""
    if not 1 <= layer <= plan.n_layers:
        raise ValueError(
            f"layer should be in [1, {plan.n_layers}], got {layer}"
        )
    return stack_neighborhoods(
        plan.relabeled_operators(mg),
        plan.counts[layer],
        plan.counts[layer - 1],
        alpha,
    )
