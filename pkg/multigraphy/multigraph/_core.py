import numbers
import warnings

import numpy as np

from ..exceptions import ArgumentsError
from ..utils import as_generator
from ._linalg import spectral_norm

KINDS = ("adjacency", "laplacian", "custom")


class ShiftOperator:
    """Matrix of one edge class of a multigraph.

    The matrix follows the column-to-row diffusion convention used across
    the package: ``z = S x`` moves the value of node ``src`` (column) to node
    ``dst`` (row), so an edge ``src -> dst`` of weight ``w`` sits at
    ``S[dst, src]``.

    Parameters
    ----------

    matrix : array_like of shape (N, N)

    kind : str, default="custom"
        One of "adjacency", "laplacian" or "custom".

    spectrally_normalized : bool, default=False
        Set by ``spectral_normalize``; marks ``||S||_2 <= 1``.

    """

    def __init__(self, matrix, kind="custom", spectrally_normalized=False):
        self.__validate_input(matrix, kind, spectrally_normalized)
        self._matrix = np.array(matrix, dtype=float)
        self._matrix.setflags(write=False)
        self.kind = kind
        self.spectrally_normalized = spectrally_normalized

    def __validate_input(self, matrix, kind, spectrally_normalized):
        arr = np.asarray(matrix)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(
                f"Shift operator must be a square matrix. Received shape"
                f" {arr.shape}"
            )
        if arr.shape[0] < 1:
            raise ValueError("Shift operator must have at least one node")
        if not np.all(np.isfinite(arr)):
            raise ValueError("Shift operator contains non-finite entries")
        if kind not in KINDS:
            raise ArgumentsError(
                f"Allowed values for kind are {KINDS}, got {kind}"
            )
        if not isinstance(spectrally_normalized, bool):
            raise TypeError(
                "'spectrally_normalized' should be of type bool. Received"
                f" {spectrally_normalized} of type"
                f" {type(spectrally_normalized)}"
            )

    @property
    def matrix(self):
        return self._matrix

    @property
    def n_nodes(self):
        return self._matrix.shape[0]

    def norm(self):
        return spectral_norm(self._matrix)

    def __repr__(self):
        return (
            f"ShiftOperator(n_nodes={self.n_nodes}, kind={self.kind!r},"
            f" spectrally_normalized={self.spectrally_normalized})"
        )


class Multigraph:
    """A node set shared by ``m`` edge classes, one shift operator each.

    Operator ``i`` identifies edge class ``i`` for the lifetime of the
    object; the order is never changed.
    """

    def __init__(self, operators):
        if operators is None or len(operators) == 0:
            raise ArgumentsError(
                "A multigraph needs at least one shift operator"
            )
        ops = []
        for op in operators:
            if not isinstance(op, ShiftOperator):
                op = ShiftOperator(op)
            ops.append(op)
        n_nodes = ops[0].n_nodes
        for i, op in enumerate(ops):
            if op.n_nodes != n_nodes:
                raise ValueError(
                    f"Operator {i} is {op.n_nodes}x{op.n_nodes}, expected"
                    f" {n_nodes}x{n_nodes}"
                )
        self._operators = tuple(ops)
        self._matrices = np.stack([op.matrix for op in ops])
        self._matrices.setflags(write=False)

    @property
    def n_nodes(self):
        return self._matrices.shape[1]

    @property
    def n_classes(self):
        return len(self._operators)

    @property
    def operators(self):
        return self._operators

    @property
    def matrices(self):
        """Read-only stack of shape (m, N, N)."""
        return self._matrices

    @property
    def is_normalized(self):
        return all(op.spectrally_normalized for op in self._operators)

    def normalized(self):
        return Multigraph([spectral_normalize(op) for op in self._operators])

    def __len__(self):
        return self.n_classes

    def __getitem__(self, index):
        return self._operators[index]

    def __repr__(self):
        return (
            f"Multigraph(n_nodes={self.n_nodes},"
            f" n_classes={self.n_classes})"
        )


class Permutation:
    """Relabeling of nodes: new node ``k`` is old node ``perm[k]``.

    As a matrix ``P = I[:, perm]``, so relabeled operators are ``P^T S P``
    and relabeled signals ``P^T x``.
    """

    def __init__(self, perm):
        arr = np.asarray(perm)
        if arr.ndim != 1 or not np.issubdtype(arr.dtype, np.integer):
            raise TypeError(
                "'perm' should be a one dimensional integer array. Received"
                f" {perm}"
            )
        if not np.array_equal(np.sort(arr), np.arange(arr.shape[0])):
            raise ValueError(f"{perm} is not a permutation of 0..N-1")
        self._perm = arr.astype(np.int64)
        self._perm.setflags(write=False)

    @classmethod
    def identity(cls, n):
        return cls(np.arange(n))

    @classmethod
    def random(cls, n, seed=None):
        return cls(as_generator(seed).permutation(n))

    @property
    def perm(self):
        return self._perm

    def __len__(self):
        return self._perm.shape[0]

    def inverse(self):
        return Permutation(np.argsort(self._perm))

    def then(self, other):
        """Relabeling by ``self`` followed by ``other``."""
        if len(other) != len(self):
            raise ValueError("Permutations act on different node counts")
        return Permutation(self._perm[other.perm])

    def matrix(self):
        return np.eye(len(self))[:, self._perm]

    def __eq__(self, other):
        return isinstance(other, Permutation) and np.array_equal(
            self._perm, other.perm
        )

    def __repr__(self):
        return f"Permutation({self._perm.tolist()})"


def _check_edges(n_nodes, edges):
    if not isinstance(n_nodes, numbers.Integral) or n_nodes < 1:
        raise ValueError(
            f"n_nodes should be a positive integer. Received {n_nodes}"
        )
    for edge in edges:
        if len(edge) != 3:
            raise ValueError(
                f"Edges are (src, dst, weight) triples. Received {edge}"
            )
        src, dst, weight = edge
        for node in (src, dst):
            if not isinstance(node, numbers.Integral):
                raise TypeError(f"Node ids must be integers. Received {node}")
            if node < 0 or node >= n_nodes:
                raise ValueError(
                    f"Node id {node} out of range for {n_nodes} nodes"
                )
        if not np.isfinite(weight):
            raise ValueError(f"Edge {edge} has a non-finite weight")


def build_shift_operator(n_nodes, edges, kind="adjacency"):
    """Build a shift operator from an edge list.

    Parameters
    ----------

    n_nodes : int

    edges : iterable of (src, dst, weight)
        Repeated edges accumulate.

    kind : str, default="adjacency"
        "adjacency" sets ``M[dst, src] += weight``. "laplacian" returns
        ``D - W`` where ``W = max(A, A^T)`` is the symmetrized adjacency, so
        an undirected edge may be listed once or in both directions.

    Returns
    -------

    operator : ShiftOperator

    """
    edges = list(edges)
    _check_edges(n_nodes, edges)
    if kind not in ("adjacency", "laplacian"):
        raise ArgumentsError(
            "Allowed argument for kind is 'adjacency' or 'laplacian', got"
            f" {kind}"
        )

    adjacency = np.zeros((n_nodes, n_nodes))
    for src, dst, weight in edges:
        adjacency[dst, src] += weight

    if kind == "adjacency":
        return ShiftOperator(adjacency, kind="adjacency")

    weights = np.maximum(adjacency, adjacency.T)
    laplacian = np.diag(weights.sum(axis=1)) - weights
    return ShiftOperator(laplacian, kind="laplacian")


def spectral_normalize(op):
    """Divide an operator by its largest singular value.

    Zero operators are returned unchanged (and flagged as normalized).
    """
    if not isinstance(op, ShiftOperator):
        op = ShiftOperator(op)
    sigma = op.norm()
    if sigma == 0:
        return ShiftOperator(op.matrix, op.kind, spectrally_normalized=True)
    return ShiftOperator(
        op.matrix / sigma, op.kind, spectrally_normalized=True
    )


def permute(mg, x, p):
    """Relabel a multigraph and a signal consistently.

    Parameters
    ----------

    mg : Multigraph

    x : array_like of shape (N,) or (N, F), or None

    p : Permutation

    Returns
    -------

    (Multigraph, ndarray or None) with ``S_i -> P^T S_i P`` and
    ``x -> P^T x``.

    """
    if len(p) != mg.n_nodes:
        raise ValueError(
            f"Permutation of length {len(p)} cannot relabel a multigraph with"
            f" {mg.n_nodes} nodes"
        )
    idx = p.perm
    operators = [
        ShiftOperator(
            op.matrix[np.ix_(idx, idx)], op.kind, op.spectrally_normalized
        )
        for op in mg.operators
    ]
    if x is not None:
        x = np.asarray(x, dtype=float)
        if x.shape[0] != mg.n_nodes:
            raise ValueError(
                f"Signal has {x.shape[0]} rows, multigraph has {mg.n_nodes}"
                " nodes"
            )
        x = x[idx]
    return Multigraph(operators), x


def _as_matrix(op):
    return op.matrix if isinstance(op, ShiftOperator) else np.asarray(op)


def commutator_norm(a, b):
    """Spectral norm of ``AB - BA``."""
    A = _as_matrix(a)
    B = _as_matrix(b)
    if A.shape != B.shape:
        raise ValueError(
            f"Operators have different shapes {A.shape} and {B.shape}"
        )
    return spectral_norm(A @ B - B @ A)


def check_normalized(mg, context):
    if not mg.is_normalized:
        norms = [op.norm() for op in mg.operators]
        if max(norms) > 1 + 1e-12:
            warnings.warn(
                f"{context} assumes spectrally normalized operators, largest"
                f" operator norm is {max(norms):.6g}"
            )


def as_signal(mg, x):
    """Validate a single-feature signal against ``mg``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != mg.n_nodes:
        raise ValueError(
            f"Expected a signal of length {mg.n_nodes}, received shape"
            f" {x.shape}"
        )
    return x


def as_features(mg, X):
    """Validate an N x F feature matrix against ``mg``."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] != mg.n_nodes:
        raise ValueError(
            f"Expected a feature matrix with {mg.n_nodes} rows, received"
            f" shape {X.shape}"
        )
    return X
