import numbers

import numpy as np

from ..diffusion import DiffusionTree
from ..diffusion import word_operator
from ..diffusion import word_to_str
from ..exceptions import ArgumentsError
from ..multigraph import as_features
from ..multigraph import as_signal
from ..multigraph import spectral_norm


def diffuse(tree, matrices, X):
    """Diffused copies of ``X`` for every word of ``tree``, in tree order.

    The copy for ``w`` is ``S_{w[0]}`` applied to the copy for ``w[1:]``, so
    each word costs one matrix product whatever its length.

    Parameters
    ----------

    tree : DiffusionTree

    matrices : ndarray of shape (..., m, N, N)
        Operator stack; a leading batch axis gives every sample its own
        operators.

    X : ndarray of shape (..., N, F)

    Returns
    -------

    diffused : list of ndarray, aligned with ``tree.words``.

    """
    diffused = [X]
    for w in tree.words[1:]:
        diffused.append(
            matrices[..., w[0], :, :] @ diffused[tree.index(w[1:])]
        )
    return diffused


def diffuse_adjoint(tree, matrices, upstream):
    """``sum_w A_w^T U_w`` for word operators ``A_w`` and per-word inputs
    ``upstream`` (aligned with ``tree.words``, entries may be None)."""
    acc = list(upstream)
    for k in range(len(tree.words) - 1, 0, -1):
        if acc[k] is None:
            continue
        w = tree.words[k]
        back = np.swapaxes(matrices[..., w[0], :, :], -1, -2) @ acc[k]
        parent = tree.index(w[1:])
        acc[parent] = back if acc[parent] is None else acc[parent] + back
    return acc[0]


def _check_classes(tree, mg):
    if tree.m != mg.n_classes:
        raise ValueError(
            f"Filter is defined over {tree.m} edge classes, multigraph has"
            f" {mg.n_classes}"
        )


def _check_tree(tree):
    if not isinstance(tree, DiffusionTree):
        raise TypeError(
            f"'tree' should be a DiffusionTree. Received {tree} of type"
            f" {type(tree)}"
        )


class MultigraphFilter:
    """Scalar coefficients over the words of a diffusion tree.

    ``H(S_1, ..., S_m) = sum_w coeffs[w] * S_w``; words absent from
    ``coeffs`` have coefficient zero.
    """

    def __init__(self, tree, coeffs=None):
        _check_tree(tree)
        self.tree = tree
        self.coeffs = {}
        for word, value in (coeffs or {}).items():
            word = tuple(word)
            if word not in tree:
                raise ArgumentsError(
                    f"Word {word_to_str(word)} is not part of the tree"
                )
            if not isinstance(value, numbers.Real) or not np.isfinite(value):
                raise ValueError(
                    f"Coefficient of {word_to_str(word)} should be a finite"
                    f" real, got {value}"
                )
            self.coeffs[word] = float(value)

    @classmethod
    def identity(cls, tree):
        return cls(tree, {(): 1.0})

    def coefficient(self, word):
        return self.coeffs.get(tuple(word), 0.0)

    def __repr__(self):
        return (
            f"MultigraphFilter(m={self.tree.m}, depth={self.tree.depth},"
            f" n_coeffs={len(self.coeffs)})"
        )


class MimoFilter:
    """Per-word ``F x G`` coefficient matrices mapping F input features to
    G output features."""

    def __init__(self, tree, coeffs=None, f_in=None, f_out=None):
        _check_tree(tree)
        self.tree = tree
        self.coeffs = {}
        for word, value in (coeffs or {}).items():
            word = tuple(word)
            if word not in tree:
                raise ArgumentsError(
                    f"Word {word_to_str(word)} is not part of the tree"
                )
            value = np.array(value, dtype=float)
            if value.ndim != 2:
                raise ValueError(
                    f"Coefficient of {word_to_str(word)} should be a matrix,"
                    f" got shape {value.shape}"
                )
            if f_in is None:
                f_in, f_out = value.shape
            if value.shape != (f_in, f_out):
                raise ValueError(
                    f"Coefficient of {word_to_str(word)} has shape"
                    f" {value.shape}, expected {(f_in, f_out)}"
                )
            self.coeffs[word] = value
        if f_in is None or f_out is None:
            raise ArgumentsError(
                "f_in and f_out are required for a filter without"
                " coefficients"
            )
        self.f_in = int(f_in)
        self.f_out = int(f_out)

    @classmethod
    def zeros(cls, tree, f_in, f_out):
        return cls(
            tree, {w: np.zeros((f_in, f_out)) for w in tree.words}, f_in, f_out
        )

    def n_parameters(self):
        return len(self.coeffs) * self.f_in * self.f_out

    def __repr__(self):
        return (
            f"MimoFilter(m={self.tree.m}, depth={self.tree.depth},"
            f" f_in={self.f_in}, f_out={self.f_out},"
            f" n_words={len(self.coeffs)})"
        )


def apply_filter(h, mg, x):
    """Multigraph convolution ``z = H(S_1, ..., S_m) x``.

    Word operators are never formed; each word is one matrix-vector product
    away from its suffix. Summation follows the tree's canonical order.
    """
    _check_classes(h.tree, mg)
    x = as_signal(mg, x)
    diffused = diffuse(h.tree, mg.matrices, x[:, None])
    z = np.zeros(mg.n_nodes)
    for k, word in enumerate(h.tree.words):
        c = h.coeffs.get(word)
        if c is None:
            continue
        z = z + c * diffused[k][:, 0]
    return z


def mimo_convolve(h, matrices, X, diffused=None):
    """``Y = sum_w (S_w X) F_w`` on raw arrays; ``X`` is (..., N, F)."""
    if diffused is None:
        diffused = diffuse(h.tree, matrices, X)
    Y = np.zeros(X.shape[:-1] + (h.f_out,))
    for k, word in enumerate(h.tree.words):
        F = h.coeffs.get(word)
        if F is None:
            continue
        Y = Y + diffused[k] @ F
    return Y


def apply_mimo(h, mg, X):
    """MIMO multigraph convolution of an N x F feature matrix."""
    _check_classes(h.tree, mg)
    X = as_features(mg, X)
    if X.shape[1] != h.f_in:
        raise ValueError(
            f"Filter expects {h.f_in} input features, signal has"
            f" {X.shape[1]}"
        )
    return mimo_convolve(h, mg.matrices, X)


def compose_filters(h1, h2, depth_cap):
    """Product of two filters, ``h1``'s words written left of ``h2``'s.

    No commutation is applied. Product words longer than ``depth_cap`` are
    dropped.

    Returns
    -------

    (filter, dropped_mass) : the product filter over the words it uses (and
    their suffixes), and the summed absolute value of dropped coefficients.

    """
    if h1.tree.m != h2.tree.m:
        raise ValueError(
            f"Filters use {h1.tree.m} and {h2.tree.m} edge classes"
        )
    if not isinstance(depth_cap, numbers.Integral) or depth_cap < 0:
        raise ValueError(
            f"depth_cap should be a non-negative integer, got {depth_cap}"
        )

    coeffs = {}
    dropped = 0.0
    for w1, c1 in h1.coeffs.items():
        for w2, c2 in h2.coeffs.items():
            word = w1 + w2
            if len(word) > depth_cap:
                dropped += abs(c1 * c2)
                continue
            coeffs[word] = coeffs.get(word, 0.0) + c1 * c2

    tree = DiffusionTree.from_words(h1.tree.m, depth_cap, coeffs.keys())
    return MultigraphFilter(tree, coeffs), dropped


def filter_matrix(h, mg):
    """Dense ``N x N`` matrix of a scalar filter."""
    _check_classes(h.tree, mg)
    diffused = diffuse(h.tree, mg.matrices, np.eye(mg.n_nodes))
    H = np.zeros((mg.n_nodes, mg.n_nodes))
    for k, word in enumerate(h.tree.words):
        c = h.coeffs.get(word)
        if c is not None:
            H = H + c * diffused[k]
    return H


def is_shift_invariant(h, q, mg, tol=1e-9):
    """Whether ``H`` commutes with the word operator of ``q`` within ``tol``
    in spectral norm."""
    H = filter_matrix(h, mg)
    Q = word_operator(q, mg)
    return bool(spectral_norm(Q @ H - H @ Q) <= tol)
