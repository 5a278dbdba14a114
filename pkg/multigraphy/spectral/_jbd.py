import logging
import warnings
from functools import reduce

import numpy as np
from scipy.linalg import block_diag
from scipy.linalg import null_space

from ..exceptions import ArgumentsError
from ..filters import apply_filter
from ..multigraph import as_signal

logger = logging.getLogger(__name__)


class JointBlockDecomposition:
    """Orthonormal basis exhibiting every shift operator as the same
    block-diagonal pattern.

    Attributes
    ----------

    basis : ndarray of shape (N, N)
        Orthonormal ``U``; block ``j`` spans columns
        ``offsets[j]:offsets[j] + partition[j]``.

    partition : tuple of int
        Block sizes ``p_j``, summing to N.

    blocks : list of list of ndarray
        ``blocks[i][j]`` is the ``p_j x p_j`` block of operator ``i``.

    reconstruction_errors : list of float
        ``||S_i - U blockdiag(...) U^T||_2`` per operator.

    """

    def __init__(self, basis, partition, blocks, reconstruction_errors):
        self.basis = basis
        self.partition = tuple(int(p) for p in partition)
        self.blocks = blocks
        self.reconstruction_errors = list(reconstruction_errors)
        self.offsets = tuple(np.concatenate([[0], np.cumsum(self.partition)]))

    @property
    def n_blocks(self):
        return len(self.partition)

    @property
    def max_block_size(self):
        return max(self.partition)

    def block_basis(self, j):
        return self.basis[:, self.offsets[j] : self.offsets[j + 1]]

    def reconstruct(self, i):
        return self.basis @ block_diag(*self.blocks[i]) @ self.basis.T

    def __repr__(self):
        return (
            f"JointBlockDecomposition(n_blocks={self.n_blocks},"
            f" partition={self.partition})"
        )


def _symmetric_operators(mg, symmetrize):
    matrices = []
    for i, S in enumerate(mg.matrices):
        scale = max(np.abs(S).max(), 1.0)
        if np.abs(S - S.T).max() <= 1e-10 * scale:
            matrices.append((S + S.T) / 2)
        elif symmetrize:
            warnings.warn(
                f"Operator {i} is not symmetric; using (S + S^T) / 2"
            )
            matrices.append((S + S.T) / 2)
        else:
            raise ArgumentsError(
                f"Operator {i} is not symmetric. Pass symmetrize=True to"
                " decompose (S + S^T) / 2 instead"
            )
    return matrices


def _symmetric_basis(n):
    # columns are vec(E_ab + E_ba) for a <= b, row-major vec
    rows, cols = np.triu_indices(n)
    basis = np.zeros((n * n, rows.shape[0]))
    for k, (a, b) in enumerate(zip(rows, cols)):
        basis[a * n + b, k] = 1.0
        basis[b * n + a, k] = 1.0
    return basis


def commutant_basis(matrices, rcond=1e-10):
    """Basis of the symmetric matrices commuting with every operator.

    Returns an array of shape (d, N, N); the identity always belongs to the
    span, so ``d >= 1``.
    """
    n = matrices[0].shape[0]
    eye = np.eye(n)
    sym = _symmetric_basis(n)
    # row-major vec(C S - S C) = (I kron S^T - S kron I) vec(C)
    system = np.vstack(
        [(np.kron(eye, S.T) - np.kron(S, eye)) @ sym for S in matrices]
    )
    coords = null_space(system, rcond=rcond)
    if coords.shape[1] == 0:
        return eye[None]
    return np.stack([(sym @ c).reshape(n, n) for c in coords.T])


def _cluster(eigenvalues, gap):
    groups = [[0]]
    for k in range(1, eigenvalues.shape[0]):
        if eigenvalues[k] - eigenvalues[k - 1] > gap:
            groups.append([])
        groups[-1].append(k)
    return groups


def joint_block_diagonalize(
    mg, tol=1e-6, symmetrize=False, seed=0, reconstruction_tol=1e-8
):
    """Joint block diagonalization by the commutant method.

    A random symmetric element ``C`` of the commutant of the operator family
    is eigendecomposed; its eigenspaces (eigenvalues closer than
    ``tol * spectral_radius(C)`` are merged) are common invariant subspaces
    of every operator.

    Parameters
    ----------

    mg : Multigraph
        Operators must be symmetric unless ``symmetrize`` is set.

    tol : float, default=1e-6
        Relative eigenvalue gap separating two blocks.

    symmetrize : bool, default=False
        Decompose ``(S + S^T) / 2`` for non-symmetric operators.

    seed : int, default=0
        Seed of the random commutant element.

    reconstruction_tol : float, default=1e-8
        Reconstruction error above which a warning is issued.

    Returns
    -------

    decomposition : JointBlockDecomposition
        Blocks ordered by decreasing size, then by increasing trace of the
        first operator's block.

    """
    if not tol > 0:
        raise ValueError(f"tol should be positive, got {tol}")
    matrices = _symmetric_operators(mg, symmetrize)
    n = mg.n_nodes

    commutant = commutant_basis(matrices)
    rng = np.random.default_rng(seed)
    if commutant.shape[0] <= 1:
        basis = np.eye(n)
        groups = [list(range(n))]
    else:
        weights = rng.standard_normal(commutant.shape[0])
        C = np.tensordot(weights, commutant, axes=1)
        C = (C + C.T) / 2
        eigenvalues, basis = np.linalg.eigh(C)
        radius = np.abs(eigenvalues).max()
        groups = _cluster(eigenvalues, tol * radius)

    bases = [basis[:, g] for g in groups]
    order = sorted(
        range(len(bases)),
        key=lambda j: (
            -bases[j].shape[1],
            np.trace(bases[j].T @ matrices[0] @ bases[j]),
        ),
    )
    bases = [bases[j] for j in order]
    U = np.hstack(bases)
    blocks = [[B.T @ S @ B for B in bases] for S in matrices]
    errors = [
        np.linalg.norm(S - U @ block_diag(*blocks[i]) @ U.T, 2)
        for i, S in enumerate(matrices)
    ]
    if max(errors) > reconstruction_tol:
        warnings.warn(
            f"Joint block diagonalization reconstructs the operators with"
            f" error {max(errors):.3g} > {reconstruction_tol}"
        )
    logger.debug(
        "joint block diagonalization: %d blocks, partition %s",
        len(bases),
        [B.shape[1] for B in bases],
    )
    return JointBlockDecomposition(
        U, [B.shape[1] for B in bases], blocks, errors
    )


def fourier_transform(jbd, x):
    """Components ``x_hat(j) = U_j^T x`` of a signal."""
    x = np.asarray(x, dtype=float)
    if x.shape != (jbd.basis.shape[0],):
        raise ValueError(
            f"Expected a signal of length {jbd.basis.shape[0]}, got shape"
            f" {x.shape}"
        )
    return [jbd.block_basis(j).T @ x for j in range(jbd.n_blocks)]


def inverse_fourier(jbd, components):
    """Signal ``x = sum_j U_j x_hat(j)``."""
    if len(components) != jbd.n_blocks:
        raise ValueError(
            f"Expected {jbd.n_blocks} components, got {len(components)}"
        )
    x = np.zeros(jbd.basis.shape[0])
    for j, comp in enumerate(components):
        comp = np.asarray(comp, dtype=float)
        if comp.shape != (jbd.partition[j],):
            raise ValueError(
                f"Component {j} should have length {jbd.partition[j]}, got"
                f" shape {comp.shape}"
            )
        x = x + jbd.block_basis(j) @ comp
    return x


def filter_spectral_response(h, jbd):
    """Per-block matrix polynomial ``H(Sigma_j^(1), ..., Sigma_j^(m))``."""
    if h.tree.m != len(jbd.blocks):
        raise ValueError(
            f"Filter is defined over {h.tree.m} edge classes, decomposition"
            f" has {len(jbd.blocks)} operators"
        )
    responses = []
    for j, p in enumerate(jbd.partition):
        response = np.zeros((p, p))
        for word, c in h.coeffs.items():
            product = reduce(
                np.matmul, (jbd.blocks[i][j] for i in word), np.eye(p)
            )
            response = response + c * product
        responses.append(response)
    return responses


def verify_filtering_spectral_theorem(h, jbd, mg, x, tol=1e-8):
    """Largest deviation ``max_j ||y_hat(j) - H_j x_hat(j)||_inf`` between
    filtering in node space and per-block multiplication in the Fourier
    domain. A deviation above ``tol`` is reported with a warning."""
    if not tol > 0:
        raise ValueError(f"tol should be positive, got {tol}")
    x = as_signal(mg, x)
    y = apply_filter(h, mg, x)
    x_hat = fourier_transform(jbd, x)
    y_hat = fourier_transform(jbd, y)
    responses = filter_spectral_response(h, jbd)
    deviation = max(
        float(np.abs(yj - Hj @ xj).max())
        for yj, Hj, xj in zip(y_hat, responses, x_hat)
    )
    if deviation > tol:
        warnings.warn(
            "Spectral filtering deviates from node-space filtering by"
            f" {deviation:.3g} > {tol}"
        )
    return deviation
