import numpy as np


def spectral_norm(matrix, tol=1e-12, max_iter=10000):
    """Largest singular value by power iteration on ``M^T M``.

    Parameters
    ----------

    matrix : array_like of shape (..., N, N) or (..., N, P)
        A single matrix or a stack of matrices. Stacks are iterated jointly
        until every member has converged.

    tol : float, default=1e-12
        Relative residual ``||G x - lambda x|| <= tol * lambda`` at which the
        iteration stops, ``G = M^T M``.

    max_iter : int, default=10000

    Returns
    -------

    norm : float for a single matrix, ndarray of shape (...) for a stack.

    """
    M = np.asarray(matrix, dtype=float)
    if M.ndim < 2:
        raise ValueError(
            f"spectral_norm expects a matrix or a stack of matrices. Received"
            f" an array of shape {M.shape}"
        )
    if M.size == 0:
        out = np.zeros(M.shape[:-2])
        return float(out) if M.ndim == 2 else out

    gram = np.swapaxes(M, -1, -2) @ M
    # fixed starts such as all ones can be orthogonal to the top eigenvector
    x = np.random.default_rng(0).standard_normal(gram.shape[:-1])
    x /= np.linalg.norm(x, axis=-1, keepdims=True)
    y = (gram @ x[..., None])[..., 0]

    lam = np.sum(x * y, axis=-1)
    for _ in range(max_iter):
        y_norm = np.linalg.norm(y, axis=-1, keepdims=True)
        x = y / np.where(y_norm > 0, y_norm, 1.0)
        y = (gram @ x[..., None])[..., 0]
        lam = np.sum(x * y, axis=-1)
        residual = np.linalg.norm(y - lam[..., None] * x, axis=-1)
        if np.all(residual <= tol * np.abs(lam)):
            break

    sigma = np.sqrt(np.maximum(lam, 0.0))
    return float(sigma) if M.ndim == 2 else sigma
