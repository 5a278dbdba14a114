import numpy as np

from ..multigraph import Multigraph
from ..multigraph import permute
from ._forward import run_towers


def check_permutation_equivariance(model, mg, X, p):
    """Largest deviation between relabeling before and after the
    convolutional stack.

    The readout and node selection are left out: neither commutes with a
    relabeling of the nodes.

    Parameters
    ----------

    model : MGNNModel

    mg : Multigraph

    X : ndarray of shape (N, F) or (N,)

    p : Permutation

    Returns
    -------

    deviation : float
        ``max |stack(P^T S P, P^T X) - P^T stack(S, X)|``.

    """
    if not isinstance(mg, Multigraph):
        raise TypeError(
            f"'mg' should be a Multigraph. Received {mg} of type {type(mg)}"
        )
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    out = run_towers(model, mg, X, sampling=False)
    mg_p, X_p = permute(mg, X, p)
    out_p = run_towers(model, mg_p, X_p, sampling=False)
    return float(np.abs(out_p - out[p.perm]).max())
