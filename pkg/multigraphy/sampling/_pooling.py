import numpy as np

from ..exceptions import ArgumentsError
from ._selection import AGGREGATORS


def _pool(X, neighborhoods, aggregator):
    if aggregator not in AGGREGATORS:
        raise ArgumentsError(
            f"Allowed values for aggregator are {AGGREGATORS}, got"
            f" {aggregator}"
        )
    rows = []
    routes = []
    for nodes in neighborhoods:
        nodes = np.asarray(sorted(nodes), dtype=np.int64)
        if nodes.shape[0] == 0:
            raise ValueError("Pooling neighborhoods must not be empty")
        sub = X[..., nodes, :]
        k = nodes.shape[0]
        if aggregator == "mean":
            rows.append(sub.mean(axis=-2))
            routes.append((nodes, None))
            continue
        if aggregator == "max":
            picks = np.argmax(sub, axis=-2)[..., None, :]
        else:
            order = np.argsort(sub, axis=-2, kind="stable")
            mid = [k // 2] if k % 2 else [k // 2 - 1, k // 2]
            picks = order[..., mid, :]
        rows.append(np.take_along_axis(sub, picks, axis=-2).mean(axis=-2))
        routes.append((nodes, picks))
    return np.stack(rows, axis=-2), routes


def pool_signal(X, neighborhoods, aggregator="mean"):
    """Aggregate each node's neighborhood, feature by feature.

    Parameters
    ----------

    X : ndarray of shape (..., N_prev, F)

    neighborhoods : list of iterables of int
        Row ``i`` of the output aggregates ``X`` over ``neighborhoods[i]``.

    aggregator : str, default="mean"
        "mean", "median" or "max".

    Returns
    -------

    pooled : ndarray of shape (..., len(neighborhoods), F)

    """
    X = np.asarray(X, dtype=float)
    return _pool(X, neighborhoods, aggregator)[0]


def pool_forward(X, neighborhoods, aggregator):
    """``pool_signal`` plus the routing ``pool_backward`` needs."""
    return _pool(X, neighborhoods, aggregator)


def pool_backward(grad, routes, input_shape):
    """Gradient of the pooled signal with respect to its input."""
    grad_in = np.zeros(input_shape)
    for i, (nodes, picks) in enumerate(routes):
        g = grad[..., i : i + 1, :]
        if picks is None:
            # neighborhoods hold distinct nodes
            grad_in[..., nodes, :] += g / nodes.shape[0]
            continue
        share = np.zeros(grad_in[..., nodes, :].shape)
        for p in range(picks.shape[-2]):
            pick = picks[..., p : p + 1, :]
            current = np.take_along_axis(share, pick, axis=-2)
            np.put_along_axis(
                share, pick, current + g / picks.shape[-2], axis=-2
            )
        grad_in[..., nodes, :] += share
    return grad_in
