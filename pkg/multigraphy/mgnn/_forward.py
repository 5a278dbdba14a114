import numpy as np
from scipy.special import expit

from ..exceptions import ArgumentsError
from ..filters import diffuse
from ..filters import diffuse_adjoint
from ..sampling import pool_backward
from ..sampling import pool_forward
from ..sampling import stack_neighborhoods


def activate(name, Z):
    if name == "relu":
        return np.maximum(Z, 0.0)
    if name == "sigmoid":
        return expit(Z)
    if name == "tanh":
        return np.tanh(Z)
    return Z


def activation_grad(name, Z, out, grad):
    """Pointwise chain rule; relu'(0) is 0."""
    if name == "relu":
        return grad * (Z > 0)
    if name == "sigmoid":
        return grad * out * (1.0 - out)
    if name == "tanh":
        return grad * (1.0 - out**2)
    return grad


def operator_stack(mg):
    """``(m, N, N)`` or per-sample ``(B, m, N, N)`` operators of ``mg``,
    which may be a Multigraph or a raw array."""
    matrices = mg.matrices if hasattr(mg, "matrices") else np.asarray(mg)
    if matrices.ndim not in (3, 4) or matrices.shape[-1] != matrices.shape[-2]:
        raise ValueError(
            "Operators should have shape (m, N, N) or (B, m, N, N), got"
            f" {matrices.shape}"
        )
    return matrices


class Tape:
    """Intermediates of one forward pass, consumed by ``backward``."""

    def __init__(self, squeeze, input_shape):
        self.squeeze = squeeze
        self.input_shape = input_shape
        self.towers = []
        self.readout = []
        self.features = None
        self.output = None

    def tensors(self):
        """``(name, array)`` for every recorded tensor, in forward order."""
        for t, tower in enumerate(self.towers):
            for k, rec in enumerate(tower):
                yield f"tower {t} layer {k} convolution", rec["Z"]
                yield f"tower {t} layer {k} activation", rec["out"]
        for k, rec in enumerate(self.readout):
            yield f"readout layer {k}", rec["out"]


class GradientSet:
    """Partials mirroring a model's trainables.

    ``towers[t][k]`` maps each word of layer ``k`` of tower ``t`` to its
    ``F x G`` partial; ``readout`` holds ``(dW, db)`` pairs.
    """

    def __init__(self, towers, readout):
        self.towers = towers
        self.readout = readout

    @classmethod
    def zeros_like(cls, model):
        towers = [
            [
                {
                    w: np.zeros_like(F)
                    for w, F in layer.filter.coeffs.items()
                }
                for layer in tower
            ]
            for tower in model.towers
        ]
        readout = []
        if model.readout is not None:
            readout = [
                (np.zeros_like(W), np.zeros_like(b))
                for W, b in model.readout.layers
            ]
        return cls(towers, readout)

    def arrays(self, model):
        """Partials in ``model.parameters()`` order."""
        grads = []
        for tower_model, tower in zip(model.towers, self.towers):
            for layer, partials in zip(tower_model, tower):
                grads.extend(
                    partials[w]
                    for w in layer.tree.words
                    if w in layer.filter.coeffs
                )
        for dW, db in self.readout:
            grads.extend([dW, db])
        return grads

    def max_abs(self):
        values = [0.0]
        for tower in self.towers:
            for partials in tower:
                values.extend(
                    float(np.abs(g).max()) for g in partials.values()
                )
        for dW, db in self.readout:
            values.extend([float(np.abs(dW).max()), float(np.abs(db).max())])
        return max(values)


def _prepare(model, mg, X):
    matrices = operator_stack(mg)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    squeeze = X.ndim == 2
    if squeeze:
        X = X[None]
    if X.ndim != 3:
        raise ValueError(
            f"Signals should have shape (N, F) or (B, N, F), got {X.shape}"
        )
    if matrices.shape[-3] != model.n_classes:
        raise ValueError(
            f"Model uses {model.n_classes} edge classes, operators have"
            f" {matrices.shape[-3]}"
        )
    if X.shape[1] != matrices.shape[-1]:
        raise ValueError(
            f"Signal has {X.shape[1]} nodes, operators have"
            f" {matrices.shape[-1]}"
        )
    if X.shape[2] != model.f_in:
        raise ValueError(
            f"Model expects {model.f_in} input features, signal has"
            f" {X.shape[2]}"
        )
    if matrices.ndim == 4 and matrices.shape[0] != X.shape[0]:
        raise ValueError(
            f"Got {matrices.shape[0]} operator stacks for {X.shape[0]}"
            " signals"
        )
    return matrices, X, squeeze


def _relabel(plan, matrices, X):
    idx = plan.node_order
    matrices = matrices[..., idx, :][..., :, idx]
    return matrices, X[:, idx, :]


def _run_tower(tower, matrices, X, sampling):
    records = []
    for layer in tower:
        n_prev = X.shape[1]
        n_keep = layer.selected_nodes if sampling else None
        n_keep = n_prev if n_keep is None else n_keep
        if n_keep > n_prev:
            raise ValueError(
                f"Layer keeps {n_keep} nodes out of {n_prev}"
            )
        rec = {"input_shape": X.shape, "routes": None}
        if sampling and layer.pooling is not None:
            if matrices.ndim == 4:
                raise ArgumentsError(
                    "Pooling needs operators shared by the whole batch"
                )
            hoods = stack_neighborhoods(
                matrices, n_keep, n_prev, layer.pooling.alpha
            )
            Xs, rec["routes"] = pool_forward(
                X, hoods, layer.pooling.aggregator
            )
        else:
            Xs = X[:, :n_keep, :]
        ops = matrices[..., :n_keep, :n_keep]
        diffused = diffuse(layer.tree, ops, Xs)
        Z = np.zeros(Xs.shape[:-1] + (layer.f_out,))
        for k, word in enumerate(layer.tree.words):
            F = layer.filter.coeffs.get(word)
            if F is not None:
                Z = Z + diffused[k] @ F
        out = activate(layer.nonlinearity, Z)
        rec.update(ops=ops, diffused=diffused, Z=Z, out=out, n_keep=n_keep)
        records.append(rec)
        X = out
    return X, records


def run_towers(model, mg, X, sampling=True):
    """Convolutional stack only; returns the concatenated final features
    of shape (B, N_L, G) (or (N_L, G) for a single signal)."""
    matrices, X, squeeze = _prepare(model, mg, X)
    if sampling and model.plan is not None:
        matrices, X = _relabel(model.plan, matrices, X)
    outs = [_run_tower(t, matrices, X, sampling)[0] for t in model.towers]
    H = np.concatenate(outs, axis=-1)
    return H[0] if squeeze else H


def forward(model, mg, X):
    """Run ``model`` on ``X``.

    Parameters
    ----------

    model : MGNNModel

    mg : Multigraph or ndarray of shape (m, N, N) or (B, m, N, N)

    X : ndarray of shape (N, F) or (B, N, F)
        With a selection plan, nodes are relabeled by ``plan.node_order``
        before the first layer.

    Returns
    -------

    (output, tape) : output has shape (B, outputs) for a "graph" readout,
    (B, N_L, outputs) for a "node" readout and (B, N_L, G) without readout;
    the batch axis is dropped for a single (N, F) signal.

    """
    matrices, X, squeeze = _prepare(model, mg, X)
    tape = Tape(squeeze, X.shape)
    if model.plan is not None:
        matrices, X = _relabel(model.plan, matrices, X)

    outs = []
    for tower in model.towers:
        out, records = _run_tower(tower, matrices, X, True)
        outs.append(out)
        tape.towers.append(records)
    H = np.concatenate(outs, axis=-1)
    tape.features = H

    a = H
    readout = model.readout
    if readout is not None:
        if readout.mode == "graph":
            a = H.reshape(H.shape[0], -1)
        if a.shape[-1] != readout.n_inputs:
            raise ValueError(
                f"Readout expects {readout.n_inputs} inputs, stack gives"
                f" {a.shape[-1]}"
            )
        for k, (W, b) in enumerate(readout.layers):
            last = k == len(readout.layers) - 1
            z = a @ W + b
            name = readout.output_activation if last else "relu"
            out = activate(name, z)
            tape.readout.append({"input": a, "z": z, "out": out, "act": name})
            a = out
    tape.output = a
    return (a[0] if squeeze else a), tape


def _flat(a):
    return a.reshape(-1, a.shape[-1])


def backward(model, tape, upstream):
    """Reverse-mode partials of a scalar whose gradient with respect to the
    forward output is ``upstream``.

    Returns
    -------

    gradients : GradientSet

    """
    if len(tape.towers) != len(model.towers) or any(
        len(r) != len(t) for r, t in zip(tape.towers, model.towers)
    ):
        raise ValueError("Tape was not recorded from this model")
    upstream = np.asarray(upstream, dtype=float)
    if tape.squeeze:
        upstream = upstream[None]
    if upstream.shape != tape.output.shape:
        raise ValueError(
            f"Upstream gradient has shape {upstream.shape}, output has"
            f" {tape.output.shape}"
        )

    grads = GradientSet.zeros_like(model)
    g = upstream
    if model.readout is not None:
        if len(tape.readout) != len(model.readout.layers):
            raise ValueError("Tape was not recorded from this model")
        for k in range(len(model.readout.layers) - 1, -1, -1):
            W, _ = model.readout.layers[k]
            rec = tape.readout[k]
            g = activation_grad(rec["act"], rec["z"], rec["out"], g)
            grads.readout[k] = (
                _flat(rec["input"]).T @ _flat(g),
                _flat(g).sum(axis=0),
            )
            g = g @ W.T
        g = g.reshape(tape.features.shape)

    offset = 0
    for t, (tower, records) in enumerate(zip(model.towers, tape.towers)):
        width = tower[-1].f_out
        G = g[..., offset : offset + width]
        offset += width
        for k in range(len(tower) - 1, -1, -1):
            layer, rec = tower[k], records[k]
            dZ = activation_grad(layer.nonlinearity, rec["Z"], rec["out"], G)
            upstream_words = []
            for j, word in enumerate(layer.tree.words):
                F = layer.filter.coeffs.get(word)
                if F is None:
                    upstream_words.append(None)
                    continue
                grads.towers[t][k][word] = (
                    _flat(rec["diffused"][j]).T @ _flat(dZ)
                )
                upstream_words.append(dZ @ F.T)
            if k == 0:
                break
            dXs = diffuse_adjoint(layer.tree, rec["ops"], upstream_words)
            if dXs is None:
                dXs = np.zeros(rec["diffused"][0].shape)
            if rec["routes"] is not None:
                G = pool_backward(dXs, rec["routes"], rec["input_shape"])
            else:
                G = np.zeros(rec["input_shape"])
                G[:, : rec["n_keep"], :] = dXs
    return grads
