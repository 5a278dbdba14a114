import copy
import logging
import numbers

import numpy as np
import pandas as pd
from scipy.special import log_softmax
from scipy.special import softmax
from sklearn.metrics import accuracy_score

from ..exceptions import ArgumentsError
from ..exceptions import TrainingError
from ..utils import as_generator
from ..utils import first_non_finite
from ._forward import backward
from ._forward import forward
from ._optim import Adam

logger = logging.getLogger(__name__)

LOSSES = ("cross_entropy", "mse", "negative_sum_rate")
FIELDS = (
    "loss",
    "lr",
    "beta1",
    "beta2",
    "eps",
    "epochs",
    "iterations",
    "batch_size",
    "seed",
    "decay",
    "dual_lr",
)


class TrainConfig:
    """Optimization settings shared by ``train`` and ``train_primal_dual``.

    Parameters
    ----------

    loss : str, default="cross_entropy"
        "cross_entropy", "mse" or "negative_sum_rate"; the last one is
        supplied by the environment of ``train_primal_dual``.

    lr : float, default=1e-3

    beta1, beta2, eps : float
        Adam moments and denominator guard.

    epochs : int, default=10

    iterations : int, default=2000
        Primal-dual steps.

    batch_size : int, default=32

    seed : int, default=0

    decay : float, default=1.0
        Geometric step-size factor per step, in (0, 1].

    dual_lr : float, default=0.01

    """

    def __init__(
        self,
        loss="cross_entropy",
        lr=1e-3,
        beta1=0.9,
        beta2=0.999,
        eps=1e-8,
        epochs=10,
        iterations=2000,
        batch_size=32,
        seed=0,
        decay=1.0,
        dual_lr=0.01,
    ):
        self.loss = loss
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.epochs = epochs
        self.iterations = iterations
        self.batch_size = batch_size
        self.seed = seed
        self.decay = decay
        self.dual_lr = dual_lr
        self.__validate_input()

    def __validate_input(self):
        if self.loss not in LOSSES:
            raise ArgumentsError(
                f"Allowed values for loss are {LOSSES}, got {self.loss}"
            )
        if not isinstance(self.lr, numbers.Real) or self.lr < 0:
            raise ValueError(f"lr should be non-negative, got {self.lr}")
        if not 0 < self.decay <= 1:
            raise ValueError(f"decay should be in (0, 1], got {self.decay}")
        if self.dual_lr < 0:
            raise ValueError(
                f"dual_lr should be non-negative, got {self.dual_lr}"
            )
        for name in ("epochs", "iterations", "batch_size"):
            value = getattr(self, name)
            if not isinstance(value, numbers.Integral) or value < 1:
                raise ValueError(
                    f"{name} should be a positive integer, got {value}"
                )

    @classmethod
    def from_params(cls, params, prefix=""):
        """Pick the known keys (optionally prefixed) out of a params dict."""
        return cls(
            **{n: params[prefix + n] for n in FIELDS if prefix + n in params}
        )

    def to_dict(self):
        return {n: getattr(self, n) for n in FIELDS}


def cross_entropy(logits, y):
    """Mean cross-entropy and its gradient with respect to ``logits``."""
    y = np.asarray(y, dtype=np.int64)
    n = logits.shape[0]
    log_p = log_softmax(logits, axis=1)
    loss = -log_p[np.arange(n), y].mean()
    grad = softmax(logits, axis=1)
    grad[np.arange(n), y] -= 1.0
    return float(loss), grad / n


def mse(prediction, target):
    """Mean squared error over every entry and its gradient."""
    diff = prediction - np.asarray(target, dtype=float)
    return float(np.mean(diff**2)), 2.0 * diff / diff.size


def _loss_fn(name):
    if name == "cross_entropy":
        return cross_entropy
    if name == "mse":
        return mse
    raise ArgumentsError(
        f"Loss {name} needs an environment, use train_primal_dual"
    )


def _check_finite(loss, tape):
    if np.isfinite(loss):
        return
    name = first_non_finite(tape.tensors())
    raise TrainingError(
        f"Non-finite loss {loss}; first non-finite tensor:"
        f" {name or 'loss'}",
        name,
    )


def _batch_operators(matrices, idx):
    return matrices if matrices.ndim == 3 else matrices[idx]


def train(model, mg, dataset, cfg):
    """Minibatch Adam on a labelled (or regression) dataset.

    Parameters
    ----------

    model : MGNNModel
        Left untouched; a trained copy is returned.

    mg : Multigraph or ndarray of operators

    dataset : tuple (X, y)
        ``X`` of shape (n_samples, N, F) or (n_samples, N); ``y`` integer
        labels for cross-entropy or targets shaped like the model output
        for mse.

    cfg : TrainConfig

    Returns
    -------

    (model, losses) : trained copy and the mean training loss per epoch.

    """
    X, y = dataset
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        X = X[:, :, None]
    y = np.asarray(y)
    if X.shape[0] != y.shape[0]:
        raise ValueError(
            f"Got {X.shape[0]} signals and {y.shape[0]} targets"
        )
    loss_fn = _loss_fn(cfg.loss)
    matrices = mg.matrices if hasattr(mg, "matrices") else np.asarray(mg)

    model = copy.deepcopy(model)
    rng = as_generator(cfg.seed)
    optimizer = Adam(
        model.parameters(), cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, cfg.decay
    )
    losses = []
    n = X.shape[0]
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            out, tape = forward(
                model, _batch_operators(matrices, idx), X[idx]
            )
            loss, grad = loss_fn(out, y[idx])
            _check_finite(loss, tape)
            grads = backward(model, tape, grad)
            optimizer.step(grads.arrays(model))
            total += loss * idx.shape[0]
        losses.append(total / n)
        logger.info(
            "epoch %d/%d loss %.6f", epoch + 1, cfg.epochs, losses[-1]
        )
    model.metadata["train"] = cfg.to_dict()
    return model, losses


def train_primal_dual(model, env, cfg, lambda_init=0.0):
    """Constrained learning by alternating primal Adam steps on the
    Lagrangian and projected dual ascent.

    ``env`` provides ``sample_batch(rng, size)`` returning
    ``(operators, X, context)``, ``objective(output, context)`` and
    ``constraint(output, context)``; the last two return a value and its
    gradient with respect to the model output. The constraint holds when
    its value is non-positive.

    Returns
    -------

    (model, trace) : trained copy and a DataFrame with columns
    ``step, loss, lambda, slack``.

    """
    if lambda_init < 0:
        raise ValueError(
            f"lambda_init should be non-negative, got {lambda_init}"
        )
    model = copy.deepcopy(model)
    rng = as_generator(cfg.seed)
    optimizer = Adam(
        model.parameters(), cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, cfg.decay
    )
    lam = float(lambda_init)
    rows = []
    for step in range(cfg.iterations):
        operators, X, context = env.sample_batch(rng, cfg.batch_size)
        out, tape = forward(model, operators, X)
        objective, g_obj = env.objective(out, context)
        slack, g_slack = env.constraint(out, context)
        loss = objective + lam * slack
        _check_finite(loss, tape)
        grads = backward(model, tape, g_obj + lam * g_slack)
        optimizer.step(grads.arrays(model))
        dual_step = cfg.dual_lr * cfg.decay**step
        lam = max(0.0, lam + dual_step * slack)
        rows.append(
            {"step": step, "loss": objective, "lambda": lam, "slack": slack}
        )
        if (step + 1) % max(1, cfg.iterations // 10) == 0:
            logger.info(
                "iteration %d/%d objective %.5f lambda %.4f slack %.4f",
                step + 1,
                cfg.iterations,
                objective,
                lam,
                slack,
            )
    model.metadata["train"] = cfg.to_dict()
    model.metadata["lambda"] = lam
    trace = pd.DataFrame(rows, columns=["step", "loss", "lambda", "slack"])
    return model, trace


def predict(model, mg, X):
    """Class predictions of a "graph" readout model."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        X = X[:, :, None]
    out, _ = forward(model, mg, X)
    return np.argmax(out, axis=-1)


def evaluate(model, mg, X, y):
    """Classification accuracy in [0, 1]."""
    return float(accuracy_score(y, predict(model, mg, X)))


def write_trace(trace, file_path):
    """Loss trace CSV: ``step,loss`` (plus ``lambda,slack`` for primal-dual
    traces)."""
    if not isinstance(trace, pd.DataFrame):
        trace = pd.DataFrame({"step": range(len(trace)), "loss": trace})
    trace.to_csv(file_path, index=False, float_format="%.17g")
