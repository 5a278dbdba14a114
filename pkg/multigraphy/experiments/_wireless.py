import logging
import numbers

import numpy as np
import pandas as pd

from ..diffusion import DiffusionTree
from ..exceptions import ArgumentsError
from ..mgnn import TrainConfig
from ..mgnn import build_model
from ..mgnn import count_parameters
from ..mgnn import forward
from ..mgnn import train_primal_dual
from ..multigraph import spectral_norm
from ..pipelines import Pipeline
from ..pipelines import read_config
from ..utils import as_generator
from ._common import as_list
from ._common import emit_results
from ._common import plot_frame
from ._common import with_defaults

logger = logging.getLogger(__name__)

HEURISTICS = ("equal", "random_half")
MIN_DISTANCE = 1.0

# power in mW, noise power in mW, distances in m, frequencies in GHz
DEFAULTS = {
    "n_transmitters": 10,
    "n_receivers": 4,
    "bands": [2.4, 5.0],
    "area": 40.0,
    "spread": 10.0,
    "top_k": 20,
    "noise": 1e-3,
    "p_max": 10.0,
    "fading_samples": 100,
    "p_max_sweep": [10.0, 50.0, 100.0],
    "noise_sweep": [5e-4, 1e-3, 2e-3],
    "models": ["mgnn", "merged", "parallel"],
    "widths": [2, 2],
    "depth": 3,
    "iterations": 2000,
    "batch_size": 8,
    "lr": 0.01,
    "decay": 0.999,
    "dual_lr": 0.05,
    "calibration_configurations": 32,
    "eval_configurations": 100,
    "seed": 0,
    "output": None,
}


def fspl(distance, freq_ghz):
    """Free space path loss in dB for a distance in meters and a carrier
    frequency in GHz."""
    distance = np.asarray(distance, dtype=float)
    freq_ghz = np.asarray(freq_ghz, dtype=float)
    if np.any(distance <= 0) or np.any(freq_ghz <= 0):
        raise ValueError("Distance and frequency must be positive")
    psi = 20 * np.log10(distance) + 20 * np.log10(freq_ghz) + 32.45
    return float(psi) if psi.ndim == 0 else psi


def channel_gain(psi_db):
    """Linear gain of a path loss given in dB."""
    gain = 10.0 ** (-np.asarray(psi_db, dtype=float) / 10.0)
    return float(gain) if gain.ndim == 0 else gain


def sparsify_rows(B, top_k):
    """Keep ``top_k`` entries of every row: the diagonal and the
    ``top_k - 1`` largest off-diagonal entries."""
    B = np.asarray(B, dtype=float)
    n = B.shape[-1]
    if n <= top_k:
        return B
    eye = np.eye(n, dtype=bool)
    keep = np.broadcast_to(eye, B.shape).copy()
    if top_k > 1:
        off = np.where(eye, -np.inf, B)
        top = np.argsort(-off, axis=-1, kind="stable")[..., : top_k - 1]
        np.put_along_axis(keep, top, True, axis=-1)
    return np.where(keep, B, 0.0)


class Layout:
    """Transmitter and receiver positions with the assignment ``r(i)``."""

    def __init__(self, transmitters, receivers, assignment):
        self.transmitters = transmitters
        self.receivers = receivers
        self.assignment = assignment


class WirelessEnv:
    """Multi-band interference network.

    Receivers are uniform in ``[-area, area]^2``; every transmitter sits
    within ``+-spread`` of the receiver it serves. ``B[v][j, i]`` is the
    gain from transmitter ``j`` to the receiver of transmitter ``i``.
    """

    def __init__(
        self,
        n_transmitters=10,
        n_receivers=4,
        bands=(2.4, 5.0),
        noise=1e-3,
        p_max=10.0,
        area=40.0,
        spread=10.0,
        top_k=20,
        fading_samples=100,
    ):
        self.n_transmitters = n_transmitters
        self.n_receivers = n_receivers
        self.bands = tuple(float(b) for b in as_list(bands))
        self.noise = noise
        self.p_max = p_max
        self.area = area
        self.spread = spread
        self.top_k = top_k
        self.fading_samples = fading_samples
        self.__validate_input()

    def __validate_input(self):
        for name in (
            "n_transmitters",
            "n_receivers",
            "top_k",
            "fading_samples",
        ):
            value = getattr(self, name)
            if not isinstance(value, numbers.Integral) or value < 1:
                raise ValueError(
                    f"{name} should be a positive integer, got {value}"
                )
        if len(self.bands) == 0 or any(b <= 0 for b in self.bands):
            raise ValueError(f"bands should be positive, got {self.bands}")
        if not self.noise > 0:
            raise ValueError(f"noise should be positive, got {self.noise}")
        if self.p_max < 0:
            raise ValueError(f"p_max should be non-negative, got {self.p_max}")
        if self.area <= 0 or self.spread < 0:
            raise ValueError(
                f"area should be positive and spread non-negative, got"
                f" {self.area} and {self.spread}"
            )

    @classmethod
    def from_params(cls, params):
        return cls(
            params["n_transmitters"],
            params["n_receivers"],
            params["bands"],
            params["noise"],
            params["p_max"],
            params["area"],
            params["spread"],
            params["top_k"],
            params["fading_samples"],
        )

    @property
    def n_bands(self):
        return len(self.bands)

    @property
    def p_ref(self):
        """Normalizer of the power constraint; 1 when the budget is zero."""
        return self.p_max if self.p_max > 0 else 1.0

    def sample_layout(self, rng):
        rng = as_generator(rng)
        receivers = rng.uniform(-self.area, self.area, (self.n_receivers, 2))
        assignment = rng.integers(self.n_receivers, size=self.n_transmitters)
        offsets = rng.uniform(
            -self.spread, self.spread, (self.n_transmitters, 2)
        )
        return Layout(receivers[assignment] + offsets, receivers, assignment)

    def path_loss(self, layout):
        """Path-loss gains of shape (n_bands, T, T)."""
        targets = layout.receivers[layout.assignment]
        diff = layout.transmitters[:, None, :] - targets[None, :, :]
        distance = np.maximum(np.linalg.norm(diff, axis=-1), MIN_DISTANCE)
        return np.stack(
            [channel_gain(fspl(distance, band)) for band in self.bands]
        )

    def __repr__(self):
        return (
            f"WirelessEnv(T={self.n_transmitters}, R={self.n_receivers},"
            f" bands={self.bands}, p_max={self.p_max}, noise={self.noise})"
        )


def sample_channels(env, seed=None, layout=None, gains=None, n_draws=None):
    """Channel realization ``B = b_pl * b_ff`` per band.

    Parameters
    ----------

    env : WirelessEnv

    seed : int or numpy Generator, optional

    layout : Layout, optional
        Drawn from ``seed`` when neither ``layout`` nor ``gains`` is given.

    gains : ndarray of shape (n_bands, T, T), optional
        Path-loss gains to use instead of a layout.

    n_draws : int, optional
        Number of fast fading draws; a single realization when None.

    Returns
    -------

    B : ndarray of shape (n_bands, T, T) or (n_draws, n_bands, T, T)
        Rows keep their diagonal and ``env.top_k - 1`` largest other
        entries.

    """
    rng = as_generator(seed)
    if gains is None:
        if layout is None:
            layout = env.sample_layout(rng)
        gains = env.path_loss(layout)
    gains = np.asarray(gains, dtype=float)
    fading = rng.rayleigh(1.0, size=(n_draws or 1,) + gains.shape)
    B = sparsify_rows(gains * fading, env.top_k)
    return B[0] if n_draws is None else B


def _link_terms(q, B, noise):
    # received[i] = noise + sum_j B[j, i] q_j
    total = (q[..., None, :] @ B)[..., 0, :] + noise
    own = np.diagonal(B, axis1=-2, axis2=-1) * q
    return total, total - own, own


def sum_rate(q, B, noise):
    """Sum over bands and links of ``log(1 + SINR)`` (natural log),
    averaged over fading realizations.

    Parameters
    ----------

    q : array_like of shape (n_bands, T)

    B : array_like of shape (n_bands, T, T) or (n_draws, n_bands, T, T)

    noise : float

    """
    q = np.asarray(q, dtype=float)
    B = np.asarray(B, dtype=float)
    if np.any(q < 0):
        raise ValueError("Powers must be non-negative")
    if not noise > 0:
        raise ValueError(f"noise should be positive, got {noise}")
    if B.ndim == 3:
        B = B[None]
    _, interference, own = _link_terms(q, B, noise)
    rates = np.log1p(own / interference).sum(axis=(-2, -1))
    return float(rates.mean())


def sum_rate_gradient(q, B, noise):
    """Expected sum-rate per configuration and its gradient.

    ``q`` has shape (C, n_bands, T) and ``B`` shape (C, D, n_bands, T, T).
    """
    total, interference, own = _link_terms(q[:, None], B, noise)
    rates = np.log1p(own / interference).sum(axis=(-2, -1)).mean(axis=1)
    cross = B * (1.0 - np.eye(B.shape[-1]))
    grad = (B @ (1.0 / total)[..., None])[..., 0] - (
        cross @ (1.0 / interference)[..., None]
    )[..., 0]
    return rates, grad.mean(axis=1)


def heuristic_policy(kind, env, seed=None):
    """Allocation of shape (n_bands, T) spending exactly ``p_max``.

    "equal" gives ``p_max / (n_bands T)`` to every transmitter on every
    band; "random_half" picks ``max(1, T // 2)`` transmitters per band and
    splits the band's share among them.
    """
    T, n_bands = env.n_transmitters, env.n_bands
    if kind == "equal":
        return np.full((n_bands, T), env.p_max / (n_bands * T))
    if kind == "random_half":
        rng = as_generator(seed)
        k = max(1, T // 2)
        q = np.zeros((n_bands, T))
        for band in range(n_bands):
            chosen = rng.choice(T, size=k, replace=False)
            q[band, chosen] = env.p_max / (n_bands * k)
        return q
    raise ArgumentsError(
        f"Allowed values for kind are {HEURISTICS}, got {kind}"
    )


def policy_input(env, gains):
    """Band operators ``S_v = B_v^T`` normalized per configuration and the
    all-ones signal."""
    S = np.swapaxes(sparsify_rows(gains, env.top_k), -1, -2)
    norms = spectral_norm(S)
    S = S / np.where(norms > 0, norms, 1.0)[..., None, None]
    X = np.ones(S.shape[:-3] + (env.n_transmitters, 1))
    return S, X


class PowerAllocation:
    """Constrained learning problem fed to ``train_primal_dual``.

    The model output (C, T, n_bands) scaled by ``p_max / T`` is the
    allocation. The objective is the negative expected sum-rate divided by
    the equal-power reference rate; the constraint is the mean total power
    above budget, divided by ``p_ref``. A zero budget forces zero power.
    """

    def __init__(self, env, reference_rate=1.0):
        self.env = env
        self.reference_rate = reference_rate

    @property
    def scale(self):
        return self.env.p_max / self.env.n_transmitters

    def configurations(self, rng, size):
        env = self.env
        gains = np.stack(
            [env.path_loss(env.sample_layout(rng)) for _ in range(size)]
        )
        fading = rng.rayleigh(
            1.0, size=(size, env.fading_samples) + gains.shape[1:]
        )
        return gains, sparsify_rows(gains[:, None] * fading, env.top_k)

    def calibrate(self, rng, size):
        _, B = self.configurations(rng, size)
        q = heuristic_policy("equal", self.env)
        rate = np.mean([sum_rate(q, b, self.env.noise) for b in B])
        self.reference_rate = float(rate) if rate > 0 else 1.0
        return self.reference_rate

    def sample_batch(self, rng, size):
        gains, B = self.configurations(rng, size)
        S, X = policy_input(self.env, gains)
        return S, X, B

    def powers(self, output):
        return np.swapaxes(output, -1, -2) * self.scale

    def objective(self, output, B):
        q = self.powers(output)
        rates, grad = sum_rate_gradient(q, B, self.env.noise)
        n = output.shape[0]
        value = -float(rates.mean()) / self.reference_rate
        grad_out = -np.swapaxes(grad, -1, -2) * self.scale
        return value, grad_out / (n * self.reference_rate)

    def constraint(self, output, B):
        n = output.shape[0]
        power = self.powers(output).sum(axis=(-2, -1)).mean()
        slack = (float(power) - self.env.p_max) / self.env.p_ref
        grad = np.full(output.shape, self.scale / (n * self.env.p_ref))
        return slack, grad


def build_policy(variant, env, widths, depth, seed=0):
    """Sigmoid hidden layers and a relu last layer over the full word set
    of depth ``depth``; the parallel policy combines its per-band towers
    with a relu node readout."""
    tree = DiffusionTree.full(env.n_bands, depth)
    widths = [int(g) for g in as_list(widths)]
    common = dict(
        f_in=1, nonlinearity="sigmoid", last_nonlinearity="relu", seed=seed
    )
    if variant == "parallel":
        return build_model(
            tree,
            widths,
            variant="parallel",
            n_outputs=env.n_bands,
            readout_mode="node",
            output_activation="relu",
            **common,
        )
    if widths[-1] != env.n_bands:
        raise ArgumentsError(
            f"The last layer of a {variant} policy needs one feature per"
            f" band ({env.n_bands}), got {widths[-1]}"
        )
    return build_model(tree, widths, variant=variant, **common)


def _sweep_points(params):
    points = [("p_max", float(v)) for v in as_list(params["p_max_sweep"])]
    points += [("noise", float(v)) for v in as_list(params["noise_sweep"])]
    if not points:
        points = [("p_max", float(params["p_max"]))]
    return points


def prepare_wireless(params):
    """Validate the environment and list the sweep points."""
    base = WirelessEnv.from_params(params)
    for model in as_list(params["models"]):
        if model not in ("mgnn", "merged", "parallel"):
            raise ArgumentsError(
                f"Allowed values for models are mgnn, merged and parallel,"
                f" got {model}"
            )
    params["env"] = base
    params["sweep_points"] = _sweep_points(params)


def _point_env(params, sweep, value):
    point = dict(params)
    point[sweep] = value
    return WirelessEnv.from_params(point)


def train_wireless(params):
    seed = int(params["seed"])
    cfg = TrainConfig(
        loss="negative_sum_rate",
        lr=params["lr"],
        iterations=int(params["iterations"]),
        batch_size=int(params["batch_size"]),
        decay=params["decay"],
        dual_lr=params["dual_lr"],
        seed=seed,
    )
    policies = {}
    for sweep, value in params["sweep_points"]:
        env = _point_env(params, sweep, value)
        task = PowerAllocation(env)
        task.calibrate(
            np.random.default_rng(seed + 1),
            int(params["calibration_configurations"]),
        )
        for variant in as_list(params["models"]):
            model = build_policy(
                variant, env, params["widths"], int(params["depth"]), seed
            )
            trained, trace = train_primal_dual(model, task, cfg)
            policies[(sweep, value, variant)] = (trained, trace)
            logger.info(
                "%s=%g %s: final lambda %.4f slack %.4f",
                sweep,
                value,
                variant,
                trace["lambda"].iloc[-1],
                trace["slack"].iloc[-1],
            )
    params["policies"] = policies


def evaluate_wireless(params):
    seed = int(params["seed"])
    rows = []
    for sweep, value in params["sweep_points"]:
        env = _point_env(params, sweep, value)
        task = PowerAllocation(env)
        rng = np.random.default_rng(seed + 2)
        size = int(params["eval_configurations"])
        gains, B = task.configurations(rng, size)
        allocations = {}
        for variant in as_list(params["models"]):
            model, _ = params["policies"][(sweep, value, variant)]
            S, X = policy_input(env, gains)
            out, _ = forward(model, S, X)
            allocations[variant] = (task.powers(out), count_parameters(model))
        heuristic_rng = np.random.default_rng(seed + 3)
        for kind in HEURISTICS:
            q = np.stack(
                [heuristic_policy(kind, env, heuristic_rng) for _ in B]
            )
            allocations[kind] = (q, 0)
        for name, (q, n_params) in allocations.items():
            rates = [sum_rate(qc, b, env.noise) for qc, b in zip(q, B)]
            rows.append(
                {
                    "sweep": sweep,
                    "value": value,
                    "model": name,
                    "seed": seed,
                    "sum_rate": float(np.mean(rates)),
                    "power": float(q.sum(axis=(-2, -1)).mean()),
                    "n_params": n_params,
                }
            )
    params["rows"] = rows


def emit_wireless(params):
    metrics = pd.DataFrame(params["rows"])
    plot = plot_frame(
        [
            {
                "sweep": r["sweep"],
                "x": r["value"],
                "y": r["sum_rate"],
                "series": r["model"],
            }
            for r in params["rows"]
        ]
    )
    summary = {
        f"{r['sweep']}={r['value']:g}/{r['model']}": {
            "sum_rate": r["sum_rate"],
            "power": r["power"],
        }
        for r in params["rows"]
    }
    emit_results(params, metrics, summary, plot)


def run_wireless_experiment(params=None, config_file=None):
    """Train the learned policies with primal-dual learning and compare
    them with the heuristics over budget and noise sweeps.

    Returns
    -------

    report : dict with ``metrics`` (DataFrame), ``summary`` (dict) and
    ``plot`` (DataFrame).

    """
    if config_file is not None and not params:
        params = read_config(config_file)
    pipeline = Pipeline(
        steps=[
            prepare_wireless,
            train_wireless,
            evaluate_wireless,
            emit_wireless,
        ],
        params=with_defaults(DEFAULTS, params),
    )
    result = pipeline.process()
    return {k: result[k] for k in ("metrics", "summary", "plot")}
