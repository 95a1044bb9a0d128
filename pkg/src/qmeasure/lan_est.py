"""Two-stage adaptive estimation of a qubit state from ``n`` copies.

Stage one spends ``n^{1-kappa}`` copies on Pauli coin tosses to localize
the state. Stage two works in the local frame ``rho_{u/sqrt(n)}`` around the
stage-one guess and samples the limiting outcome laws: heterodyne for the
rotation parameters ``(ux, uy)`` and a smoothed block measurement (or its
Gaussian limit) for the eigenvalue parameter ``uz``. Risks are reported in
units of ``1/n``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import gammaln

from . import kernels
from .qmat import bloch_to_density, density_to_bloch

MODES = ("gaussian", "exact")
LOSSES = ("trace", "fidelity")
CHUNK = 16384
WINDOW_SIGMAS = 12.0


@dataclass(frozen=True)
class EstimationConfig:
    """Parameters of a Monte Carlo risk experiment.

    ``mode`` is ``"gaussian"`` (limit laws) or ``"exact"`` (finite-n block
    law followed by smoothing).
    """

    n: int = 100_000
    mu0: float = 0.9
    u_true: tuple = (0.0, 0.0, 0.0)
    kappa: float = 0.1
    eta: float = 0.2
    mode: str = "gaussian"
    trials: int = 100_000
    seed: int = 0
    loss: str = "trace"

    def __post_init__(self):
        if not 0 < self.kappa < 1:
            raise ValueError("kappa must lie in (0, 1)")
        if not 0 < self.eta < 0.25:
            raise ValueError("eta must lie in (0, 1/4)")
        if not 0.5 < self.mu0 < 1:
            raise ValueError("mu0 must lie in (1/2, 1)")
        if self.mu0 - 0.5 < 1e-3:
            raise ValueError("mu0 too close to 1/2")
        if self.trials < 1 or self.n < 1:
            raise ValueError("n and trials must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}")
        if len(self.u_true) != 3 or not all(math.isfinite(x) for x in self.u_true):
            raise ValueError("u_true must be three finite reals")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        mu_u = self.mu0 + self.u_true[2] / math.sqrt(self.n)
        if not 0.5 < mu_u < 1:
            raise ValueError("u_true[2] moves the eigenvalue outside (1/2, 1)")


@dataclass(frozen=True)
class LocalParams:
    u: tuple

    def __post_init__(self):
        if not all(math.isfinite(x) for x in self.u):
            raise ValueError("local parameters must be finite")


@dataclass(frozen=True)
class LocalFrame:
    """Reference state ``diag(mu, 1 - mu)`` after applying ``rotation`` to Bloch vectors."""

    mu: float
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))


@dataclass(frozen=True)
class RiskReport:
    """Aggregated ``n * loss`` over trials.

    ``exact_mean_n_risk`` is ``n * ||rho - rho_hat||_1^2`` from the
    reconstructed states (trace loss only); it measures how far the
    quadratic local loss is from the exact one at this ``n``.
    """

    trials: int
    mean_n_risk: float
    std_error: float
    theory: float
    loss_kind: str
    mode: str
    n: int
    mu0: float
    seed: int
    exact_mean_n_risk: float | None = None
    exact_std_error: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


# ------------------------------------------------------------- stage one

def minimal_rotation(r) -> np.ndarray:
    """Rotation matrix taking the direction of ``r`` to ``+z`` about ``r x z``."""
    r = np.asarray(r, dtype=float)
    norm = np.linalg.norm(r)
    if norm == 0.0:
        return np.eye(3)
    a = r / norm
    c = a[2]
    axis = np.array([a[1], -a[0], 0.0])
    s = np.linalg.norm(axis)
    if s < 1e-15:
        return np.eye(3) if c > 0 else np.diag([1.0, -1.0, -1.0])
    k = axis / s
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + s * kx + (1 - c) * kx @ kx


def stage1_copies(n: int, kappa: float) -> tuple[int, int]:
    """``(n_tilde, per_axis)`` with ``n_tilde = floor(n^{1-kappa})``."""
    nt = int(math.floor(n ** (1.0 - kappa) + 1e-9))
    return nt, nt // 3


def stage1_bloch(n: int, kappa: float, bloch, reps: int, seed: int) -> np.ndarray:
    """Stage-one Bloch estimates for ``reps`` independent runs, radially clipped."""
    _, m = stage1_copies(n, kappa)
    if m < 1:
        raise ValueError("stage one needs at least one toss per axis")
    r = np.asarray(bloch, dtype=float)
    rng = np.random.default_rng(seed)
    heads = rng.binomial(m, (1.0 + r) / 2.0, size=(reps, 3))
    est = 2.0 * heads / m - 1.0
    norm = np.linalg.norm(est, axis=1, keepdims=True)
    return np.where(norm > 1.0, est / np.maximum(norm, 1.0), est)


def stage1_estimate(n: int, kappa: float, rho_true, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """One stage-one run: returns the estimated density matrix and the aligning rotation."""
    r_true = density_to_bloch(np.asarray(rho_true))
    r = stage1_bloch(n, kappa, r_true, 1, seed)[0]
    return bloch_to_density(r), minimal_rotation(r)


def frame_from_estimate(rho_tilde) -> LocalFrame:
    r = density_to_bloch(np.asarray(rho_tilde))
    return LocalFrame((1.0 + np.linalg.norm(r)) / 2.0, minimal_rotation(r))


def hoeffding_bound(n: int, kappa: float, eps: float) -> float:
    """``6 exp(-n_tilde n^{2 eps - 1} / 2)``."""
    nt, _ = stage1_copies(n, kappa)
    return 6.0 * math.exp(-0.5 * nt * n ** (2 * eps - 1))


def stage1_miss_frequency(n: int, kappa: float, eps: float, bloch, reps: int, seed: int = 0) -> float:
    """Frequency of ``||rho_tilde - rho||_1^2 > 3 n^{2 eps - 1}`` over ``reps`` runs."""
    est = stage1_bloch(n, kappa, bloch, reps, seed)
    d2 = np.sum((est - np.asarray(bloch, dtype=float)) ** 2, axis=1)
    return float(np.mean(d2 > 3.0 * n ** (2 * eps - 1)))


# ------------------------------------------------------ local coordinates

def _local_bloch(u, mu: float, n: float) -> np.ndarray:
    """Bloch vectors of ``rho_{u/sqrt(n)}`` in the local frame, batched over rows of ``u``."""
    u = np.asarray(u, dtype=float)
    v = u / math.sqrt(n)
    a = np.hypot(v[..., 0], v[..., 1])
    length = 2.0 * (mu + v[..., 2]) - 1.0
    with np.errstate(invalid="ignore", divide="ignore"):
        sx = np.where(a > 0, np.sin(2 * a) / np.where(a > 0, a, 1.0), 2.0)
    direction = np.stack([-sx * v[..., 1], sx * v[..., 0], np.cos(2 * a)], axis=-1)
    return length[..., None] * direction


def reconstruct(u, frame: LocalFrame, n: float) -> np.ndarray:
    """Density matrix ``rho_{u/sqrt(n)}`` expressed in the original frame."""
    r = frame.rotation.T @ _local_bloch(u, frame.mu, n)
    return bloch_to_density(r)


def local_params(rho_true, frame: LocalFrame, n: float) -> LocalParams:
    """Exact local coordinates of ``rho_true`` around the frame's reference state.

    Raises
    ------
    ValueError
        If the reference state is maximally mixed.
    """
    if frame.mu - 0.5 < 1e-12:
        raise ValueError("reference state is maximally mixed")
    r = frame.rotation @ density_to_bloch(np.asarray(rho_true))
    length = np.linalg.norm(r)
    vz = (1.0 + length) / 2.0 - frame.mu
    if length == 0.0:
        return LocalParams((0.0, 0.0, math.sqrt(n) * vz))
    d = r / length
    a = 0.5 * math.acos(max(-1.0, min(1.0, d[2])))
    s = math.hypot(d[0], d[1])
    if s == 0.0:
        vx, vy = (0.0, 0.0) if d[2] > 0 else (a, 0.0)
    else:
        vx, vy = a * d[1] / s, -a * d[0] / s
    rn = math.sqrt(n)
    return LocalParams((rn * vx, rn * vy, rn * vz))


# -------------------------------------------------------------- stage two

def block_window(n: int, mu: float) -> tuple[np.ndarray, np.ndarray]:
    """Increasing values of ``j`` in the sampling window and their normalized probabilities.

    ``j`` runs over ``n/2 - k`` for integer ``k``, so it is half-integral
    for odd ``n``. Weights are evaluated in the log domain.

    Raises
    ------
    RuntimeError
        If the window holds less than ``1 - 1e-9`` of the mass after one widening.
    """
    if not 0.5 < mu < 1:
        raise ValueError("mu must lie in (1/2, 1)")
    half = WINDOW_SIGMAS * math.sqrt(n * mu * (1 - mu)) + 12.0
    for widen in (1.0, 2.0):
        center = n * (mu - 0.5)
        kmin = max(0, math.ceil(n / 2 - center - widen * half))
        kmax = min(n // 2, math.floor(n / 2 - center + widen * half))
        k = np.arange(kmin, kmax + 1, dtype=float)
        w = _block_weights(n, mu, k)
        total = float(w.sum())
        if total >= 1.0 - 1e-9:
            return (n / 2.0 - k)[::-1].copy(), (w / total)[::-1].copy()
    raise RuntimeError("block window does not capture the distribution")


def _block_weights(n: int, mu: float, k: np.ndarray) -> np.ndarray:
    """``p_n(j)`` for ``j = n/2 - k``."""
    logc = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    # n_j = C(n,k) - C(n,k-1) = C(n,k) (1 - k/(n-k+1))
    ratio = k / (n - k + 1.0)
    with np.errstate(divide="ignore"):
        lognj = logc + np.log1p(-ratio)
        j = n / 2.0 - k
        p = (1 - mu) / mu
        logw = (lognj - math.log(2 * mu - 1) + k * math.log1p(-mu)
                + (n - k + 1) * math.log(mu) + np.log1p(-np.exp((2 * j + 1) * math.log(p))))
    return np.exp(logw)


def sample_block(n: int, mu_u: float, seed: int, size: int | None = None):
    """Inverse-CDF draws of ``j`` from the block law."""
    j, w = block_window(n, mu_u)
    cdf = np.cumsum(w)
    cdf[-1] = 1.0
    u = kernels.uniforms(seed, 0, 1 if size is None else size, 6)
    out = j[np.minimum(np.searchsorted(cdf, u), len(j) - 1)]
    return float(out[0]) if size is None else out


def energy_outcome(j, n: int, mu: float, seed: int):
    """Smoothed block outcome ``j/sqrt(n) - sqrt(n)(mu - 1/2) + N(0, 1/(2 sqrt(n)))``."""
    j = np.asarray(j, dtype=float)
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, math.sqrt(1.0 / (2 * math.sqrt(n))), size=j.shape)
    return j / math.sqrt(n) - math.sqrt(n) * (mu - 0.5) + noise


def heterodyne_variance(mu: float) -> float:
    if mu - 0.5 < 1e-3 or mu >= 1:
        raise ValueError("mu must satisfy 1/2 + 1e-3 <= mu < 1")
    return mu / (2.0 * (2 * mu - 1) ** 2)


def heterodyne_outcome(u, mu: float, seed: int, size: int | None = None) -> np.ndarray:
    """Independent ``N(u_x, s2)`` and ``N(u_y, s2)`` with ``s2 = mu/(2(2mu-1)^2)``."""
    sd = math.sqrt(heterodyne_variance(mu))
    rng = np.random.default_rng(seed)
    shape = (2,) if size is None else (size, 2)
    return np.asarray(u[:2], dtype=float) + sd * rng.standard_normal(shape)


def truncate_estimator(u_tilde, n: float, eta: float) -> np.ndarray:
    """Zero every component with ``|u_i| > 3 n^eta``."""
    u_tilde = np.asarray(u_tilde, dtype=float)
    return np.where(np.abs(u_tilde) <= 3.0 * n**eta, u_tilde, 0.0)


def loss(u, u_hat, mu: float) -> tuple:
    """Local trace and fidelity losses, batched over the last axis."""
    if not 0.5 < mu < 1:
        raise ValueError("mu must lie in (1/2, 1)")
    d = np.asarray(u, dtype=float) - np.asarray(u_hat, dtype=float)
    c2 = (2 * mu - 1) ** 2
    rot = d[..., 0] ** 2 + d[..., 1] ** 2
    return 4.0 * (d[..., 2] ** 2 + c2 * rot), c2 * rot + d[..., 2] ** 2 / (1.0 - c2)


def theory_risk(mu: float, kind: str) -> float:
    """Limit-law expectation: ``8mu - 4mu^2`` (trace) or ``mu + 1/4`` (fidelity)."""
    return 8 * mu - 4 * mu * mu if kind == "trace" else mu + 0.25


def _threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("QM_THREADS", "1"))
    return max(1, threads)


def sample_trials(cfg: EstimationConfig, threads: int | None = None) -> np.ndarray:
    """Raw estimates ``u_tilde`` for every trial, shape ``(trials, 3)``.

    Trial ``i`` draws only from its own counter stream, so the output does
    not depend on ``threads``.
    """
    ux, uy, uz = map(float, cfg.u_true)
    if cfg.mode == "exact":
        j, w = block_window(cfg.n, cfg.mu0 + uz / math.sqrt(cfg.n))
        cdf = np.cumsum(w)
        cdf[-1] = 1.0
        j0 = float(j[0])
    else:
        cdf, j0 = np.zeros(1), 0.0
    cdf = np.ascontiguousarray(cdf, dtype=float)
    starts = list(range(0, cfg.trials, CHUNK))

    def work(s):
        return kernels.sample_local(cfg.seed, s, min(CHUNK, cfg.trials - s), float(cfg.n), cfg.mu0,
                                    ux, uy, uz, cfg.mode == "exact", cdf, j0)

    nthreads = _threads(threads)
    if nthreads == 1 or len(starts) == 1:
        parts = [work(s) for s in starts]
    else:
        with ThreadPoolExecutor(nthreads) as pool:
            parts = list(pool.map(work, starts))
    return np.concatenate(parts, axis=0)


def _summary(x: np.ndarray) -> tuple[float, float]:
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0


def run_trials(cfg: EstimationConfig, threads: int | None = None) -> RiskReport:
    """Monte Carlo estimate of the rescaled risk for ``cfg.loss``."""
    u_tilde = sample_trials(cfg, threads)
    u_hat = truncate_estimator(u_tilde, cfg.n, cfg.eta)
    u = np.asarray(cfg.u_true, dtype=float)
    trace_l, fid_l = loss(u, u_hat, cfg.mu0)
    mean, se = _summary(trace_l if cfg.loss == "trace" else fid_l)
    exact = exact_se = None
    if cfg.loss == "trace":
        r_true = _local_bloch(u, cfg.mu0, cfg.n)
        r_hat = _local_bloch(u_hat, cfg.mu0, cfg.n)
        exact, exact_se = _summary(cfg.n * np.sum((r_hat - r_true) ** 2, axis=1))
    return RiskReport(cfg.trials, mean, se, theory_risk(cfg.mu0, cfg.loss), cfg.loss, cfg.mode,
                      cfg.n, cfg.mu0, cfg.seed, exact, exact_se)
