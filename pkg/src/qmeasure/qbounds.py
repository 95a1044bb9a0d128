"""Evaluators for the measurement trade-off inequalities and the sharp
qubit family that saturates them.

Every evaluator returns a :class:`BoundCheck` carrying the raw two sides
so curves of the forbidden regions can be drawn from the same data.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .config import get_tolerances
from .qchan import (
    KrausChannel,
    embed_pointer,
    heisenberg_apply,
    mix_channels,
    random_channel,
    restrict_to_system,
    schrodinger_apply,
)
from .qmat import as_hermitian, commutator, ket, op_norm, random_unitary
from .qmetrics import (
    coherence,
    distance_to_center,
    max_added_variance,
    max_disturbance,
    measurement_infidelity,
)


@dataclass(frozen=True)
class BoundCheck:
    """One evaluated inequality.

    ``gap`` is signed so that ``gap >= -tol`` means the inequality holds.
    ``void`` marks instances outside the theorem's hypothesis.
    """

    name: str
    lhs: float
    rhs: float
    satisfied: bool
    gap: float
    void: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("lhs", "rhs", "gap"):
            if math.isinf(d[k]):
                d[k] = "inf" if d[k] > 0 else "-inf"
        return d


def _check(name, lhs, rhs, gap, tol, void=False) -> BoundCheck:
    return BoundCheck(name, float(lhs), float(rhs), bool(void or gap >= -tol), float(gap), void)


def _tol(tol):
    return get_tolerances().bound if tol is None else tol


def joint_measurement_check(t: KrausChannel, b, b_tilde, tol=None, subspace=None) -> BoundCheck:
    """``Sigma_B Sigma_B~ >= |[T(B), T(B~)]| / 2`` for commuting pointers."""
    b = as_hermitian(b)
    bt = as_hermitian(b_tilde)
    if np.max(np.abs(commutator(b, bt))) > 1e-10 * max(1.0, np.max(np.abs(b)) * np.max(np.abs(bt))):
        raise ValueError("pointers must commute")
    sb = math.sqrt(max_added_variance(t, b, subspace))
    st = math.sqrt(max_added_variance(t, bt, subspace))
    c = commutator(heisenberg_apply(t, b), heisenberg_apply(t, bt))
    if subspace is not None:
        idx = np.asarray(subspace)
        c = c[np.ix_(idx, idx)]
    rhs = 0.5 * op_norm(c)
    lhs = sb * st
    return _check("joint_measurement", lhs, rhs, lhs - rhs, _tol(tol))


def heisenberg_rhs(delta_dist: float, d_center: float) -> float:
    """``d(A,Z) (1/2 - Delta) / sqrt(Delta (1 - Delta))``; ``inf`` at ``Delta = 0``."""
    if delta_dist <= 0.0:
        return math.inf if d_center > 0 else 0.0
    if delta_dist >= 0.5:
        return 0.0
    return d_center * (0.5 - delta_dist) / math.sqrt(delta_dist * (1.0 - delta_dist))


def heisenberg_check(t: KrausChannel, b_ancilla, sys_dim: int, tol=None, disturbance=None) -> BoundCheck:
    """Heisenberg principle for ``T : A (x) ancilla -> A`` and an ancilla pointer.

    A vanishing disturbance gives an infinite right-hand side, so any
    nontrivial transfer with finite added variance is reported violated.
    """
    big_b = embed_pointer(b_ancilla, sys_dim)
    sigma = math.sqrt(max_added_variance(t, big_b))
    dc = distance_to_center(heisenberg_apply(t, big_b))
    dist = max_disturbance(restrict_to_system(t, sys_dim)) if disturbance is None else disturbance
    rhs = heisenberg_rhs(dist, dc)
    gap = sigma - rhs if math.isfinite(rhs) else -math.inf
    return _check("heisenberg", sigma, rhs, gap, _tol(tol))


def info_disturbance_check(delta: float, disturbance: float, tol=None) -> BoundCheck:
    """``(1/2 - delta)^2 + (1/2 - Delta)^2 <= 1/4`` for ``delta, Delta`` in ``[0, 1/2]``."""
    lhs = (0.5 - delta) ** 2 + (0.5 - disturbance) ** 2
    void = not (0.0 <= delta <= 0.5 and 0.0 <= disturbance <= 0.5)
    return _check("info_disturbance", lhs, 0.25, 0.25 - lhs, _tol(tol), void)


def coding_bounds(d: int) -> tuple[float, float]:
    """Lower bounds on classical coding imperfection.

    Returns
    -------
    cs_bound : float
        ``(3 - sqrt 5) / 4``, valid in every dimension.
    clone_bound : float
        ``(d - 1) / (d + 1)``.
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    return (3.0 - math.sqrt(5.0)) / 4.0, (d - 1) / (d + 1)


def collapse_rhs(ratio: float) -> float:
    """``s / sqrt(1 + 4 s^2)`` with ``s = Sigma / |x - y|``."""
    return ratio / math.sqrt(1.0 + 4.0 * ratio * ratio)


def collapse_check(t: KrausChannel, b_ancilla, sys_dim: int, psi_x, psi_y, x: float, y: float,
                   tol=None, sigma=None) -> BoundCheck:
    """Coherence left between two eigenvectors of ``A = T(1 (x) B)``."""
    if abs(x - y) < 1e-12:
        raise ValueError("eigenvalues must differ")
    big_b = embed_pointer(b_ancilla, sys_dim)
    a = heisenberg_apply(t, big_b)
    for v, lam in ((psi_x, x), (psi_y, y)):
        v = np.asarray(v, dtype=complex)
        if np.linalg.norm(a @ v - lam * v) > 1e-8 * max(1.0, op_norm(a)):
            raise ValueError("psi_x, psi_y must be eigenvectors of T(1 (x) B)")
    if sigma is None:
        sigma = math.sqrt(max_added_variance(t, big_b))
    lhs = coherence(restrict_to_system(t, sys_dim), psi_x, psi_y)
    rhs = collapse_rhs(sigma / abs(x - y))
    return _check("collapse", lhs, rhs, rhs - lhs, _tol(tol))


def nondestructive_collapse_check(t: KrausChannel, sys_dim: int, psi_i, psi_j, delta: float,
                                  basis=None, tol=None) -> BoundCheck:
    """Coherence bound ``sqrt(delta (1 - delta))`` for nondestructive maps.

    Parameters
    ----------
    basis : array_like, optional
        Columns are the eigenbasis of the measured observable; when given,
        each basis projector must be a fixed point of ``R*``.
    """
    r = restrict_to_system(t, sys_dim)
    vecs = [psi_i, psi_j] if basis is None else list(np.asarray(basis).T)
    for v in vecs:
        p = np.outer(v, np.conj(v))
        if np.max(np.abs(schrodinger_apply(r, p) - p)) > 1e-9:
            raise ValueError("map is destructive on the eigenbasis")
    lhs = coherence(r, psi_i, psi_j)
    void = not (0.0 <= delta <= 0.5)
    rhs = math.sqrt(max(delta * (1.0 - delta), 0.0))
    return _check("nondestructive_collapse", lhs, rhs, rhs - lhs, _tol(tol), void)


def _norm_any(m) -> float:
    """Operator norm of a dense or sparse matrix."""
    if not sp.issparse(m):
        return op_norm(m)
    m = m.tocsr().astype(complex)
    n = m.shape[0]
    if n <= 64:
        return op_norm(m.toarray())
    herm = abs(m - m.conj().T).max() <= 1e-12 * max(abs(m).max(), 1e-300)
    h = m if herm else (m.conj().T @ m).tocsr()
    v0 = np.random.default_rng(0).standard_normal(n).astype(complex)
    w = eigsh(h, k=1, which="LM", ncv=min(n - 1, 40), tol=1e-13, v0=v0,
              return_eigenvectors=False)
    val = float(abs(w[0]))
    return val if herm else math.sqrt(val)


@dataclass(frozen=True)
class DecoherenceEstimate:
    measured: float
    bound: float
    delta_comm: float
    satisfied: bool


def decoherence_estimate(theta0, theta1, a, b, delta_comm: float | None = None) -> DecoherenceEstimate:
    """Bound the cross term ``|<theta0| A theta1>|`` by approximate commutation.

    Uses ``(delta_comm |B| + sigma_0 + sigma_1) |A| / |b_0 - b_1|`` with
    ``b_j`` and ``sigma_j`` the mean and spread of ``B`` in ``theta_j``.
    ``a`` and ``b`` may be dense arrays or scipy sparse matrices.

    Parameters
    ----------
    delta_comm : float, optional
        Commutation defect ``|[A,B]| / (|A| |B|)``. Computed when omitted;
        verified as an upper bound when supplied.
    """
    t0 = np.asarray(theta0, dtype=complex).ravel()
    t1 = np.asarray(theta1, dtype=complex).ravel()
    if abs(np.vdot(t0, t1)) > 1e-9:
        raise ValueError("theta0 and theta1 must be orthogonal")
    na, nb = _norm_any(a), _norm_any(b)
    comm = a @ b - b @ a
    actual = _norm_any(comm) / (na * nb) if na * nb > 0 else 0.0
    if delta_comm is None:
        delta_comm = actual
    elif actual > delta_comm * (1 + 1e-9) + 1e-12:
        raise ValueError(f"commutator defect {actual:.3e} exceeds delta_comm {delta_comm:.3e}")
    bt0, bt1 = b @ t0, b @ t1
    b0, b1 = np.vdot(t0, bt0).real, np.vdot(t1, bt1).real
    if abs(b0 - b1) < 1e-12:
        raise ValueError("pointer means coincide")
    s0 = math.sqrt(max(np.vdot(bt0, bt0).real - b0 * b0, 0.0))
    s1 = math.sqrt(max(np.vdot(bt1, bt1).real - b1 * b1, 0.0))
    bound = (delta_comm * nb + s0 + s1) / abs(b0 - b1) * na
    measured = abs(np.vdot(t0, a @ t1))
    return DecoherenceEstimate(float(measured), float(bound), float(delta_comm),
                               bool(measured <= bound + 1e-12))


# ----------------------------------------------------------- sharp family

def sharp_family(p: float) -> tuple[KrausChannel, np.ndarray]:
    """Qubit (x) two-outcome channel saturating the trade-off bounds.

    ``T(X (x) f) = sum_w f(w) V_w X V_w`` with
    ``V_+ = diag(sqrt(1-p), sqrt p)`` and ``V_- = diag(sqrt p, sqrt(1-p))``.
    The pointer ``(delta_+ - delta_-)/(1 - 2p)`` is unbiased for sigma_z.

    Returns
    -------
    channel : KrausChannel
        Map from the 4-dimensional qubit (x) outcome space to the qubit.
    pointer : ndarray
        Pointer on the 2-dimensional outcome factor.
    """
    if not 0.0 <= p <= 0.5:
        raise ValueError("p must lie in [0, 1/2]")
    if p == 0.5:
        raise ValueError("pointer undefined at p = 1/2")
    vp = np.diag([math.sqrt(1 - p), math.sqrt(p)]).astype(complex)
    vm = np.diag([math.sqrt(p), math.sqrt(1 - p)]).astype(complex)
    kraus = np.array([np.kron(vp, ket(0, 2)[:, None]), np.kron(vm, ket(1, 2)[:, None])])
    pointer = np.diag([1.0, -1.0]).astype(complex) / (1.0 - 2.0 * p)
    return KrausChannel(kraus), pointer


def sharp_closed_forms(p: float) -> dict:
    """Closed-form quality figures of the sharp family."""
    s = math.sqrt(p * (1 - p))
    return {
        "sigma2": 4 * p * (1 - p) / (1 - 2 * p) ** 2,
        "delta": p,
        "disturbance": 0.5 - s,
        "coherence": s,
    }


def sharp_equality_sweep(ps=None, tol=None) -> list[dict]:
    """Evaluate the four saturated bounds on a grid of ``p`` values."""
    if ps is None:
        ps = np.linspace(0.05, 0.45, 9)
    up, dn = ket(0, 2), ket(1, 2)
    sz = np.diag([1.0, -1.0]).astype(complex)
    rows = []
    for p in ps:
        t, b = sharp_family(float(p))
        big_b = embed_pointer(b, 2)
        sigma = math.sqrt(max_added_variance(t, big_b))
        dist = max_disturbance(restrict_to_system(t, 2))
        delta = measurement_infidelity(t, sz, embed_pointer(np.diag([1.0, -1.0]), 2))
        checks = [
            heisenberg_check(t, b, 2, tol, disturbance=dist),
            info_disturbance_check(delta, dist, tol),
            collapse_check(t, b, 2, up, dn, 1.0, -1.0, tol, sigma=sigma),
            nondestructive_collapse_check(t, 2, up, dn, delta, tol=tol),
        ]
        rows.append({"p": float(p), "checks": checks, "sigma": sigma, "delta": delta,
                     "disturbance": dist})
    return rows


# ----------------------------------------------------------- random audit

def _noisy_measurement(u: np.ndarray, q: np.ndarray) -> KrausChannel:
    """``X (x) f -> sum_w f(w) V_w X V_w`` with ``V_w`` diagonal in basis ``u``.

    ``q[w, i]`` is the probability of outcome ``w`` given eigenvector ``i``.
    """
    k = q.shape[0]
    ops = []
    for w in range(k):
        vw = (u * np.sqrt(q[w])) @ u.conj().T
        ops.append(np.kron(vw, ket(w, k)[:, None]))
    return KrausChannel(np.array(ops))


CERTIFY_MARGIN = 1e-6


@dataclass
class AuditInstance:
    seed: int
    sys_dim: int
    noise: float
    checks: list

    def worst_gap(self) -> float:
        gaps = [c.gap for c in self.checks if not c.void]
        return min(gaps) if gaps else math.inf


def audit_instance(seed: int, tol=None) -> AuditInstance:
    """Build one random measurement scenario and evaluate every bound.

    The channel is a noisy measurement of a random observable ``A`` mixed
    with a random unital map of random weight; a quarter of the instances
    keep zero weight so that the nondestructive bound is exercised.
    """
    rng = np.random.default_rng([seed, 0x5EED])
    d = int(rng.integers(2, 5))
    u = random_unitary(d, rng)
    labels = np.sort(rng.choice(np.arange(-3, 4), size=d, replace=False)).astype(float)
    a = (u * labels) @ u.conj().T
    # row-stochastic confusion matrix concentrated on the diagonal
    conf = rng.dirichlet(np.full(d, 0.3), size=d) * rng.uniform(0, 0.7)
    conf[np.arange(d), np.arange(d)] += 1 - conf.sum(axis=1)
    meas = _noisy_measurement(u, conf.T)
    noise = 0.0 if rng.uniform() < 0.25 else float(rng.uniform(0, 0.6))
    if noise > 0:
        other = random_channel(d * d, d, int(rng.integers(1, 4)), int(rng.integers(2**31)))
        t = mix_channels([1 - noise, noise], [meas, other])
    else:
        t = meas
    b = np.diag(labels).astype(complex)
    big_b = embed_pointer(b, d)
    r = restrict_to_system(t, d)
    sigma = math.sqrt(max_added_variance(t, big_b))
    delta = measurement_infidelity(t, a, big_b)
    # A lower bound on Delta certifies both Delta-dependent inequalities,
    # since their right-hand sides decrease in Delta; refine only when close.
    dist = max_disturbance(r, seed=seed, polish=False)
    pair = [heisenberg_check(t, b, d, tol, disturbance=dist),
            info_disturbance_check(delta, dist, tol)]
    if min(c.gap for c in pair) < CERTIFY_MARGIN:
        dist = max_disturbance(r, seed=seed)
        pair = [heisenberg_check(t, b, d, tol, disturbance=dist),
                info_disturbance_check(delta, dist, tol)]
    checks = pair
    # collapse bound on every eigenpair of A_out = T(1 (x) B)
    a_out = heisenberg_apply(t, big_b)
    w, v = np.linalg.eigh(0.5 * (a_out + a_out.conj().T))
    for i, j in itertools.combinations(range(d), 2):
        if abs(w[i] - w[j]) > 1e-6:
            checks.append(collapse_check(t, b, d, v[:, i], v[:, j], w[i], w[j], tol, sigma=sigma))
    if noise == 0:
        for i, j in itertools.combinations(range(d), 2):
            checks.append(nondestructive_collapse_check(t, d, u[:, i], u[:, j], delta,
                                                        basis=u, tol=tol))
    # joint measurement: a commuting pointer pair in a random input basis
    w_in = random_unitary(d * d, rng)
    p1 = (w_in * rng.standard_normal(d * d)) @ w_in.conj().T
    p2 = (w_in * rng.standard_normal(d * d)) @ w_in.conj().T
    checks.append(joint_measurement_check(t, p1, p2, tol))
    return AuditInstance(seed, d, noise, checks)


def random_audit(trials: int = 1000, seed: int = 0, tol=None) -> list[AuditInstance]:
    return [audit_instance(seed * 1_000_003 + i, tol) for i in range(trials)]
