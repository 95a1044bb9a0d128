"""Figures of merit for measurement channels.

``sigma2``: maximal added variance ``|T(B^2) - T(B)^2|``.
``delta``: measurement infidelity ``max_S |1_S(A) - T(1_S(B))|``.
``Delta``: maximal disturbance ``sup_{0<=P<=1} |R(P) - P|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .qchan import KrausChannel, compose, heisenberg_apply, schrodinger_apply
from .qmat import DimensionError, as_hermitian, herm_norm, spectral_projectors

MAX_SPECTRUM = 16


@dataclass(frozen=True)
class QualityReport:
    sigma2: float
    delta: float
    disturbance: float
    d_center: float

    def to_dict(self) -> dict:
        return asdict(self)


def _restricted_norm(h: np.ndarray, subspace) -> float:
    if subspace is not None:
        idx = np.asarray(subspace)
        h = h[np.ix_(idx, idx)]
    return float(herm_norm(0.5 * (h + h.conj().T)))


def sesquilinear_form(t: KrausChannel, x, y) -> np.ndarray:
    """``(X, Y)_T = T(X^dag Y) - T(X)^dag T(Y)``."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if x.shape != y.shape:
        raise DimensionError("X and Y must have equal shapes")
    xv = x @ t.kraus
    yv = y @ t.kraus
    # T(X^dag Y) = sum_k (X V_k)^dag (Y V_k)
    txy = np.einsum("kia,kib->ab", xv.conj(), yv)
    tx = np.einsum("kia,kib->ab", t.kraus.conj(), xv)
    ty = np.einsum("kia,kib->ab", t.kraus.conj(), yv)
    return txy - tx.conj().T @ ty


def max_added_variance(t: KrausChannel, b, subspace=None) -> float:
    """``Sigma^2 = |T(B^2) - T(B)^2|``.

    Parameters
    ----------
    t : KrausChannel
    b : array_like
        Hermitian pointer on the input space of ``t``.
    subspace : array_like of int, optional
        Output basis indices on which the norm is taken. Used for truncated
        unbounded pointers where only low levels are trustworthy.
    """
    b = as_hermitian(b)
    return max(0.0, _restricted_norm(sesquilinear_form(t, b, b), subspace))


def measurement_infidelity(t: KrausChannel, a, b, tol: float = 1e-9) -> float:
    """Worst event-probability discrepancy between ``A`` and pointer ``B``.

    The supremum over Borel sets reduces to subsets of the union of the two
    finite spectra; all such subsets are enumerated.

    Raises
    ------
    ValueError
        If the union of spectra has more than 16 points.
    """
    a = as_hermitian(a)
    b = as_hermitian(b)
    if a.shape[0] != t.out_dim or b.shape[0] != t.in_dim:
        raise DimensionError("A must live on the output and B on the input space")
    va, pa = spectral_projectors(a, tol)
    vb, pb = spectral_projectors(b, tol)
    labels: list[float] = []
    for v in np.concatenate([va, vb]):
        if not any(abs(v - u) <= tol * max(1.0, abs(u)) for u in labels):
            labels.append(float(v))
    m = len(labels)
    if m > MAX_SPECTRUM:
        raise ValueError(f"joint spectrum has {m} points; enumeration capped at {MAX_SPECTRUM}")
    d = t.out_dim
    diffs = np.zeros((m, d, d), dtype=complex)

    def slot(v):
        return int(np.argmin([abs(v - u) for u in labels]))

    for v, p in zip(va, pa):
        diffs[slot(v)] += p
    for v, p in zip(vb, pb):
        diffs[slot(v)] -= heisenberg_apply(t, p)
    masks = ((np.arange(2**m)[:, None] >> np.arange(m)) & 1).astype(float)
    best = 0.0
    for start in range(0, len(masks), 4096):
        block = np.einsum("sm,mij->sij", masks[start : start + 4096], diffs)
        best = max(best, float(np.max(herm_norm(block))))
    return best


def distance_to_center(a) -> float:
    """``(lambda_max - lambda_min) / 2``."""
    w = np.linalg.eigvalsh(as_hermitian(a))
    return float(0.5 * (w[-1] - w[0]))


# ---------------------------------------------------------------- disturbance

def _bloch_affine(r: KrausChannel) -> tuple[np.ndarray, np.ndarray]:
    """Affine Bloch action ``v -> L v + c`` of ``R*`` on a qubit."""
    from .qmat import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z

    paulis = np.array([PAULI_X, PAULI_Y, PAULI_Z])
    c_img = schrodinger_apply(r, 0.5 * PAULI_I)
    c = np.einsum("kij,ji->k", paulis, c_img).real
    imgs = schrodinger_apply(r, 0.5 * paulis)
    lin = np.einsum("kij,lji->kl", paulis, imgs).real
    return lin, c


def _disturbance_qubit(r: KrausChannel) -> float:
    lin, c = _bloch_affine(r)
    m = lin - np.eye(3)
    th, ph = np.meshgrid(
        np.linspace(0, np.pi, 32), np.linspace(0, 2 * np.pi, 16, endpoint=False), indexing="ij"
    )
    th, ph = th.ravel(), ph.ravel()
    v = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
    vals = 0.5 * np.linalg.norm(m @ v + c[:, None], axis=0)
    i = int(np.argmax(vals))

    def neg(p):
        st = math.sin(p[0])
        u = m @ np.array([st * math.cos(p[1]), st * math.sin(p[1]), math.cos(p[0])]) + c
        return -0.5 * math.sqrt(u @ u)

    res = minimize(neg, [th[i], ph[i]], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 2000})
    return max(float(vals[i]), -res.fun)


def _ascend(r: KrausChannel, psi: np.ndarray, iters: int, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Alternate between the best event for each state and the best state
    for that event; the objective never decreases."""
    d = r.out_dim
    rows = np.arange(len(psi))
    best = np.full(len(psi), -1.0)
    for _ in range(iters):
        rho = psi[:, :, None] * psi.conj()[:, None, :]
        w, v = np.linalg.eigh(schrodinger_apply(r, rho) - rho)
        vp = v * (w > 0)[:, None, :]
        p = vp @ v.conj().transpose(0, 2, 1)
        wy, vy = np.linalg.eigh(heisenberg_apply(r, p) - p)
        top = np.where(np.abs(wy[:, -1]) >= np.abs(wy[:, 0]), d - 1, 0)
        psi = vy[rows, :, top]
        val = np.abs(wy[rows, top])
        done = np.all(val - best < tol)
        best = np.maximum(val, best)
        if done:
            break
    return psi, best


def _polish(r: KrausChannel, psi0: np.ndarray) -> float:
    """BFGS on ``psi -> d(R*(psi psi^dag), psi psi^dag)`` with its exact gradient."""
    d = r.out_dim

    def neg(x):
        z = x[:d] + 1j * x[d:]
        nz = np.linalg.norm(z)
        psi = z / nz
        rho = np.outer(psi, psi.conj())
        w, v = np.linalg.eigh(schrodinger_apply(r, rho) - rho)
        pos = w > 0
        p = v[:, pos] @ v[:, pos].conj().T
        g = 2.0 * (heisenberg_apply(r, p) - p) @ psi
        g = (g - np.vdot(psi, g).real * psi) / nz
        return -float(np.sum(w[pos])), -np.concatenate([g.real, g.imag])

    res = minimize(neg, np.concatenate([psi0.real, psi0.imag]), jac=True, method="BFGS",
                   options={"gtol": 1e-9, "maxiter": 200})
    return -float(res.fun)


def _disturbance_general(r: KrausChannel, restarts: int, seed: int, polish: bool = True) -> float:
    d = r.out_dim
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((restarts, d)) + 1j * rng.standard_normal((restarts, d))
    psi = np.concatenate([np.eye(d, dtype=complex), z / np.linalg.norm(z, axis=1, keepdims=True)])
    # short alternating sweep over all seeds, then polish the best two
    psi, val = _ascend(r, psi, 6, 1e-12)
    best = float(val.max())
    if not polish:
        return best
    for i in np.argsort(val)[::-1][:2]:
        best = max(best, _polish(r, psi[i]))
    return best


def max_disturbance(r: KrausChannel, restarts: int = 64, seed: int = 0, polish: bool = True) -> float:
    """``Delta = sup_{0<=P<=1} |R(P) - P|`` for a square channel.

    Computed in the dual form ``max_psi d(R*(psi psi^dag), psi psi^dag)``,
    which equals the supremum over events. Qubits use a Bloch-sphere grid
    with Nelder-Mead refinement; larger dimensions use alternating ascent
    between events and states over ``restarts`` random seeds followed by a
    BFGS polish of the best candidates.

    Every value returned is attained by an explicit state, so it is a lower
    bound on the supremum. With ``polish=False`` the ascent stops after a
    short sweep; the result is still a valid lower bound.
    """
    if r.in_dim != r.out_dim:
        raise DimensionError("disturbance needs a square channel")
    if r.out_dim == 1:
        return 0.0
    if r.out_dim == 2:
        val = _disturbance_qubit(r)
    else:
        val = _disturbance_general(r, restarts, seed, polish)
    return float(min(1.0, max(0.0, val)))


def coherence(r: KrausChannel, psi_x, psi_y) -> float:
    """``sup_P |<psi_x| R(P) psi_y>|`` over events ``0 <= P <= 1``.

    Reduced exactly to a one-parameter problem: for the Hermitian family
    ``X_phi = (e^{i phi}|psi_y><psi_x| + h.c.) / 2`` the supremum equals
    ``max_phi`` of the positive part of ``R*(X_phi)``.
    """
    psi_x = np.asarray(psi_x, dtype=complex).ravel()
    psi_y = np.asarray(psi_y, dtype=complex).ravel()
    if abs(np.linalg.norm(psi_x) - 1) > 1e-9 or abs(np.linalg.norm(psi_y) - 1) > 1e-9:
        raise ValueError("vectors must be normalized")
    if abs(np.vdot(psi_x, psi_y)) > 1e-9:
        raise ValueError("vectors must be orthogonal")
    off = np.outer(psi_y, psi_x.conj())
    xr = schrodinger_apply(r, 0.5 * (off + off.conj().T))
    xi = schrodinger_apply(r, 0.5 * (1j * off + (1j * off).conj().T))

    def g(phi):
        m = np.cos(phi)[..., None, None] * xr + np.sin(phi)[..., None, None] * xi
        return np.sum(np.clip(np.linalg.eigvalsh(m), 0.0, None), axis=-1)

    grid = np.linspace(0.0, np.pi, 65)
    vals = g(grid)
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, 64)]
    res = minimize_scalar(lambda p: -float(g(np.asarray(p))), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-9})
    return float(max(vals[i], -res.fun))


def coding_imperfection(c: KrausChannel, d: KrausChannel) -> float:
    """Maximal disturbance of the composite ``C o D``.

    ``D`` maps quantum observables to classical functions (the Heisenberg
    form of a state preparation) and ``C`` maps classical functions back to
    quantum observables (the Heisenberg form of a POVM).
    """
    return max_disturbance(compose(c, d))


def quality_report(t: KrausChannel, a, b_pointer, sys_dim: int) -> QualityReport:
    """Collect sigma2, delta, Delta and d(A, Z) for a system (x) ancilla map."""
    from .qchan import embed_pointer, restrict_to_system

    big_b = embed_pointer(b_pointer, sys_dim)
    return QualityReport(
        sigma2=max_added_variance(t, big_b),
        delta=measurement_infidelity(t, a, big_b),
        disturbance=max_disturbance(restrict_to_system(t, sys_dim)),
        d_center=distance_to_center(heisenberg_apply(t, big_b)),
    )
