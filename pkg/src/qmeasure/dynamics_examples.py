"""Worked physical examples: CNOT information transfer, spin chains at zero
and nonzero temperature, and resonance-fluorescence Bloch dynamics.

Tensor factors are ordered system first, apparatus second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm

from .qbounds import DecoherenceEstimate, decoherence_estimate
from .qchan import KrausChannel, compose, identity_channel, tensor_channel
from .qmat import PAULI_X, PAULI_Y, PAULI_Z, partial_trace

MAX_CHAIN = 14


# ------------------------------------------------------------------ CNOT

def cnot_unitary() -> np.ndarray:
    """Flip the apparatus qubit (second factor) when the system is ``|1>``."""
    u = np.eye(4, dtype=complex)
    u[[2, 3]] = u[[3, 2]]
    return u


def cnot_transfer(alpha0: complex, alpha1: complex) -> tuple[np.ndarray, np.ndarray]:
    """Couple ``alpha0|0> + alpha1|1>`` to an apparatus qubit in ``|0>``.

    Returns
    -------
    joint : ndarray, shape (4, 4)
        Final system (x) apparatus density matrix.
    reduced : ndarray, shape (2, 2)
        System state after tracing out the apparatus.
    """
    norm = abs(alpha0) ** 2 + abs(alpha1) ** 2
    if abs(norm - 1.0) > 1e-12:
        raise ValueError("amplitudes must be normalized")
    psi = np.kron(np.array([alpha0, alpha1], dtype=complex), np.array([1, 0], dtype=complex))
    theta = cnot_unitary() @ psi
    joint = np.outer(theta, theta.conj())
    return joint, partial_trace(joint, [2, 2], keep=[0])


def cnot_channel() -> KrausChannel:
    """Heisenberg map ``Y -> <0| U^dag Y U |0>`` from system (x) record to system."""
    w = cnot_unitary()[:, [0, 2]]  # U applied to |i>|0>, i = 0, 1
    return KrausChannel(w[None])


def repeated_cnot_channel() -> KrausChannel:
    """Two successive CNOT readouts; input ordered system, record 2, record 1."""
    second = tensor_channel(cnot_channel(), identity_channel(2))
    return compose(cnot_channel(), second)


def repeated_readout_law(alpha0: complex, alpha1: complex) -> np.ndarray:
    """Joint probabilities ``P(s1, s2)`` of two successive CNOT readouts."""
    t = repeated_cnot_channel()
    psi = np.array([alpha0, alpha1], dtype=complex)
    rho = np.outer(psi, psi.conj())
    law = np.zeros((2, 2))
    proj = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    for s1 in range(2):
        for s2 in range(2):
            obs = np.kron(np.kron(np.eye(2), proj[s2]), proj[s1])
            law[s1, s2] = np.trace(rho @ t(obs)).real
    return law


# ------------------------------------------------------------- spin chain

def _site_op(op: np.ndarray, site: int, n_sites: int) -> sp.csr_matrix:
    left = sp.identity(2**site, format="csr")
    right = sp.identity(2 ** (n_sites - site - 1), format="csr")
    return sp.kron(sp.kron(left, sp.csr_matrix(op)), right, format="csr")


def chain_branches(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Branch vectors after the qubit has flipped every chain spin.

    Each CNOT ``U_i`` flips chain spin ``i`` when the qubit (last factor) is
    in ``|1>``; applying ``U_1 ... U_N`` to ``|0...0>|psi_j>`` gives
    ``|j...j>|psi_j>``.
    """
    if n > MAX_CHAIN:
        raise ValueError(f"exact simulation capped at N = {MAX_CHAIN}")
    dim = 2 ** (n + 1)
    out = []
    for j in (0, 1):
        state = np.zeros(dim, dtype=complex)
        state[j] = 1.0  # chain |0...0>, qubit |j>
        for i in range(n):
            idx = np.arange(dim)
            qubit = idx & 1
            flip = 1 << (n - i)  # bit of chain spin i
            target = np.where(qubit == 1, idx ^ flip, idx)
            new = np.zeros_like(state)
            new[target] = state
            state = new
        out.append(state)
    return out[0], out[1]


def chain_observable(n: int, kind: str) -> sp.csr_matrix:
    """Observable on chain (x) qubit.

    ``micro``: sigma_x on the first spin times sigma_x on the qubit.
    ``macro``: mean sigma_x over the chain times sigma_x on the qubit.
    ``product``: sigma_x on every spin and on the qubit.
    """
    total = n + 1
    qx = _site_op(PAULI_X, n, total)
    if kind == "micro":
        return (_site_op(PAULI_X, 0, total) @ qx).tocsr()
    if kind == "macro":
        mean = sum(_site_op(PAULI_X, i, total) for i in range(n)) / n
        return (mean @ qx).tocsr()
    if kind == "product":
        op = sp.csr_matrix(np.array([[1.0]]))
        for _ in range(total):
            op = sp.kron(op, sp.csr_matrix(PAULI_X), format="csr")
        return op
    raise ValueError(f"unknown observable kind {kind!r}")


def chain_pointer(n: int) -> sp.csr_matrix:
    """Mean magnetization ``(1/N) sum sigma_z`` of the chain."""
    total = n + 1
    return (sum(_site_op(PAULI_Z, i, total) for i in range(n)) / n).tocsr()


@dataclass(frozen=True)
class ChainResult:
    n: int
    kind: str
    coherence: float
    bound: float
    estimate: DecoherenceEstimate


def spin_chain(n: int, kind: str = "macro",
               alpha0: complex = 1 / math.sqrt(2), alpha1: complex = 1 / math.sqrt(2)) -> ChainResult:
    """Interference term between the two branches on a chain observable.

    ``coherence`` is ``|conj(alpha0) alpha1 <theta0| A theta1>|``, the
    off-diagonal contribution to ``<A>`` in the superposed state. ``bound``
    is the approximate-commutation estimate of the bare cross term
    ``|<theta0| A theta1>|``; for the micro and macro kinds it equals
    ``|A| / N``.
    """
    t0, t1 = chain_branches(n)
    a = chain_observable(n, kind)
    b = chain_pointer(n)
    est = decoherence_estimate(t0, t1, a, b)
    amp = abs(np.conj(alpha0) * alpha1)
    return ChainResult(n, kind, amp * est.measured, est.bound, est)


def chain_bound(n: int, kind: str) -> float:
    """Closed-form decoherence bound, valid for any chain length.

    The commutation defect is ``2/N`` for the micro and macro kinds and ``2``
    for the product kind; all observables and the pointer have unit norm and
    the branch means differ by 2.
    """
    if n < 1:
        raise ValueError("chain needs at least one spin")
    if kind in ("micro", "macro"):
        return 1.0 / n
    if kind == "product":
        return 1.0
    raise ValueError(f"unknown observable kind {kind!r}")


def thermal_epsilon(beta: float) -> float:
    """Thermal mean ``tr(sigma_z tau_beta) = -tanh(beta)``."""
    return -math.tanh(beta)


# ---------------------------------------------------- resonance fluorescence

@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.x**2 + self.y**2 + self.z**2 > 1 + 1e-12:
            raise ValueError("Bloch vector outside the unit ball")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


def bloch_generator(omega: float) -> np.ndarray:
    return np.array([[-0.5, 0.0, 0.0], [0.0, -0.5, omega], [0.0, -omega, -1.0]])


def bloch_evolve(omega: float, b0, t: float, mode: str = "exact") -> np.ndarray:
    """Bloch vector of the driven, damped qubit at time ``t``.

    Parameters
    ----------
    mode : {"exact", "strong", "interaction"}
        ``exact`` solves ``db/dt = M b - e_z`` through the exponential of the
        augmented 4x4 generator. ``strong`` is the large-drive approximation
        in the original frame and ``interaction`` removes its Rabi rotation,
        leaving ``diag(e^{-t/2}, e^{-3t/4}, e^{-3t/4})``.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    b0 = np.asarray(b0.as_array() if isinstance(b0, BlochVector) else b0, dtype=float)
    if mode == "exact":
        g = np.zeros((4, 4))
        g[:3, :3] = bloch_generator(omega)
        g[2, 3] = -1.0
        return (expm(g * t) @ np.append(b0, 1.0))[:3]
    slow, fast = math.exp(-t / 2), math.exp(-0.75 * t)
    if mode == "interaction":
        return np.array([slow, fast, fast]) * b0
    if mode == "strong":
        c, s = math.cos(omega * t), math.sin(omega * t)
        rot = np.array([[slow, 0, 0], [0, fast * c, fast * s], [0, -fast * s, fast * c]])
        return rot @ b0
    raise ValueError(f"unknown mode {mode!r}")


def rf_disturbance(t: float) -> float:
    """Maximal disturbance in the interaction picture, ``(1 - e^{-3t/4}) / 2``."""
    return 0.5 * (1.0 - math.exp(-0.75 * t))


def rf_infidelity_bound(t: float) -> float:
    """Lower bound ``1/2 - sqrt(1 - e^{-3t/2}) / 2`` on the infidelity."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return 0.5 - 0.5 * math.sqrt(max(0.0, 1.0 - math.exp(-1.5 * t)))


def rf_channel(t: float) -> KrausChannel:
    """Pauli channel realising the interaction-picture Bloch contraction."""
    lx, ly, lz = math.exp(-t / 2), math.exp(-0.75 * t), math.exp(-0.75 * t)
    probs = np.array([1 + lx + ly + lz, 1 + lx - ly - lz, 1 - lx + ly - lz, 1 - lx - ly + lz]) / 4
    ops = [np.eye(2), PAULI_X, PAULI_Y, PAULI_Z]
    return KrausChannel(np.array([math.sqrt(max(p, 0.0)) * o for p, o in zip(probs, ops)]))
