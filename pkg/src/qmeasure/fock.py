"""Truncated Fock spaces: ladder operators, quadratures, coherent and
thermal states, and the two-mode beamsplitter as a joint measurement.

Unbounded operators are trusted only on a *protected* block of low levels
(``n <= n_max // 2``); norms of added variances are taken there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm
from scipy.special import gammaln

from .config import get_tolerances
from .qchan import KrausChannel, heisenberg_apply
from .qmetrics import max_added_variance
from .qmat import commutator, op_norm


@dataclass(frozen=True)
class FockSpace:
    """Basis ``|0>, ..., |n_max>``."""

    n_max: int

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @property
    def dim(self) -> int:
        return self.n_max + 1

    @property
    def protected(self) -> np.ndarray:
        """Levels on which truncated quadratures are exact."""
        return np.arange(self.n_max // 2 + 1)


def n_max_for(amplitude: float) -> int:
    """Truncation heuristic ``|z|^2 + 10|z| + 20``."""
    z = abs(amplitude)
    return int(math.ceil(z * z + 10 * z + 20))


def annihilation(space: FockSpace) -> np.ndarray:
    """``a|n> = sqrt(n)|n-1>``."""
    return np.diag(np.sqrt(np.arange(1, space.dim)), k=1).astype(complex)


def quadratures(space: FockSpace) -> tuple[np.ndarray, np.ndarray]:
    """``x = (a + a^dag)/sqrt 2`` and ``p = (a - a^dag)/(sqrt 2 i)``."""
    a = annihilation(space)
    ad = a.conj().T
    return (a + ad) / math.sqrt(2), (a - ad) / (math.sqrt(2) * 1j)


def coherent_coefficients(z: complex, n: int) -> np.ndarray:
    """``e^{-|z|^2/2} z^k / sqrt(k!)`` for ``k = 0..n-1`` (log domain)."""
    k = np.arange(n)
    if z == 0:
        c = np.zeros(n, dtype=complex)
        c[0] = 1.0
        return c
    logmag = -0.5 * abs(z) ** 2 + k * math.log(abs(z)) - 0.5 * gammaln(k + 1)
    return np.exp(logmag) * np.exp(1j * k * np.angle(z))


def coherent_tail(z: complex, space: FockSpace) -> float:
    """Probability mass beyond ``n_max``."""
    c = coherent_coefficients(z, space.dim)
    return max(0.0, 1.0 - float(np.sum(np.abs(c) ** 2)))


def coherent_vector(z: complex, space: FockSpace) -> np.ndarray:
    """Truncated coherent vector; rejects amplitudes whose tail exceeds tolerance."""
    tail = coherent_tail(z, space)
    if tail > get_tolerances().trunc:
        raise ValueError(f"coherent tail {tail:.2e} exceeds truncation tolerance")
    return coherent_coefficients(z, space.dim)


def thermal_state(p: float, space: FockSpace) -> np.ndarray:
    """``(1 - p) sum_k p^k |k><k|``, renormalized after truncation."""
    if not 0.0 <= p < 1.0:
        raise ValueError("p must lie in [0, 1)")
    w = (1 - p) * p ** np.arange(space.dim)
    if w.sum() < 1 - get_tolerances().trunc:
        raise ValueError("thermal tail exceeds truncation tolerance")
    return np.diag(w / w.sum()).astype(complex)


@lru_cache(maxsize=8)
def _number_blocks(n_max: int) -> tuple:
    """Blocks of ``K = a^dag (x) a - a (x) a^dag`` at fixed total photon number."""
    d = n_max + 1
    a = sp.diags(np.sqrt(np.arange(1, d)), 1, format="csr").astype(complex)
    k = (sp.kron(a.conj().T, a) - sp.kron(a, a.conj().T)).tocsr()
    blocks = []
    for total in range(2 * n_max + 1):
        j = np.arange(max(0, total - n_max), min(total, n_max) + 1)
        idx = j * d + (total - j)
        blocks.append((idx, k[idx][:, idx].toarray()))
    return tuple(blocks)


def beamsplitter_unitary(theta: float, space: FockSpace) -> np.ndarray:
    """``exp(theta (a^dag (x) a - a (x) a^dag))`` on the truncated two-mode space.

    The generator conserves total photon number, so the exponential is taken
    block by block; blocks with at most ``n_max`` photons are exact.
    """
    d = space.dim
    u = np.zeros((d * d, d * d), dtype=complex)
    for idx, kb in _number_blocks(space.n_max):
        u[np.ix_(idx, idx)] = expm(theta * kb)
    return u


def beamsplitter_channel(theta: float, space: FockSpace) -> KrausChannel:
    """``T(Y) = <0| U^dag Y U |0>`` with the second mode in vacuum."""
    if not 0.0 < theta < math.pi / 2:
        raise ValueError("theta must lie in (0, pi/2)")
    d = space.dim
    w = np.zeros((d * d, d), dtype=complex)
    # |m>|0> has m photons, so its image lies in block m
    for m, (idx, kb) in enumerate(_number_blocks(space.n_max)[: d]):
        col = int(np.nonzero(idx == m * d)[0][0])
        w[idx, m] = expm(theta * kb)[:, col]
    return KrausChannel(w[None])


def joint_pointers(theta: float, space: FockSpace) -> tuple[np.ndarray, np.ndarray]:
    """``B = x (x) 1 / cos(theta)`` and ``B~ = -1 (x) p / sin(theta)``."""
    x, p = quadratures(space)
    eye = np.eye(space.dim)
    return np.kron(x, eye) / math.cos(theta), -np.kron(eye, p) / math.sin(theta)


@dataclass(frozen=True)
class JointQuality:
    sigma_b: float
    sigma_bt: float
    product: float
    commutator_half_norm: float
    n_max: int


def joint_quality(theta: float, space: FockSpace | None = None) -> JointQuality:
    """Added standard deviations of the two beamsplitter pointers.

    Norms are restricted to the protected block of the output mode.
    """
    space = space or FockSpace(40)
    t = beamsplitter_channel(theta, space)
    b, bt = joint_pointers(theta, space)
    sub = space.protected
    sb = math.sqrt(max_added_variance(t, b, sub))
    st = math.sqrt(max_added_variance(t, bt, sub))
    c = commutator(heisenberg_apply(t, b), heisenberg_apply(t, bt))[np.ix_(sub, sub)]
    return JointQuality(sb, st, sb * st, 0.5 * op_norm(c), space.n_max)
