"""Quantum probability layer: CP unital maps in the Heisenberg picture,
finite POVMs and classical systems embedded as diagonal algebras.

Kraus convention
----------------
A channel ``T`` maps observables on the *input* space (dimension
``in_dim``, where the pointer lives) to observables on the *output* space
(dimension ``out_dim``, where the measured system lives)::

    T(B) = sum_i V_i^dag B V_i,     V_i : C^out_dim -> C^in_dim

so each Kraus matrix has shape ``(in_dim, out_dim)``. The Schrodinger dual
sends a state on the output space to ``sum_i V_i rho V_i^dag`` on the input
space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import get_tolerances
from .qmat import DimensionError, as_hermitian, as_matrix, ket, spectral_projectors


SUPEROP_MAX = 256


class ValidationError(ValueError):
    """A channel or POVM violates its defining invariants."""


@dataclass(frozen=True)
class KrausChannel:
    """Unital CP map ``B -> sum V_i^dag B V_i``.

    Parameters
    ----------
    kraus : ndarray, shape (k, in_dim, out_dim)
        Kraus matrices.
    check : bool
        Verify unitality on construction.
    """

    kraus: np.ndarray
    check: bool = field(default=True, repr=False, compare=False)
    kraus_h: np.ndarray = field(init=False, repr=False, compare=False)
    _superop: np.ndarray | None = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        k = np.asarray(self.kraus, dtype=complex)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3 or k.shape[0] < 1:
            raise DimensionError("kraus must have shape (k, in_dim, out_dim)")
        if not np.all(np.isfinite(k)):
            raise ValidationError("non-finite Kraus entries")
        k = k.copy()
        k.setflags(write=False)
        object.__setattr__(self, "kraus", k)
        kh = k.conj().transpose(0, 2, 1).copy()
        kh.setflags(write=False)
        object.__setattr__(self, "kraus_h", kh)
        sup = None
        if k.shape[1] * k.shape[2] <= SUPEROP_MAX:
            # Liouville matrix of the Schrodinger map in row-major vec convention
            sup = np.einsum("kac,kbd->abcd", k, k.conj()).reshape(k.shape[1] ** 2, k.shape[2] ** 2)
        object.__setattr__(self, "_superop", sup)
        if self.check:
            err = self.unitality_error()
            if err > get_tolerances().unital:
                raise ValidationError(f"channel is not unital (error {err:.3e})")

    @property
    def in_dim(self) -> int:
        return self.kraus.shape[1]

    @property
    def out_dim(self) -> int:
        return self.kraus.shape[2]

    @property
    def kraus_count(self) -> int:
        return self.kraus.shape[0]

    def unitality_error(self) -> float:
        s = np.einsum("kio,kip->op", self.kraus.conj(), self.kraus)
        return float(np.max(np.abs(s - np.eye(self.out_dim))))

    def __call__(self, b) -> np.ndarray:
        return heisenberg_apply(self, b)


def heisenberg_apply(t: KrausChannel, b) -> np.ndarray:
    """``T(B) = sum V_i^dag B V_i`` (B may carry leading batch axes)."""
    b = np.asarray(b, dtype=complex)
    if b.shape[-2:] != (t.in_dim, t.in_dim):
        raise DimensionError(f"operator shape {b.shape[-2:]} != input dim {t.in_dim}")
    if t._superop is not None:
        flat = b.reshape(b.shape[:-2] + (t.in_dim**2,)) @ t._superop.conj()
        return flat.reshape(b.shape[:-2] + (t.out_dim, t.out_dim))
    return (t.kraus_h @ b[..., None, :, :] @ t.kraus).sum(axis=-3)


def schrodinger_apply(t: KrausChannel, rho) -> np.ndarray:
    """Dual action ``rho -> sum V_i rho V_i^dag`` (batched over leading axes)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (t.out_dim, t.out_dim):
        raise DimensionError(f"state shape {rho.shape[-2:]} != output dim {t.out_dim}")
    if t._superop is not None:
        flat = rho.reshape(rho.shape[:-2] + (t.out_dim**2,)) @ t._superop.T
        return flat.reshape(rho.shape[:-2] + (t.in_dim, t.in_dim))
    return (t.kraus @ rho[..., None, :, :] @ t.kraus_h).sum(axis=-3)


def choi_matrix(t: KrausChannel) -> np.ndarray:
    """Choi matrix ``sum_ab |a><b| (x) T(|a><b|)`` of the Heisenberg map."""
    # Choi vectors: w_k = sum_a |a> (x) V_k^dag |a>
    vecs = t.kraus.conj().reshape(t.kraus_count, t.in_dim * t.out_dim)
    return np.einsum("ki,kj->ij", vecs, vecs.conj())


def is_completely_positive(t: KrausChannel, tol: float | None = None) -> bool:
    tol = get_tolerances().choi if tol is None else tol
    c = choi_matrix(t)
    return bool(np.linalg.eigvalsh(0.5 * (c + c.conj().T))[0] >= -tol)


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel(np.eye(dim, dtype=complex)[None])


def unitary_channel(u) -> KrausChannel:
    """``B -> U^dag B U``."""
    return KrausChannel(as_matrix(u)[None])


def compose(t1: KrausChannel, t2: KrausChannel) -> KrausChannel:
    """Heisenberg composition ``X -> T1(T2(X))``."""
    if t1.in_dim != t2.out_dim:
        raise DimensionError("compose: T1 input must equal T2 output")
    k = np.einsum("jab,ibc->jiac", t2.kraus, t1.kraus)
    return KrausChannel(k.reshape(-1, t2.in_dim, t1.out_dim))


def tensor_channel(t1: KrausChannel, t2: KrausChannel) -> KrausChannel:
    """``T1 (x) T2`` acting on ``B1 (x) B2``."""
    k = np.einsum("iab,jcd->ijacbd", t1.kraus, t2.kraus)
    return KrausChannel(
        k.reshape(t1.kraus_count * t2.kraus_count, t1.in_dim * t2.in_dim, t1.out_dim * t2.out_dim)
    )


def mix_channels(weights: Sequence[float], channels: Sequence[KrausChannel]) -> KrausChannel:
    """Convex combination of channels with equal dimensions."""
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
        raise ValueError("weights must be a probability vector")
    parts = [np.sqrt(wi) * c.kraus for wi, c in zip(w, channels) if wi > 0]
    return KrausChannel(np.concatenate(parts, axis=0))


def random_channel(in_dim: int, out_dim: int, kraus_count: int, seed) -> KrausChannel:
    """Random unital CP map from Gaussian Kraus matrices.

    Draws complex Gaussian ``G_i`` and sets ``V_i = G_i S^{-1/2}`` with
    ``S = sum G_i^dag G_i``, which makes ``sum V_i^dag V_i = 1`` exactly.
    """
    if min(in_dim, out_dim, kraus_count) < 1:
        raise ValueError("dimensions and kraus_count must be >= 1")
    if kraus_count * in_dim < out_dim:
        raise ValueError("unital map needs kraus_count * in_dim >= out_dim")
    rng = np.random.default_rng(seed)
    shape = (kraus_count, in_dim, out_dim)
    g = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    s = np.einsum("kio,kip->op", g.conj(), g)
    w, u = np.linalg.eigh(s)
    s_inv_half = (u / np.sqrt(w)) @ u.conj().T
    return KrausChannel(g @ s_inv_half)


def restrict_to_system(t: KrausChannel, sys_dim: int) -> KrausChannel:
    """Restriction ``R(X) = T(X (x) 1)`` of a map on system (x) ancilla.

    The input space of ``t`` is ordered system first, ancilla second.
    """
    if t.in_dim % sys_dim:
        raise DimensionError("input dimension is not a multiple of sys_dim")
    anc = t.in_dim // sys_dim
    v = t.kraus.reshape(t.kraus_count, sys_dim, anc, t.out_dim)
    k = v.transpose(0, 2, 1, 3).reshape(t.kraus_count * anc, sys_dim, t.out_dim)
    return KrausChannel(k)


def embed_pointer(b, sys_dim: int) -> np.ndarray:
    """``1 (x) B`` for a pointer on the ancilla factor."""
    return np.kron(np.eye(sys_dim), as_hermitian(b))


@dataclass(frozen=True)
class FinitePovm:
    """Finite POVM with real outcome labels."""

    elements: tuple
    labels: tuple

    def __post_init__(self):
        els = tuple(as_hermitian(e) for e in self.elements)
        if len(els) != len(self.labels) or not els:
            raise ValidationError("need one label per element")
        dim = els[0].shape[0]
        tol = get_tolerances().psd
        for e in els:
            if e.shape != (dim, dim):
                raise DimensionError("POVM elements must share a dimension")
            if np.linalg.eigvalsh(e)[0] < -tol:
                raise ValidationError("POVM element is not positive")
        if np.max(np.abs(sum(els) - np.eye(dim))) > tol:
            raise ValidationError("POVM elements do not sum to the identity")
        object.__setattr__(self, "elements", els)
        object.__setattr__(self, "labels", tuple(float(x) for x in self.labels))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def probabilities(self, rho) -> np.ndarray:
        return np.array([np.trace(rho @ e).real for e in self.elements])


def povm_from_channel(t: KrausChannel, b) -> FinitePovm:
    """Distill ``E(w) = T(1_{w}(B))`` from a channel and a pointer on its input."""
    values, projs = spectral_projectors(b)
    return FinitePovm(tuple(heisenberg_apply(t, p) for p in projs), tuple(values))


@dataclass(frozen=True)
class ClassicalSystem:
    """Outcome set of size ``k`` realised as the diagonal ``k x k`` algebra."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("classical system needs at least one outcome")

    def embed(self, f: Sequence[float]) -> np.ndarray:
        """Function on the outcomes as a diagonal matrix."""
        f = np.asarray(f, dtype=complex)
        if f.shape != (self.k,):
            raise DimensionError("function length must equal k")
        return np.diag(f)

    def indicator(self, outcome: int) -> np.ndarray:
        return np.diag(ket(outcome, self.k))


def measurement_channel(povm: Sequence[np.ndarray]) -> KrausChannel:
    """Heisenberg map ``F -> sum_w F_ww E_w`` from outcome functions to a POVM.

    Parameters
    ----------
    povm : sequence of ndarray
        Positive elements summing to the identity on ``C^d``.
    """
    els = [as_hermitian(e) for e in povm]
    k = len(els)
    ops = []
    for w, e in enumerate(els):
        lam, vec = np.linalg.eigh(e)
        for l, v in zip(lam, vec.T):
            if l > 1e-15:
                ops.append(np.sqrt(l) * np.outer(ket(w, k), v.conj()))
    return KrausChannel(np.array(ops))


def preparation_channel(states: Sequence[np.ndarray]) -> KrausChannel:
    """Heisenberg map ``X -> sum_w tr(sigma_w X) |w><w|`` onto a classical system."""
    sts = [as_hermitian(s) for s in states]
    k = len(sts)
    ops = []
    for w, s in enumerate(sts):
        lam, vec = np.linalg.eigh(s)
        for l, v in zip(lam, vec.T):
            if l > 1e-15:
                ops.append(np.sqrt(l) * np.outer(v, ket(w, k).conj()))
    return KrausChannel(np.array(ops))
