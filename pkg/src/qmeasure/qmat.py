"""Dense complex matrix helpers: Hermitian algebra, tensor products,
partial traces, spectra and norms.

Matrices are plain ``numpy`` arrays. ``as_hermitian`` and ``as_density``
validate and symmetrize them so downstream code can assume the invariants.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .config import get_tolerances

MAX_DIM = 4096

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class DimensionError(ValueError):
    """Raised when operand shapes are incompatible."""


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def as_hermitian(m, tol: float | None = None) -> np.ndarray:
    """Validate a Hermitian matrix and return its symmetrized copy.

    Parameters
    ----------
    m : array_like
        Square complex matrix.
    tol : float, optional
        Relative Hermiticity tolerance; defaults to the configured ``herm``.

    Raises
    ------
    ValueError
        If ``m`` deviates from ``m^dag`` by more than ``tol * max(1, |m|)``.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError("Hermitian operator must be square")
    tol = get_tolerances().herm if tol is None else tol
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.conj().T)) > tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return 0.5 * (a + a.conj().T)


def as_density(m) -> np.ndarray:
    """Validate a density matrix (Hermitian, positive, unit trace)."""
    tol = get_tolerances()
    rho = as_hermitian(m)
    if abs(np.trace(rho).real - 1.0) > tol.trace:
        raise ValueError("density matrix must have unit trace")
    if np.linalg.eigvalsh(rho)[0] < -tol.psd:
        raise ValueError("density matrix must be positive semidefinite")
    return rho


def bloch_to_density(r: Sequence[float]) -> np.ndarray:
    """Qubit state ``(1 + r . sigma) / 2``."""
    x, y, z = (float(v) for v in r)
    return 0.5 * (PAULI_I + x * PAULI_X + y * PAULI_Y + z * PAULI_Z)


def density_to_bloch(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.array([np.trace(rho @ s).real for s in (PAULI_X, PAULI_Y, PAULI_Z)])


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def tensor(*ops) -> np.ndarray:
    """Kronecker product of one or more matrices."""
    if not ops:
        raise DimensionError("tensor needs at least one operand")
    out = as_matrix(ops[0])
    for b in ops[1:]:
        out = np.kron(out, as_matrix(b))
    return out


def partial_trace(m, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every tensor factor not listed in ``keep``.

    Parameters
    ----------
    m : array_like
        Square matrix on the product space ``dims[0] x dims[1] x ...``.
    dims : sequence of int
        Factor dimensions.
    keep : sequence of int
        Indices of factors to retain, in their original order.

    Returns
    -------
    numpy.ndarray
        Reduced matrix on the kept factors.
    """
    a = as_matrix(m)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if a.shape != (total, total):
        raise DimensionError(f"matrix shape {a.shape} does not match dims {dims}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError("keep index out of range")
    nf = len(dims)
    t = a.reshape(dims + dims)
    # trace out from the last factor so axis numbers stay valid
    for f in reversed(range(nf)):
        if f in keep:
            continue
        cur = t.ndim // 2
        t = np.trace(t, axis1=f, axis2=f + cur)
    kd = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(kd, kd)


def eig_hermitian(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order with orthonormal eigenvector columns."""
    h = as_hermitian(h)
    if h.shape[0] > MAX_DIM:
        raise DimensionError(f"dimension {h.shape[0]} exceeds cap {MAX_DIM}")
    w, v = np.linalg.eigh(h)
    return w[::-1].copy(), v[:, ::-1].copy()


def op_norm(m) -> float:
    """Largest singular value."""
    a = as_matrix(m)
    return float(np.linalg.norm(a, 2))


def trace_norm(m) -> float:
    """Sum of singular values."""
    a = as_matrix(m)
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def herm_norm(h: np.ndarray) -> float:
    """Operator norm of a Hermitian matrix (batched over leading axes)."""
    w = np.linalg.eigvalsh(h)
    return np.max(np.abs(w), axis=-1)


def commutator(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise DimensionError("commutator needs square matrices of equal size")
    return a @ b - b @ a


def dagger(m) -> np.ndarray:
    return np.asarray(m).conj().T


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with phase correction."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (z + z.conj().T)


def spectral_projectors(h, tol: float = 1e-9) -> tuple[np.ndarray, list[np.ndarray]]:
    """Distinct eigenvalues (ascending) and the matching spectral projectors.

    Eigenvalues closer than ``tol`` (relative to the spectral radius) are
    merged into one eigenspace.
    """
    h = as_hermitian(h)
    w, v = np.linalg.eigh(h)
    scale = max(1.0, float(np.max(np.abs(w))))
    groups: list[list[int]] = []
    for i, lam in enumerate(w):
        if groups and abs(lam - w[groups[-1][-1]]) <= tol * scale:
            groups[-1].append(i)
        else:
            groups.append([i])
    values = np.array([np.mean(w[g]) for g in groups])
    projs = [v[:, g] @ v[:, g].conj().T for g in groups]
    return values, projs
