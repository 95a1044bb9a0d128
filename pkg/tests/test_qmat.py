import numpy as np
import pytest

from qmeasure.config import get_tolerances, reset_tolerances, set_tolerances
from qmeasure.fock import FockSpace, quadratures
from qmeasure.qmat import (
    MAX_DIM,
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DimensionError,
    as_density,
    as_hermitian,
    bloch_to_density,
    commutator,
    density_to_bloch,
    eig_hermitian,
    ket,
    op_norm,
    partial_trace,
    projector,
    random_hermitian,
    spectral_projectors,
    tensor,
    trace_norm,
)


def test_tensor_examples():
    assert np.array_equal(tensor(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(tensor(PAULI_Z, PAULI_Z), np.diag([1, -1, -1, 1]))
    up, dn = projector(ket(0, 2)), projector(ket(1, 2))
    assert np.array_equal(tensor(up, dn), projector(ket(1, 4)))


def test_tensor_associative():
    rng = np.random.default_rng(0)
    a, b, c = (rng.integers(-3, 4, size=(2, 2)) for _ in range(3))
    assert np.array_equal(tensor(tensor(a, b), c), tensor(a, tensor(b, c)))


def test_partial_trace_examples():
    rho, sigma = bloch_to_density([0.1, 0.2, 0.3]), bloch_to_density([0, 0, -0.5])
    assert np.allclose(partial_trace(tensor(rho, sigma), [2, 2], keep=[1]), sigma, atol=1e-14)
    bell = (ket(0, 4) + ket(3, 4)) / np.sqrt(2)
    assert np.allclose(partial_trace(projector(bell), [2, 2], keep=[0]), np.eye(2) / 2, atol=1e-15)


def test_partial_trace_three_factors():
    rng = np.random.default_rng(1)
    a, b, c = (random_hermitian(d, rng) for d in (2, 3, 2))
    got = partial_trace(tensor(a, b, c), [2, 3, 2], keep=[0, 2])
    assert np.allclose(got, np.trace(b) * tensor(a, c), atol=1e-12)


def test_eig_examples():
    w, _ = eig_hermitian(PAULI_Z)
    assert np.allclose(w, [1, -1])
    w, v = eig_hermitian(PAULI_X)
    assert np.allclose(w, [1, -1])
    assert np.isclose(abs(np.vdot(v[:, 0], [1, 1])) / np.sqrt(2), 1.0)
    assert np.allclose(eig_hermitian(np.eye(3))[0], 1.0)


def test_norm_examples():
    assert op_norm(PAULI_X) == pytest.approx(1.0)
    assert trace_norm(PAULI_X) == pytest.approx(2.0)
    assert trace_norm(np.zeros((2, 2))) == 0.0
    up, dn = projector(ket(0, 2)), projector(ket(1, 2))
    assert 0.5 * trace_norm(up - dn) == pytest.approx(1.0)


def test_commutator_examples():
    c = commutator(PAULI_X, PAULI_Z)
    assert np.allclose(c, -2j * PAULI_Y)
    assert op_norm(c) == pytest.approx(2.0)
    assert np.array_equal(commutator(PAULI_X, PAULI_X), np.zeros((2, 2)))


def test_truncated_canonical_commutator():
    space = FockSpace(40)
    x, p = quadratures(space)
    c = commutator(x, p)[:20, :20]
    assert np.allclose(c, 1j * np.eye(20), atol=1e-10)


def test_hermitian_guard():
    nearly = PAULI_X + 1e-14 * np.array([[0, 1], [0, 0]])
    h = as_hermitian(nearly)
    assert np.array_equal(h, h.conj().T)
    with pytest.raises(ValueError):
        as_hermitian(np.array([[0, 1], [0, 0]]))


def test_density_guard():
    with pytest.raises(ValueError):
        as_density(np.diag([0.7, 0.7]))
    with pytest.raises(ValueError):
        as_density(np.diag([1.2, -0.2]))
    assert np.allclose(as_density(PAULI_I / 2), PAULI_I / 2)


def test_dimension_cap():
    with pytest.raises(DimensionError):
        eig_hermitian(np.zeros((MAX_DIM + 1, MAX_DIM + 1)))
    with pytest.raises(DimensionError):
        as_hermitian(np.zeros((2, 3)))


def test_bloch_roundtrip():
    r = np.array([0.3, -0.2, 0.5])
    assert np.allclose(density_to_bloch(bloch_to_density(r)), r)


def test_spectral_projectors_merge_degenerate():
    vals, projs = spectral_projectors(np.diag([3.0, 1.0, 1.0]))
    assert np.allclose(vals, [1.0, 3.0])
    assert np.allclose(projs[0], np.diag([0, 1, 1]))
    assert np.allclose(sum(projs), np.eye(3))


def test_tolerance_overrides():
    try:
        set_tolerances(bound=1e-6)
        assert get_tolerances().bound == 1e-6
    finally:
        reset_tolerances()
    assert get_tolerances().bound == 1e-9
