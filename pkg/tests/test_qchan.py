import numpy as np
import pytest

from qmeasure.dynamics_examples import repeated_cnot_channel
from qmeasure.qbounds import sharp_family
from qmeasure.qchan import (
    ClassicalSystem,
    FinitePovm,
    KrausChannel,
    ValidationError,
    choi_matrix,
    compose,
    embed_pointer,
    heisenberg_apply,
    identity_channel,
    is_completely_positive,
    measurement_channel,
    mix_channels,
    povm_from_channel,
    preparation_channel,
    random_channel,
    restrict_to_system,
    schrodinger_apply,
    tensor_channel,
    unitary_channel,
)
from qmeasure.qmat import PAULI_X, PAULI_Z, bloch_to_density, density_to_bloch, random_unitary


def test_unitary_conjugation():
    u = random_unitary(3, np.random.default_rng(0))
    b = np.diag([1.0, 2.0, -1.0])
    assert np.allclose(heisenberg_apply(unitary_channel(u), b), u.conj().T @ b @ u)


def test_von_neumann_transfer():
    t, b = sharp_family(0.0)
    assert np.allclose(heisenberg_apply(t, embed_pointer(b, 2)), PAULI_Z)


def test_sharp_transfer_unbiased():
    t, b = sharp_family(0.25)
    assert np.allclose(heisenberg_apply(t, embed_pointer(b, 2)), PAULI_Z, atol=1e-14)


def test_restriction_collapses_bloch_ball():
    t, _ = sharp_family(0.0)
    r = restrict_to_system(t, 2)
    out = density_to_bloch(schrodinger_apply(r, bloch_to_density([0.3, -0.4, 0.5])))
    assert np.allclose(out, [0, 0, 0.5])


@pytest.mark.parametrize("p", [0.1, 0.25, 0.4])
def test_sharp_restriction_shrinks_equator(p):
    r = restrict_to_system(sharp_family(p)[0], 2)
    v = np.array([0.3, -0.4, 0.5])
    s = 2 * np.sqrt(p * (1 - p))
    out = density_to_bloch(schrodinger_apply(r, bloch_to_density(v)))
    assert np.allclose(out, [s * 0.3, -s * 0.4, 0.5], atol=1e-14)


def test_identity_channel_schrodinger():
    rho = bloch_to_density([0.1, 0.2, 0.3])
    assert np.allclose(schrodinger_apply(identity_channel(2), rho), rho)


def test_povm_examples():
    t, b = sharp_family(0.0)
    povm = povm_from_channel(t, embed_pointer(b, 2))
    assert np.allclose(povm.elements[0], np.diag([0, 1])) and np.allclose(povm.elements[1], np.diag([1, 0]))
    assert povm.labels == (-1.0, 1.0)
    trivial = povm_from_channel(t, np.eye(4))
    assert len(trivial.elements) == 1 and np.allclose(trivial.elements[0], np.eye(2))
    t, b = sharp_family(0.25)
    povm = povm_from_channel(t, embed_pointer(b, 2))
    assert np.allclose(povm.elements[1], np.diag([0.75, 0.25]))
    assert np.allclose(povm.elements[0], np.diag([0.25, 0.75]))


def test_povm_validation():
    with pytest.raises(ValidationError):
        FinitePovm((np.eye(2) * 0.5,), (1.0,))
    with pytest.raises(ValidationError):
        FinitePovm((np.diag([1.5, 0.5]), np.diag([-0.5, 0.5])), (0, 1))


def test_compose_with_identity():
    t = random_channel(2, 3, 2, seed=4)
    tc = compose(t, identity_channel(2))
    b = np.arange(4).reshape(2, 2) + 1j
    assert np.allclose(heisenberg_apply(tc, b), heisenberg_apply(t, b))


def test_tensor_of_unitaries():
    rng = np.random.default_rng(1)
    u, v = random_unitary(2, rng), random_unitary(3, rng)
    b = rng.standard_normal((6, 6))
    lhs = heisenberg_apply(tensor_channel(unitary_channel(u), unitary_channel(v)), b)
    rhs = heisenberg_apply(unitary_channel(np.kron(u, v)), b)
    assert np.allclose(lhs, rhs)


def test_repeated_readout_outcomes_agree():
    t = repeated_cnot_channel()
    p = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    rho = bloch_to_density([0.4, 0.2, 0.1])
    disagree = sum(
        np.trace(rho @ heisenberg_apply(t, np.kron(np.kron(np.eye(2), p[a]), p[1 - a]))).real for a in (0, 1)
    )
    assert disagree == pytest.approx(0.0, abs=1e-14)


def test_random_channel_deterministic_and_unital():
    a, b = random_channel(2, 2, 1, seed=9), random_channel(2, 2, 1, seed=9)
    assert np.array_equal(a.kraus, b.kraus)
    assert a.unitality_error() <= 1e-10
    for seed in range(1000):
        din, dout = 2 + seed % 3, 2 + seed % 2
        t = random_channel(din, dout, max(1 + seed % 3, -(-dout // din)), seed)
        assert t.unitality_error() <= 1e-10


def test_random_channel_needs_enough_kraus():
    with pytest.raises(ValueError):
        random_channel(2, 4, 1, seed=0)


def test_non_unital_rejected():
    with pytest.raises(ValidationError):
        KrausChannel(np.array([np.diag([1.0, 0.5])]))
    with pytest.raises(ValidationError):
        KrausChannel(np.array([[[np.nan, 0], [0, 1]]]))


def test_mix_channels_weights():
    t = random_channel(2, 2, 2, seed=1)
    with pytest.raises(ValueError):
        mix_channels([0.5, 0.6], [t, t])
    m = mix_channels([0.3, 0.7], [t, identity_channel(2)])
    assert np.allclose(heisenberg_apply(m, PAULI_X), 0.3 * heisenberg_apply(t, PAULI_X) + 0.7 * PAULI_X)


def test_choi_positive():
    t = random_channel(3, 2, 2, seed=3)
    assert is_completely_positive(t)
    assert np.linalg.eigvalsh(choi_matrix(t))[0] >= -1e-9


def test_branch_offdiagonals_vanish():
    # branches that each annihilate the other's input leave no cross term
    rng = np.random.default_rng(5)
    psi0, psi1 = np.eye(3)[:, 0], np.eye(3)[:, 1]
    k0 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    k0[:, 1] = 0
    k1 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    k1[:, 0] = 0
    cross = np.outer(psi0, psi1)
    for k in (k0, k1):
        assert np.allclose(k @ cross @ k.conj().T, 0, atol=1e-10)


def test_classical_coding_channels():
    c = measurement_channel([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    d = preparation_channel([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    f = ClassicalSystem(2).embed([2.0, -1.0])
    assert np.allclose(heisenberg_apply(c, f), np.diag([2.0, -1.0]))
    assert np.allclose(heisenberg_apply(d, PAULI_X), 0)
    assert np.allclose(ClassicalSystem(3).indicator(1), np.diag([0, 1, 0]))
