import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from qmeasure import lan_est as le
from qmeasure import pointer_opt as po
from qmeasure import qchan, qmat, qmetrics

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 4)


@st.composite
def channels(draw):
    i, o = draw(dims), draw(dims)
    k = draw(st.integers(-(-o // i), 4))
    return qchan.random_channel(i, o, k, draw(seeds))


def _rand_op(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def _rand_state(rng, d):
    g = _rand_op(rng, d)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@settings(max_examples=60, deadline=None)
@given(channels(), seeds)
def test_sesquilinear_cauchy_schwarz(t, seed):
    rng = np.random.default_rng(seed)
    x, y = _rand_op(rng, t.in_dim), _rand_op(rng, t.in_dim)
    xx = qmetrics.sesquilinear_form(t, x, x)
    yy = qmetrics.sesquilinear_form(t, y, y)
    xy = qmetrics.sesquilinear_form(t, x, y)
    assert np.linalg.eigvalsh((xx + xx.conj().T) / 2).min() >= -1e-9
    assert qmat.op_norm(xx) * qmat.op_norm(yy) - qmat.op_norm(xy) ** 2 >= -1e-9


@settings(max_examples=60, deadline=None)
@given(channels())
def test_unital_and_choi_positive(t):
    assert t.unitality_error() <= 1e-10
    assert np.allclose(t(np.eye(t.in_dim)), np.eye(t.out_dim), atol=1e-10)
    assert np.linalg.eigvalsh(qchan.choi_matrix(t)).min() >= -1e-9


@settings(max_examples=60, deadline=None)
@given(channels(), seeds)
def test_adjoint_duality(t, seed):
    rng = np.random.default_rng(seed)
    rho, b = _rand_state(rng, t.out_dim), _rand_op(rng, t.in_dim)
    lhs = np.trace(rho @ qchan.heisenberg_apply(t, b))
    rhs = np.trace(qchan.schrodinger_apply(t, rho) @ b)
    assert abs(lhs - rhs) <= 1e-10 * (1 + abs(lhs))
    assert abs(np.trace(qchan.schrodinger_apply(t, rho)) - 1) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(dims, dims, dims, seeds)
def test_composition_stays_unital(a, b, c, seed):
    t2 = qchan.random_channel(a, b, -(-b // a), seed)
    t1 = qchan.random_channel(b, c, -(-c // b) + 1, seed + 1)
    t = qchan.compose(t1, t2)
    assert (t.in_dim, t.out_dim) == (a, c)
    assert t.unitality_error() <= 1e-9


@settings(max_examples=60, deadline=None)
@given(dims, dims, seeds)
def test_partial_trace_of_product(d1, d2, seed):
    rng = np.random.default_rng(seed)
    a, b = _rand_state(rng, d1), _rand_state(rng, d2)
    ab = qmat.tensor(a, b)
    assert np.allclose(qmat.partial_trace(ab, [d1, d2], [0]), a, atol=1e-12)
    assert np.allclose(qmat.partial_trace(ab, [d1, d2], [1]), b, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), seeds)
def test_norms_match_eigenvalues(d, seed):
    h = qmat.random_hermitian(d, np.random.default_rng(seed))
    w = np.linalg.eigvalsh(h)
    assert abs(qmat.op_norm(h) - np.abs(w).max()) <= 1e-10 * (1 + np.abs(w).max())
    assert abs(qmat.trace_norm(h) - np.abs(w).sum()) <= 1e-10 * (1 + np.abs(w).sum())


ball = st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda r: np.dot(r, r) <= 1)


@settings(max_examples=25, deadline=None)
@given(ball, st.sampled_from([0.5, 2.0, np.inf]))
def test_pointer_density_normalized(bloch, t):
    mass = quad(lambda y: po.density_q(y, t, bloch), -np.inf, np.inf)[0]
    assert abs(mass - 1) <= 1e-8


@settings(max_examples=25, deadline=None)
@given(ball)
def test_bloch_roundtrip(r):
    rho = qmat.bloch_to_density(r)
    assert np.linalg.eigvalsh(rho).min() >= -1e-12
    assert np.allclose(qmat.density_to_bloch(rho), r, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 500), st.integers(0, 7))
def test_uniforms_determined_by_seed(seed, count, draw):
    from qmeasure import kernels

    a = kernels.uniforms(seed, 0, count, draw)
    assert np.array_equal(a, kernels.uniforms(seed, 0, count, draw))
    assert np.all((a > 0) & (a < 1))


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_run_trials_determined_by_seed(seed):
    cfg = le.EstimationConfig(n=1000, trials=500, seed=seed, mode="exact")
    assert le.run_trials(cfg) == le.run_trials(cfg, threads=3)
