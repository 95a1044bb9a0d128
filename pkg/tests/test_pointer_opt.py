import math

import numpy as np
import pytest
from scipy.integrate import quad

from qmeasure import pointer_opt as po

SQRT2PI = math.sqrt(2 * math.pi)


def _erf_series(x, terms=80):
    # Maclaurin series, exact enough for |x| <= 2
    s = sum((-1) ** k * x ** (2 * k + 1) / (math.factorial(k) * (2 * k + 1)) for k in range(terms))
    return 2 / math.sqrt(math.pi) * s


def _I_quad(eps):
    return quad(lambda y: math.exp(-y * y / 2) / (y * y + eps), -np.inf, np.inf, epsabs=1e-13, epsrel=1e-13)[0]


def _J_quad(eps):
    return quad(lambda y: math.exp(-y * y / 2) / (y * y + eps) ** 2, -np.inf, np.inf, epsabs=1e-13, epsrel=1e-13)[0]


def test_erf_examples():
    assert po.erf(0.0) == 0.0
    assert po.erf(1.0) == pytest.approx(_erf_series(1.0), rel=1e-13)
    assert po.erf(1.0) == pytest.approx(0.8427007929, abs=1e-10)
    for x in np.linspace(0.1, 6, 25):
        assert po.erf(-x) == -po.erf(x)


def test_I_J_against_quadrature():
    assert po.I_eps(1.0) == pytest.approx(_I_quad(1.0), abs=1e-12)
    assert po.I_eps(1.0) == pytest.approx(1.6434, abs=2e-4)  # quoted value is 1.643545 to 6 places
    for eps in np.geomspace(0.05, 10, 15):
        assert po.I_eps(eps) == pytest.approx(_I_quad(eps), abs=1e-9)
        assert po.J_eps(eps) == pytest.approx(_J_quad(eps), abs=1e-9)
        assert 2 * eps * po.J_eps(eps) - (1 - eps) * po.I_eps(eps) == pytest.approx(SQRT2PI, rel=1e-14)


def test_I_closed_form_matches_erf_form():
    for eps in (0.2, 1.0, 3.0):
        direct = math.pi * math.sqrt(math.exp(eps) / eps) * (1 - math.erf(math.sqrt(eps / 2)))
        assert po.I_eps(eps) == pytest.approx(direct, rel=1e-12)


def test_I_requires_positive():
    with pytest.raises(ValueError):
        po.I_eps(0.0)
    with pytest.raises(ValueError):
        po.J_eps(-1.0)


def test_C1_from_I():
    c1 = po.pointer_constants("x", 0.605)["C1"]
    assert c1 == pytest.approx(2.359, abs=5e-3)


@pytest.mark.parametrize("bloch", [(0, 0, 0), (1, 0, 0), (0, 0, 1), (-0.3, 0.4, -0.5)])
@pytest.mark.parametrize("t", [0.5, 2.0, math.inf])
def test_density_moments(bloch, t):
    beta = po.beta_t(t)
    q = lambda y: float(po.density_q(y, t, bloch))
    kw = {"epsabs": 1e-12, "epsrel": 1e-12}
    assert quad(q, -np.inf, np.inf, **kw)[0] == pytest.approx(1.0, abs=1e-10)
    assert quad(lambda y: y * q(y), -np.inf, np.inf, **kw)[0] == pytest.approx(beta * bloch[0], abs=1e-10)
    second = quad(lambda y: (y * y - 1) * q(y), -np.inf, np.inf, **kw)[0]
    assert second == pytest.approx(beta**2 * (bloch[2] + 1), abs=1e-10)


def test_density_rejects_bad_time():
    with pytest.raises(ValueError):
        po.density_p(0.0, 0.0)


def test_naive_examples():
    s2, st2 = po.naive_qualities(2.513)
    assert s2 == pytest.approx(2.228, abs=1e-3)
    assert st2 == pytest.approx(8.836, abs=1e-3)
    assert math.sqrt(s2 * st2) == pytest.approx(4.437, abs=1e-3)
    opt = po.naive_minimum()
    assert opt.t_sigma == pytest.approx(2.513, abs=1e-3)
    assert opt.t_sigma_tilde == pytest.approx(2.513, abs=1e-3)
    assert po.naive_qualities(200.0)[0] > 40


def test_simple_pointer_limits():
    lin, quad_ = po.simple_pointer_qualities(math.inf)
    assert math.sqrt(lin) == pytest.approx(math.sqrt(2))
    assert math.sqrt(quad_) == pytest.approx(math.sqrt(6))
    assert po.simple_pointer_qualities(2.513)[0] == pytest.approx(1 + 1 / (1 - math.exp(-2.513)), abs=1e-12)
    assert po.simple_pointer_qualities(2.513)[0] == pytest.approx(2.089, abs=1e-3)


@pytest.mark.parametrize("t", [1.0, 3.0, math.inf])
def test_simple_pointers_against_quadrature(t):
    lin, qd = po.simple_pointer_qualities(t)
    ql = po.quadrature_quality(po.linear_pointer(t))
    qq = po.quadrature_quality(po.quadratic_pointer(t))
    assert max(ql.d1, ql.d2) == pytest.approx(lin, abs=1e-8)
    assert max(qq.d1, qq.d2) == pytest.approx(qd, abs=1e-8)
    assert po.unbiasedness_check(po.quadratic_pointer(t)) <= 1e-8


def test_d1_d2_examples():
    qx = po.d1_d2("x", 0.605)
    assert qx.d1 == pytest.approx(0.470, abs=1e-3) and qx.d2 == pytest.approx(0.470, abs=1e-3)
    qz = po.d1_d2("z", 2.701)
    assert qz.d1 == pytest.approx(2.373, abs=1e-3) and qz.d2 == pytest.approx(2.373, abs=1e-3)


@pytest.mark.parametrize("target", ["x", "z"])
@pytest.mark.parametrize("eps", [0.1, 0.2, 0.605, 1.0, 2.0, 5.0])
@pytest.mark.parametrize("t", [0.7, math.inf])
def test_closed_forms_match_quadrature(target, eps, t):
    closed = po.d1_d2(target, eps, t)
    oracle = po.quadrature_quality(po.rational_pointer(target, eps, t))
    assert closed.d1 == pytest.approx(oracle.d1, abs=1e-6)
    assert closed.d2 == pytest.approx(oracle.d2, abs=1e-6)


def test_optimize_x():
    opt = po.optimize_pointer("x")
    assert opt.param == pytest.approx(0.605, abs=5e-3)
    assert opt.pointer.constants["C1"] == pytest.approx(2.359, abs=5e-3)
    assert opt.quality.sigma == pytest.approx(0.685, abs=3e-3)
    assert abs(opt.quality.d1 - opt.quality.d2) <= 1e-5
    assert po.unbiasedness_check(opt.pointer) <= 1e-8


def test_optimize_z():
    opt = po.optimize_pointer("z")
    assert opt.param == pytest.approx(2.701, abs=1e-2)
    assert opt.pointer.constants["C2"] == pytest.approx(-21.649, abs=5e-2)
    assert opt.pointer.constants["C3"] == pytest.approx(5.391, abs=1e-2)
    assert opt.quality.sigma == pytest.approx(1.540, abs=3e-3)
    assert abs(opt.quality.d1 - opt.quality.d2) <= 1e-5
    assert po.unbiasedness_check(opt.pointer) <= 1e-8


def test_optimum_product():
    p = po.optimize_pointer("x").quality.sigma * po.optimize_pointer("z").quality.sigma
    assert p == pytest.approx(1.056, abs=5e-3)


def test_finite_time_scaling_of_C1():
    t = 2.0
    c_inf = po.pointer_constants("x", 0.6)["C1"]
    c_t = po.pointer_constants("x", 0.6, t)["C1"]
    assert c_t == pytest.approx(c_inf / po.beta_t(t))


def test_bracketing_failure():
    with pytest.raises(RuntimeError):
        po.optimize_pointer("x", lo=2.0, hi=10.0)


def test_unbiasedness_examples():
    assert po.unbiasedness_check(po.linear_pointer(1.5)) <= 1e-10
    pointer = po.rational_pointer("x", 0.605)
    c = dict(pointer.constants)
    c["C1"] *= 1.1
    wrong = po.PointerDef("rational", "x", math.inf, c)
    assert po.unbiasedness_check(wrong) == pytest.approx(0.1, abs=1e-8)


def test_pointer_spec_guards():
    with pytest.raises(ValueError):
        po.PointerDef("rational", "x", math.inf, {"C1": 1.0, "eps": 0.0})
    with pytest.raises(ValueError):
        po.PointerDef("cubic", "x", math.inf)
    with pytest.raises(ValueError):
        po.PointerDef("rational", "x", math.inf, {"C1": math.inf, "eps": 1.0})


@pytest.mark.parametrize("target", ["x", "z"])
def test_output_density_normalization_and_mean(target):
    pointer = po.optimize_pointer(target).pointer
    lo, hi = po.support(pointer)
    for bloch in po.CANONICAL_STATES[target]:
        f = lambda x: po.output_density(pointer, bloch, [x])[0]
        pts = [0.0] if target == "x" else None
        norm = quad(f, lo, hi, limit=400, points=pts)[0]
        mean = quad(lambda x: x * f(x), lo, hi, limit=400, points=pts)[0]
        assert norm == pytest.approx(1.0, abs=1e-6)
        assert mean == pytest.approx(bloch[0] if target == "x" else bloch[2], abs=1e-6)


def test_output_density_support():
    pointer = po.optimize_pointer("x").pointer
    lo, hi = po.support(pointer)
    assert hi == pytest.approx(2.359 / (2 * math.sqrt(0.605)), abs=2e-3)
    assert hi == pytest.approx(1.516, abs=1e-3)
    vals = po.output_density(pointer, (0, 0, 0), [lo - 0.1, hi + 0.1, lo, hi])
    assert vals[0] == 0.0 and vals[1] == 0.0
    assert np.all(np.isfinite(vals[2:])) and np.all(vals[2:] > 0)


def test_output_density_requires_rational():
    with pytest.raises(ValueError):
        po.output_density(po.linear_pointer(), (0, 0, 0), [0.0])
