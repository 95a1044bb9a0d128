"""Optimal pointers for homodyne readout of a decaying qubit.

The weighted homodyne endpoint ``Y`` has operator-valued density::

    p(y) = phi(y) (1 + beta y sigma_x + beta^2 (y^2 - 1) sigma_+ sigma_-)

with ``phi`` the standard normal density and ``beta = sqrt(1 - e^{-t})``.
A pointer ``h`` is unbiased for a target ``X`` when ``int h p = X``; its
quality is ``Sigma^2 = |int h^2 p - X^2| = |diag(d1, d2)|``. Rational
pointers ``(C1 y + C2)/(y^2 + eps) + C3`` reduce every integral to the two
functions ``I`` and ``J`` below, so the remaining free parameter is found
by a one-dimensional minimax search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

SQRT2PI = math.sqrt(2.0 * math.pi)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
SIGMA_PM = np.diag([1.0, 0.0]).astype(complex)  # sigma_+ sigma_-
QUAD_L = 10.0
CANONICAL_STATES = {
    "x": ((-1.0, 0.0, 0.0), (0.0, 0.0, 0.0), (1.0, 0.0, 0.0)),
    "z": ((0.0, 0.0, -1.0), (0.0, 0.0, 0.0), (0.0, 0.0, 1.0)),
}


def erf(x):
    """Error function ``2/sqrt(pi) int_0^x e^{-s^2} ds``."""
    return special.erf(x)


def I_eps(eps: float) -> float:
    """``int e^{-y^2/2} / (y^2 + eps) dy = pi sqrt(e^eps / eps) (1 - erf(sqrt(eps/2)))``.

    Evaluated through the scaled complementary error function so that
    large ``eps`` does not overflow.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    return math.pi / math.sqrt(eps) * float(special.erfcx(math.sqrt(eps / 2.0)))


def J_eps(eps: float) -> float:
    """``int e^{-y^2/2} / (y^2 + eps)^2 dy = (sqrt(2 pi) + (1 - eps) I) / (2 eps)``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return (SQRT2PI + (1.0 - eps) * I_eps(eps)) / (2.0 * eps)


def beta_t(t: float) -> float:
    """``sqrt(1 - e^{-t})``; ``t = inf`` gives 1."""
    if t <= 0:
        raise ValueError("t must be positive")
    return 1.0 if math.isinf(t) else math.sqrt(-math.expm1(-t))


def density_p(y, t: float = math.inf):
    """Coefficients of ``1``, ``sigma_x`` and ``sigma_+ sigma_-`` in ``p(y)``."""
    b = beta_t(t)
    y = np.asarray(y, dtype=float)
    phi = np.exp(-0.5 * y * y) / SQRT2PI
    return phi, phi * b * y, phi * b * b * (y * y - 1.0)


def density_q(y, t: float, bloch) -> np.ndarray:
    """Scalar density of ``Y`` for a qubit with Bloch vector ``(Px, Py, Pz)``."""
    px, _, pz = bloch
    w1, wx, wpm = density_p(y, t)
    return w1 + wx * px + wpm * (pz + 1.0) / 2.0


# --------------------------------------------------------------- naive

def naive_qualities(t: float) -> tuple[float, float]:
    """Added variances of the plain integrated-current pointers.

    Returns ``(Sigma^2, Sigma~^2)`` with
    ``Sigma^2 = t/(2 - 2e^{-t/2})^2 + 1`` and
    ``Sigma~^2 = t^2/(8 u^4) + (2t - 4u^2)/u^2`` where ``u = e^{-t/2} - 1``.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    u = math.expm1(-t / 2.0)
    s2 = t / (2.0 * u) ** 2 + 1.0
    st2 = t * t / (8.0 * u**4) + (2.0 * t - 4.0 * u * u) / (u * u)
    return s2, st2


@dataclass(frozen=True)
class NaiveOptimum:
    t_sigma: float
    sigma2: float
    t_sigma_tilde: float
    sigma_tilde2: float

    @property
    def product(self) -> float:
        return math.sqrt(self.sigma2 * self.sigma_tilde2)


def naive_minimum(lo: float = 0.2, hi: float = 20.0) -> NaiveOptimum:
    """Minimize both naive qualities over the interaction time."""
    opts = {"xatol": 1e-10}
    a = minimize_scalar(lambda t: naive_qualities(t)[0], bounds=(lo, hi), method="bounded", options=opts)
    b = minimize_scalar(lambda t: naive_qualities(t)[1], bounds=(lo, hi), method="bounded", options=opts)
    return NaiveOptimum(float(a.x), float(a.fun), float(b.x), float(b.fun))


def simple_pointer_qualities(t: float) -> tuple[float, float]:
    """Qualities of the linear sigma_x pointer and the quadratic sigma_z pointer.

    The linear pointer ``y / beta`` gives ``1 + beta^{-2}``. The quadratic
    pointer ``y^2/beta^2 - 1 - beta^{-2}`` is the unique unbiased even
    quadratic; its added variance follows from Gaussian moments.
    """
    b2 = beta_t(t) ** 2
    c, e = 1.0 / b2, -1.0 - 1.0 / b2
    a = 3 * c * c + 2 * c * e + e * e
    bb = b2 * (12 * c * c + 4 * c * e)
    return 1.0 + 1.0 / b2, max(a - 1.0 + bb, a - 1.0)


# ------------------------------------------------------------ pointers

@dataclass(frozen=True)
class PointerDef:
    """Post-processing function of the homodyne endpoint.

    kind ``rational``: ``(C1 y + C2)/(y^2 + eps) + C3`` with constants
    ``C1, C2, C3, eps``. kind ``linear``: ``y / beta``. kind ``quadratic``:
    ``D4 y^2 + D5 y + D6``.
    """

    kind: str
    target: str
    t: float
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("rational", "linear", "quadratic"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.target not in ("x", "z"):
            raise ValueError("target must be 'x' or 'z'")
        if self.kind == "rational" and not self.constants.get("eps", 0) > 0:
            raise ValueError("rational pointer needs eps > 0")
        if not all(math.isfinite(v) for v in self.constants.values()):
            raise ValueError("constants must be finite")

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        c = self.constants
        if self.kind == "rational":
            return (c["C1"] * y + c.get("C2", 0.0)) / (y * y + c["eps"]) + c.get("C3", 0.0)
        if self.kind == "linear":
            return y / beta_t(self.t)
        return c["D4"] * y * y + c.get("D5", 0.0) * y + c["D6"]


def linear_pointer(t: float = math.inf) -> PointerDef:
    return PointerDef("linear", "x", t)


def quadratic_pointer(t: float = math.inf) -> PointerDef:
    b2 = beta_t(t) ** 2
    return PointerDef("quadratic", "z", t, {"D4": 1.0 / b2, "D5": 0.0, "D6": -1.0 - 1.0 / b2})


@dataclass(frozen=True)
class QualityPair:
    d1: float
    d2: float

    @property
    def sigma(self) -> float:
        return math.sqrt(max(self.d1, self.d2, 0.0))


def pointer_constants(target: str, param: float, t: float = math.inf) -> dict:
    """Unbiasedness-fixed constants of the rational pointer family.

    sigma_x: ``C1 = sqrt(2 pi) / (beta (sqrt(2 pi) - eps I(eps)))``.
    sigma_z: ``D2 = 2 sqrt(2 pi) / (beta^2 (sqrt(2 pi) - (1 + delta) I(delta)))``
    and ``D3 = -(sqrt(2 pi) + I(delta) D2) / sqrt(2 pi)``.
    """
    b = beta_t(t)
    i = I_eps(param)
    if target == "x":
        den = SQRT2PI - param * i
        if abs(den) < 1e-12:
            raise ZeroDivisionError("singular denominator sqrt(2 pi) - eps I(eps)")
        return {"C1": SQRT2PI / (b * den), "C2": 0.0, "C3": 0.0, "eps": param}
    if target == "z":
        den = SQRT2PI - (1.0 + param) * i
        if abs(den) < 1e-12:
            raise ZeroDivisionError("singular denominator sqrt(2 pi) - (1 + delta) I(delta)")
        d2 = 2.0 * SQRT2PI / (b * b * den)
        return {"C1": 0.0, "C2": d2, "C3": -(SQRT2PI + i * d2) / SQRT2PI, "eps": param}
    raise ValueError("target must be 'x' or 'z'")


def d1_d2(target: str, param: float, t: float = math.inf) -> QualityPair:
    """Closed-form diagonal of ``int h^2 p - X^2`` for the rational family.

    ``d1`` is the ``sigma_+ sigma_-`` (upper) entry and ``d2`` the lower.
    """
    b2 = beta_t(t) ** 2
    c = pointer_constants(target, param, t)
    i, j = I_eps(param), J_eps(param)
    if target == "x":
        c1 = c["C1"]
        d2 = c1 * c1 / SQRT2PI * (i - param * j) - 1.0
        d1 = c1 * c1 * b2 / SQRT2PI * (SQRT2PI - (1 + 2 * param) * i + param * (1 + param) * j) + d2
        return QualityPair(d1, d2)
    dd2, dd3 = c["C2"], c["C3"]
    a = (dd2 * dd2 * j + 2 * dd2 * dd3 * i) / SQRT2PI + dd3 * dd3
    extra = b2 / SQRT2PI * (dd2 * dd2 * (i - (1 + param) * j) + 2 * dd2 * dd3 * (SQRT2PI - (1 + param) * i))
    return QualityPair(a - 1.0 + extra, a - 1.0)


def rational_pointer(target: str, param: float, t: float = math.inf) -> PointerDef:
    return PointerDef("rational", target, t, pointer_constants(target, param, t))


def _target_matrix(target: str) -> np.ndarray:
    return SIGMA_X if target == "x" else SIGMA_Z


def _moment_matrix(f, t: float) -> np.ndarray:
    """``int f(y) p(y) dy`` as a 2x2 matrix by adaptive quadrature on ``[-L, L]``."""
    kw = {"epsabs": 1e-12, "epsrel": 1e-12, "limit": 400}
    coef = []
    for k in range(3):
        coef.append(quad(lambda y: f(y) * density_p(y, t)[k], -QUAD_L, QUAD_L, **kw)[0])
    return coef[0] * np.eye(2) + coef[1] * SIGMA_X + coef[2] * SIGMA_PM


def quadrature_quality(pointer: PointerDef) -> QualityPair:
    """Independent quadrature evaluation of ``diag(d1, d2)``."""
    m1 = _moment_matrix(lambda y: float(pointer(y)), pointer.t)
    m2 = _moment_matrix(lambda y: float(pointer(y)) ** 2, pointer.t)
    cov = m2 - m1 @ m1
    return QualityPair(float(cov[0, 0].real), float(cov[1, 1].real))


def unbiasedness_check(pointer: PointerDef) -> float:
    """``|int h p - X|`` by quadrature."""
    m1 = _moment_matrix(lambda y: float(pointer(y)), pointer.t)
    return float(np.linalg.norm(m1 - _target_matrix(pointer.target), 2))


@dataclass(frozen=True)
class PointerOptimum:
    pointer: PointerDef
    quality: QualityPair
    param: float


def _golden(f, a: float, b: float, xtol: float) -> float:
    g = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def optimize_pointer(target: str, t: float = math.inf, lo: float = 0.05, hi: float = 10.0) -> PointerOptimum:
    """Minimax-optimal rational pointer for ``sigma_x`` or ``sigma_z``.

    A 200-point log-spaced scan brackets the minimum of ``max(d1, d2)``;
    golden-section search shrinks the bracket to ``1e-8`` and one
    parabolic step is accepted only if it lowers the objective.

    Raises
    ------
    RuntimeError
        If the minimum of the scan lies on the scan boundary.
    """
    def obj(p):
        try:
            q = d1_d2(target, p, t)
        except ZeroDivisionError:
            return math.inf
        return max(q.d1, q.d2)

    grid = np.geomspace(lo, hi, 200)
    vals = np.array([obj(p) for p in grid])
    k = int(np.argmin(vals))
    if k == 0 or k == len(grid) - 1:
        raise RuntimeError("failed to bracket the pointer optimum")
    x = _golden(obj, grid[k - 1], grid[k + 1], 1e-8)
    # one parabolic polish through the bracket midpoint
    h = 1e-6
    f0, fm, fp = obj(x), obj(x - h), obj(x + h)
    den = fp - 2 * f0 + fm
    if den > 0:
        xp = x - 0.5 * h * (fp - fm) / den
        if obj(xp) < f0:
            x = xp
    pointer = rational_pointer(target, x, t)
    return PointerOptimum(pointer, d1_d2(target, x, t), float(x))


# ------------------------------------------------------ output densities

def support(pointer: PointerDef) -> tuple[float, float]:
    c = pointer.constants
    if pointer.kind != "rational":
        raise ValueError("support is defined for rational pointers")
    if pointer.target == "x":
        edge = abs(c["C1"]) / (2.0 * math.sqrt(c["eps"]))
        return -edge, edge
    ends = sorted((c["C3"] + c["C2"] / c["eps"], c["C3"]))
    return ends[0], ends[1]


def _density_x(pointer: PointerDef, x: float, bloch) -> float:
    c1, eps = pointer.constants["C1"], pointer.constants["eps"]
    if x == 0.0:
        return float(density_q(0.0, pointer.t, bloch)) * eps / abs(c1)
    disc = c1 * c1 - 4.0 * x * x * eps
    if disc < 0:
        return 0.0
    root = math.sqrt(disc)
    small = 2.0 * x * eps / (c1 + math.copysign(root, c1))
    large = eps / small if small != 0 else math.inf
    total = 0.0
    for y in (small, large):
        if not math.isfinite(y):
            continue
        total += float(density_q(y, pointer.t, bloch)) * (y * y + eps) ** 2 / (abs(c1) * abs(y * y - eps))
    return total


def _density_z(pointer: PointerDef, x: float, bloch) -> float:
    d2, d3, delta = pointer.constants["C2"], pointer.constants["C3"], pointer.constants["eps"]
    if x == d3:
        return 0.0
    y2 = d2 / (x - d3) - delta
    if y2 <= 0:
        return 0.0
    y = math.sqrt(y2)
    total = 0.0
    for yy in (y, -y):
        total += float(density_q(yy, pointer.t, bloch)) * (y2 + delta) ** 2 / (2.0 * abs(d2 * yy))
    return total


def output_density(pointer: PointerDef, bloch, grid) -> np.ndarray:
    """Density of ``h(Y)`` on ``grid`` by summing over preimage branches.

    Zero outside the pointer's range. At a branch singularity (the range
    edge where two preimages merge) the value is the mean of the two
    one-sided evaluations at ``x (1 -/+ 1e-9)``.
    """
    if pointer.kind != "rational":
        raise ValueError("output densities are implemented for rational pointers")
    lo, hi = support(pointer)
    f = _density_x if pointer.target == "x" else _density_z
    singular = (lo, hi) if pointer.target == "x" else (lo,)
    out = np.empty(len(grid))
    for n, x in enumerate(np.asarray(grid, dtype=float)):
        if any(abs(x - s) <= 1e-15 * max(1.0, abs(s)) for s in singular):
            out[n] = 0.5 * (f(pointer, x * (1 - 1e-9), bloch) + f(pointer, x * (1 + 1e-9), bloch))
        else:
            out[n] = f(pointer, x, bloch)
    return out
