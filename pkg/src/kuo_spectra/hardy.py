"""Hardy-type inequality on a finite interval and the log-dyadic test functions.

For phi in H^1(a, b) with phi(y0) = 0,

    ||phi/(y - y0)||^2 + int |y - y0|^-1 phi^2 / max(b - y0, y0 - a)  <=  4 ||phi'||^2,

and the constant 4 cannot be lowered: the powers (y - y0)**(1/2 + eps) push
the ratio of the first term to ||phi'||^2 up to 4 as eps -> 0.  The same
square-root growth, cut off on dyadic shells in log scale, produces test
functions whose Rayleigh-Kuo quadratic form runs to -infinity when beta exceeds
the transitional value.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, tanhsinh

from .errors import ParameterError, PrecisionError
from .rk_eigen import BELOW

QUAD_RTOL = 1e-12
REL_ERROR = 1e-8


def _eta0(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(-1 / (1 - t[inside] ** 2))
    return out


def _deta0(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    ti = t[inside]
    out[inside] = np.exp(-1 / (1 - ti ** 2)) * (-2 * ti / (1 - ti ** 2) ** 2)
    return out


# mu normalizes int eta^2 = 1 over (-1, 1)
_MU = 1 / math.sqrt(float(tanhsinh(lambda t: _eta0(t) ** 2, -1, 1, rtol=1e-14).integral))


def eta(t):
    """Smooth bump supported on [-1, 1] with unit L^2 norm."""
    return _MU * _eta0(t)


def deta(t):
    return _MU * _deta0(t)


def J(x):
    """Bump rescaled to [0, 1]."""
    return eta(2 * np.asarray(x, dtype=float) - 1)


def dJ(x):
    return 2 * deta(2 * np.asarray(x, dtype=float) - 1)


@dataclass
class TestFunction:
    """phi on [a, b] vanishing at the anchor y0.

    ``order`` is the power with which phi vanishes at y0; it selects the
    endpoint substitution used by the quadrature.  ``breaks`` lists interior
    points where phi is not smooth.
    """
    __test__ = False

    a: float
    b: float
    y0: float
    phi: object
    dphi: object
    tag: str = "sampled"
    order: float = 1.0
    breaks: tuple = ()
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.a < self.b:
            raise ParameterError("test function interval must have a < b")
        if not self.a <= self.y0 <= self.b:
            raise ParameterError("anchor y0 must lie in [a, b]")
        if not self.order > 0.5:
            raise ParameterError("phi must vanish at y0 faster than |y - y0|^(1/2)")

    def __call__(self, y):
        return self.phi(np.asarray(y, dtype=float))


def power_function(eps, a=0.0, b=1.0):
    """phi(y) = (y - a)^(1/2 + eps), anchored at a."""
    if not eps > 0:
        raise ParameterError("eps must be positive")
    p = 0.5 + eps
    return TestFunction(a, b, a, lambda y: np.abs(y - a) ** p,
                        lambda y: p * np.abs(y - a) ** (p - 1), "power", p, (), {"eps": eps})


def bump_function(a=-1.0, b=1.0, y0=None):
    """eta rescaled to [a, b]; it vanishes to infinite order at both ends."""
    y0 = a if y0 is None else y0
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return TestFunction(a, b, y0, lambda y: eta((y - mid) / half),
                        lambda y: deta((y - mid) / half) / half, "bump", 1.0)


def piecewise_linear(nodes, values, y0):
    """Continuous piecewise linear phi through (nodes, values); values must vanish at y0."""
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    if nodes.ndim != 1 or nodes.size != values.size or nodes.size < 2:
        raise ParameterError("need matching node and value arrays")
    if np.any(np.diff(nodes) <= 0):
        raise ParameterError("nodes must be strictly increasing")
    v0 = float(np.interp(y0, nodes, values))
    if abs(v0) > 1e-14 * max(1.0, float(np.max(np.abs(values)))):
        raise ParameterError("piecewise linear test function must vanish at y0")
    slopes = np.diff(values) / np.diff(nodes)
    # Segments that contain y0 are written as slope * (y - y0), so that
    # phi / (y - y0) carries no cancellation error near the anchor.
    origin = nodes[:-1].copy()
    offset = values[:-1].copy()
    touch = (nodes[:-1] <= y0) & (y0 <= nodes[1:])
    origin[touch] = y0
    offset[touch] = 0.0

    def seg(y):
        return np.clip(np.searchsorted(nodes, y, side="right") - 1, 0, slopes.size - 1)

    def phi(y):
        k = seg(y)
        return offset[k] + slopes[k] * (y - origin[k])

    def dphi(y):
        return slopes[seg(y)]
    return TestFunction(float(nodes[0]), float(nodes[-1]), float(y0),
                        phi, dphi, "piecewise-linear", 1.0,
                        tuple(float(t) for t in nodes[1:-1]))


def log_dyadic(i, R, anchor=0.0, direction=1):
    """phi_{i,R}(y) = s^(1/2) J(ln s / R + i + 1), s = direction (y - anchor).

    Supported on s in [e^{-(i+1)R}, e^{-iR}].
    """
    lo, hi = math.exp(-(i + 1) * R), math.exp(-i * R)

    def s_of(y):
        return direction * (np.asarray(y, dtype=float) - anchor)

    def phi(y):
        s = s_of(y)
        out = np.zeros_like(s)
        m = (s > lo) & (s < hi)
        out[m] = np.sqrt(s[m]) * J(np.log(s[m]) / R + i + 1)
        return out

    def dphi(y):
        s = s_of(y)
        out = np.zeros_like(s)
        m = (s > lo) & (s < hi)
        x = np.log(s[m]) / R + i + 1
        out[m] = direction * (dJ(x) / (R * np.sqrt(s[m])) + 0.5 * J(x) / np.sqrt(s[m]))
        return out
    a, b = (anchor + lo, anchor + hi) if direction > 0 else (anchor - hi, anchor - lo)
    return TestFunction(min(a, anchor), max(b, anchor), anchor, phi, dphi, "log-dyadic", 1.0,
                        (a, b), {"i": i, "R": R})


def _integrate(f, lo, hi):
    res = tanhsinh(f, lo, hi, rtol=QUAD_RTOL, maxlevel=14)
    val = np.atleast_1d(res.integral)
    err = np.atleast_1d(res.error)
    bad = (np.atleast_1d(res.status) != 0) & (err > REL_ERROR * np.maximum(np.abs(val), 1e-300))
    if np.any(bad):
        # tanh-sinh occasionally reports a spurious error estimate on a
        # rounding floor; adaptive Gauss-Kronrod gets a second opinion.
        v, e = quad(lambda y: float(f(np.asarray(y))), lo, hi, epsabs=0.0, epsrel=QUAD_RTOL,
                    limit=200)
        if not e <= REL_ERROR * max(abs(v), 1e-300):
            raise PrecisionError("quadrature did not reach the requested accuracy")
        return float(v), float(e)
    return float(np.sum(val)), float(np.sum(err))


def _pieces(tf):
    pts = sorted({tf.a, tf.b, tf.y0, *[t for t in tf.breaks if tf.a < t < tf.b]})
    return [(lo, hi) for lo, hi in zip(pts[:-1], pts[1:]) if hi > lo]


TAIL = 1e-100


def _quad(tf, g, gamma):
    """int_a^b g(y) dy split at y0 and the breaks.

    Near y0 the integrand behaves like |y - y0|^gamma.  Pieces touching y0
    use y = y0 +- L z^m with m = 1/(2 order - 1) when that exceeds one, which
    turns the endpoint power singularity into a bounded integrand; the
    innermost sliver of relative width 1e-100, which double precision cannot
    resolve, is added from the power model.
    """
    m = max(1.0, 1 / (2 * tf.order - 1))
    total = 0.0
    err = 0.0
    for lo, hi in _pieces(tf):
        if m > 1 and (lo == tf.y0 or hi == tf.y0):
            L = hi - lo
            sgn = 1.0 if lo == tf.y0 else -1.0
            h = TAIL * L

            def f(z, sgn=sgn, L=L):
                y = tf.y0 + sgn * L * z ** m
                return g(y) * L * m * z ** (m - 1)
            v, e = _integrate(f, (h / L) ** (1 / m), 1.0)
            v += float(g(np.asarray(tf.y0 + sgn * h))) * h / (gamma + 1)
        else:
            v, e = _integrate(g, lo, hi)
        total += v
        err += e
    return total, err


@dataclass(frozen=True)
class HardyCheck:
    lhs: float
    rhs: float
    holds: bool
    weighted: float = 0.0     # ||phi/(y-y0)||^2 alone

    @property
    def ratio(self):
        return self.lhs / self.rhs


def check_hardy(tf):
    """Evaluate both sides of the finite-interval Hardy inequality for ``tf``."""
    y0 = tf.y0
    width = max(tf.b - y0, y0 - tf.a)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = tf.order
        t1, e1 = _quad(tf, lambda y: np.where(y == y0, 0.0, (tf.phi(y) / (y - y0)) ** 2), 2 * p - 2)
        t2, e2 = _quad(tf, lambda y: np.where(y == y0, 0.0, tf.phi(y) ** 2 / np.abs(y - y0)),
                       2 * p - 1)
        t3, e3 = _quad(tf, lambda y: tf.dphi(y) ** 2, 2 * p - 2)
    lhs = t1 + t2 / width
    rhs = 4 * t3
    tol = REL_ERROR * max(abs(lhs), abs(rhs), 1e-300)
    return HardyCheck(lhs, rhs, bool(lhs <= rhs + tol), t1)


def optimality_sweep(epsilons):
    """||phi/y||^2 / ||phi'||^2 for phi = y^(1/2+eps) on [0, 1]."""
    out = []
    for eps in epsilons:
        if not 0 < eps <= 0.5:
            raise ParameterError("eps must lie in (0, 1/2]")
        tf = power_function(eps)
        chk = check_hardy(tf)
        out.append(chk.weighted / (chk.rhs / 4))
    return out


@dataclass
class DivergenceWitness:
    c: float
    distance: float           # u_min - c
    delta: float              # locality radius
    eps0: float
    nu0: float
    anchor: float
    values: list              # normalized quadratic form for i = 1..n
    R: float
    energies: list = None     # the same forms for phi_{i,R} as built, before normalizing

    def to_json(self):
        return {"c": self.c, "distance": self.distance, "delta": self.delta, "eps0": self.eps0,
                "nu0": self.nu0, "anchor": self.anchor, "R": self.R,
                "quadratic_form_values": list(self.values),
                "energies": None if self.energies is None else list(self.energies)}


def _locality(profile, beta, a, direction, delta0):
    """Largest delta = delta0 / 2^k with a strict sign margin on [0, delta].

    The margin is S = 2 (max u'' - beta) / max u'' over the shell; the
    quadratic form estimate needs S < -1/4, and eps0 is taken halfway.
    """
    imp = profile._impl
    d = delta0
    for _ in range(60):
        ss = np.linspace(0.0, d, 513)
        u2 = imp.eval(a + direction * ss, 2)
        if np.all(u2 > 0):
            S = 2 * (np.max(u2) - beta) / np.max(u2)
            if S < -0.25:
                eps0 = 0.5 * (4 + 1 / S)
                return d, eps0, float(np.min(u2))
        d *= 0.5
    raise ParameterError("no locality radius with a strict sign margin was found")


def _quadratic_form(profile, beta, a, direction, dist, i, R):
    """(int (phi'^2 + V phi^2), int phi^2) for phi_{i,R}.

    Works in x = ln s / R + i + 1 on [0, 1], where ds = R s dx and the
    integrands are smooth bumps.  The mass integrand carries the tiny factor
    e^{-2 (i + 1) R}, which is taken outside the quadrature.
    """
    imp = profile._impl
    edge = profile.quantities.u_min
    base = float(imp.eval(np.asarray(a), 0)) - edge

    def parts(x):
        x = np.asarray(x, dtype=float)
        s = np.exp(R * (x - i - 1))
        y = a + direction * s
        Jx, dJx = J(x), dJ(x)
        denom = imp.increment(a, direction * s) + base + dist
        V = (imp.eval(y, 2) - beta) / denom
        kin = R * (dJx / R + 0.5 * Jx) ** 2
        pot = R * V * s * s * Jx ** 2
        mass = R * np.exp(2 * R * x) * Jx ** 2
        return kin, pot, mass
    kin = _integrate(lambda x: parts(x)[0], 0.0, 1.0)[0]
    pot = _integrate(lambda x: parts(x)[1], 0.0, 1.0)[0]
    mass = _integrate(lambda x: parts(x)[2], 0.0, 1.0)[0] * math.exp(-2 * (i + 1) * R)
    return kin + pot, mass


def divergence_witness(profile, beta, n, R, delta0=None):
    """Quadratic-form values that witness lambda_n(c) -> -infinity at u_min.

    Needs beta > 9 kappa_+/8 at some critical minimum a.  The speed c is tied
    to R through 2 (u_min - c) = eps0 nu0 e^{-2(n+1)R} / 8.
    """
    q = profile.quantities
    if n < 1:
        raise ParameterError("n must be at least 1")
    candidates = []
    for cp in q.critical_points:
        if cp.u - q.u_min <= 1e-12 * (q.u_max - q.u_min) and cp.u2 > 0 and beta / cp.u2 > 9 / 8:
            candidates.append(cp)
    if not candidates:
        raise ParameterError("beta does not exceed 9/8 of u'' at any critical minimum")
    y1, y2 = profile.domain
    cp = min(candidates, key=lambda p: p.y == y2)
    a = cp.y
    direction = 1 if a < y2 else -1
    room = (y2 - a) if direction > 0 else (a - y1)
    if delta0 is None:
        delta0 = min(profile.length / 8, room)
    delta, eps0, nu0 = _locality(profile, beta, a, direction, min(delta0, room))
    if not math.exp(-R) < delta:
        raise ParameterError(f"e^-R = {math.exp(-R):.3g} exceeds the locality radius {delta:.3g}")
    dist = eps0 * nu0 * math.exp(-2 * (n + 1) * R) / 16
    forms = [_quadratic_form(profile, beta, a, direction, dist, i, R) for i in range(1, n + 1)]
    c = q.u_min - dist
    return DivergenceWitness(c, dist, delta, eps0, nu0, a, [e / m for e, m in forms], R,
                             [e for e, _ in forms])


def witness_offset(w):
    """The witness speed as an rk_eigen offset (exact even when c rounds to u_min)."""
    from .rk_eigen import Offset
    return Offset(BELOW, w.distance)
