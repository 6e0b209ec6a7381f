"""Shear flow profiles and their characteristic quantities.

A profile is an immutable description of ``u(y)`` on a closed channel
``[y1, y2]`` with derivatives up to third order.  Besides plain evaluation
every kind provides a cancellation-free increment ``u(a + s) - u(a)`` so that
``u - c`` can be formed accurately when ``c`` sits extremely close to the
range of ``u``.
"""

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.interpolate import PPoly, make_interp_spline
from scipy.optimize import brentq

from .errors import (AssumptionError, ConfigError, DomainError,
                     ParameterError, UnsupportedProfileError)
from .extended import ExtendedReal, ext_max, ext_min

KINDS = ("builtin-sinus", "builtin-couette", "builtin-poiseuille",
         "polynomial", "trig-series", "sampled-spline")

H1_TOL = 1e-9


@dataclass(frozen=True)
class ShearProfile:
    kind: str
    domain: tuple
    coefficients: object = ()
    name: str = ""
    _impl: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnsupportedProfileError(f"unknown profile kind {self.kind!r}")
        y1, y2 = (float(v) for v in self.domain)
        if not (math.isfinite(y1) and math.isfinite(y2)) or y2 <= y1:
            raise ConfigError(f"bad domain {self.domain!r}")
        object.__setattr__(self, "domain", (y1, y2))
        object.__setattr__(self, "_impl", _build_impl(self.kind, (y1, y2), self.coefficients))
        ys = np.linspace(y1, y2, 257)
        u = self._impl.eval(ys, 0)
        if np.ptp(u) <= 1e-12 * max(1.0, np.max(np.abs(u))):
            raise ParameterError("profile is constant")

    @property
    def y1(self):
        return self.domain[0]

    @property
    def y2(self):
        return self.domain[1]

    @property
    def length(self):
        return self.domain[1] - self.domain[0]

    def __call__(self, y, order=0):
        return evaluate(self, y, order)

    def increment(self, a, s):
        """``u(a + s) - u(a)`` without catastrophic cancellation."""
        return self._impl.increment(float(a), np.asarray(s, dtype=float))

    def antiderivative(self, y):
        """Stream function of the base flow, zero at the channel midpoint."""
        y = np.asarray(y, dtype=float)
        mid = 0.5 * (self.y1 + self.y2)
        return self._impl.antideriv(y) - self._impl.antideriv(np.asarray(mid))

    def to_json(self):
        coeffs = self.coefficients
        if isinstance(coeffs, np.ndarray):
            coeffs = coeffs.tolist()
        return {"kind": self.kind, "domain": list(self.domain), "coefficients": _plain(coeffs)}

    @cached_property
    def cache_key(self):
        """Canonical text form, used to memoize eigenvalue computations."""
        return json.dumps(self.to_json(), sort_keys=True)

    @cached_property
    def quantities(self):
        return characteristic_quantities(self)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    return float(obj) if isinstance(obj, (int, float, np.floating)) else obj


def evaluate(profile, y, order=0):
    """Return ``u^(order)(y)``; accepts scalars or arrays."""
    if order not in (0, 1, 2, 3):
        raise ParameterError(f"derivative order {order} not in 0..3")
    arr = np.asarray(y, dtype=float)
    tol = 1e-13 * profile.length
    if np.any(arr < profile.y1 - tol) or np.any(arr > profile.y2 + tol):
        raise DomainError(f"y outside [{profile.y1}, {profile.y2}]")
    out = profile._impl.eval(np.clip(arr, profile.y1, profile.y2), order)
    return float(out) if np.ndim(out) == 0 else out


# --- kind implementations -----------------------------------------------------

class _Polynomial:
    def __init__(self, coeffs):
        c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
        self.c = c if c.size else np.zeros(1)
        self.derivs = [self.c]
        for _ in range(8):
            self.derivs.append(P.polyder(self.derivs[-1]) if self.derivs[-1].size > 1 else np.zeros(1))
        self.integral = P.polyint(self.c)

    def eval(self, y, order):
        return P.polyval(y, self.derivs[order])

    def increment(self, a, s):
        # Taylor shift about a is exact for a polynomial.
        taylor = [P.polyval(a, np.asarray(Q)) / math.factorial(k) for k, Q in enumerate(self.derivs)
                  if k <= len(self.c) - 1]
        taylor[0] = 0.0
        return P.polyval(s, np.asarray(taylor))

    def antideriv(self, y):
        return P.polyval(y, self.integral)


def _sincos_pi(t):
    """(sin(pi t), cos(pi t)) with exact values at multiples of 1/2."""
    t = np.asarray(t, dtype=float)
    q = np.round(2 * t)
    f = math.pi * (t - q / 2)
    s, c = np.sin(f), np.cos(f)
    quarter = np.mod(q, 4)
    sin_t = np.select([quarter == 0, quarter == 1, quarter == 2], [s, c, -s], -c)
    cos_t = np.select([quarter == 0, quarter == 1, quarter == 2], [c, -s, -c], s)
    return sin_t, cos_t


class _TrigSeries:
    """u = sum_k a_k cos(k w y) + b_k sin(k w y), k = 0, 1, ..."""

    def __init__(self, cos_coeffs, sin_coeffs, omega):
        self.a = np.asarray(cos_coeffs, dtype=float)
        self.b = np.asarray(sin_coeffs, dtype=float)
        n = max(self.a.size, self.b.size)
        self.a = np.pad(self.a, (0, n - self.a.size))
        self.b = np.pad(self.b, (0, n - self.b.size))
        self.k = np.arange(n) * float(omega)
        self.turns = np.arange(n) * (float(omega) / math.pi)

    def eval(self, y, order):
        y = np.asarray(y, dtype=float)
        ph = np.multiply.outer(y, self.k)
        kp = self.k ** order
        # d^m/dy^m cos(ky) = k^m cos(ky + m pi/2)
        shift = order * math.pi / 2
        terms = self.a * kp * np.cos(ph + shift) + self.b * kp * np.sin(ph + shift)
        if order > 0:
            terms[..., self.k == 0] = 0.0
        return terms.sum(axis=-1)

    def increment(self, a, s):
        s = np.asarray(s, dtype=float)
        half = np.multiply.outer(s, self.k) / 2
        sh, ch = np.sin(half), np.cos(half)
        # The phase k a is reduced in half turns so that extremal points such
        # as a = -1 for cos(pi y) give exact zeros of sin(k a).
        sa, ca = _sincos_pi(self.turns * a)
        sin_mid = sa * ch + ca * sh
        cos_mid = ca * ch - sa * sh
        terms = -2 * self.a * sin_mid * sh + 2 * self.b * cos_mid * sh
        return terms.sum(axis=-1)

    def antideriv(self, y):
        y = np.asarray(y, dtype=float)
        ph = np.multiply.outer(y, self.k)
        k = np.where(self.k == 0, 1.0, self.k)
        terms = np.where(self.k == 0, self.a * np.multiply.outer(y, np.ones_like(self.k)),
                         self.a * np.sin(ph) / k - self.b * np.cos(ph) / k)
        return terms.sum(axis=-1)


class _Spline:
    def __init__(self, ys, us):
        ys = np.asarray(ys, dtype=float)
        us = np.asarray(us, dtype=float)
        if ys.ndim != 1 or ys.size != us.size or ys.size < 6:
            raise ConfigError("sampled-spline needs matching y and u arrays with at least 6 samples")
        if np.any(np.diff(ys) <= 0):
            raise ConfigError("sampled-spline abscissae must be strictly increasing")
        self.spline = make_interp_spline(ys, us, k=5)
        self.pp = PPoly.from_spline(self.spline)
        self.anti = self.spline.antiderivative()

    def eval(self, y, order):
        return self.spline(y, nu=order)

    def increment(self, a, s):
        s = np.asarray(s, dtype=float)
        i = np.clip(np.searchsorted(self.pp.x, a, side="right") - 1, 0, self.pp.x.size - 2)
        lo, hi = self.pp.x[i], self.pp.x[i + 1]
        inside = (a + s >= lo) & (a + s <= hi)
        # Within one piece the quintic is its own Taylor series about a.
        coef = self.pp.c[:, i][::-1]
        t = a - lo
        taylor = np.array([P.polyval(t, P.polyder(coef, k)) / math.factorial(k) if k else 0.0
                           for k in range(coef.size)])
        local = P.polyval(s, taylor)
        direct = self.spline(np.clip(a + s, self.pp.x[0], self.pp.x[-1])) - self.spline(a)
        return np.where(inside, local, direct)

    def antideriv(self, y):
        return self.anti(y)


def _build_impl(kind, domain, coeffs):
    y1, y2 = domain
    if kind == "builtin-sinus":
        return _TrigSeries([0.5, 0.5], [0.0, 0.0], 2 * math.pi / (y2 - y1))
    if kind == "builtin-couette":
        return _Polynomial([0.0, 1.0])
    if kind == "builtin-poiseuille":
        return _Polynomial([0.0, 0.0, 1.0])
    if kind == "polynomial":
        return _Polynomial(coeffs)
    if kind == "trig-series":
        if not isinstance(coeffs, dict):
            raise ConfigError("trig-series coefficients must be an object with 'cos'/'sin' lists")
        omega = coeffs.get("omega", 2 * math.pi / (y2 - y1))
        return _TrigSeries(coeffs.get("cos", [0.0]), coeffs.get("sin", [0.0]), omega)
    if isinstance(coeffs, dict):
        return _Spline(coeffs.get("y", ()), coeffs.get("u", ()))
    raise ConfigError("sampled-spline coefficients must be an object with 'y'/'u' lists")


def sinus():
    return ShearProfile("builtin-sinus", (-1.0, 1.0), name="sinus")


def couette():
    return ShearProfile("builtin-couette", (-1.0, 1.0), name="couette")


def poiseuille():
    return ShearProfile("builtin-poiseuille", (-1.0, 1.0), name="poiseuille")


BUILTINS = {"sinus": sinus, "couette": couette, "poiseuille": poiseuille}


def builtin(name):
    try:
        return BUILTINS[name]()
    except KeyError:
        raise UnsupportedProfileError(f"no builtin profile named {name!r}") from None


def profile_from_dict(obj):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError("profile config needs a 'kind' field")
    kind = obj["kind"]
    if kind in BUILTINS:
        kind = "builtin-" + kind
    domain = obj.get("domain", (-1.0, 1.0))
    if len(domain) != 2:
        raise ConfigError("domain must be [y1, y2]")
    return ShearProfile(kind, tuple(domain), obj.get("coefficients", ()), name=obj.get("name", ""))


def load_profile(path):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read profile {path}: {exc}") from exc
    return profile_from_dict(obj)


# --- characteristic quantities ------------------------------------------------

@dataclass(frozen=True)
class CriticalPoint:
    y: float
    u: float
    u2: float
    interior: bool


@dataclass(frozen=True)
class CharacteristicQuantities:
    u_min: float
    u_max: float
    argmin_set: tuple
    argmax_set: tuple
    kappa_plus: ExtendedReal
    kappa_minus: ExtendedReal
    mu_plus: object
    mu_minus: object
    beta_plus: ExtendedReal
    beta_minus: ExtendedReal
    critical_points: tuple = ()

    def to_json(self):
        def ext(v):
            return None if v is None else v.to_json()
        return {
            "u_min": self.u_min, "u_max": self.u_max,
            "argmin_set": list(self.argmin_set), "argmax_set": list(self.argmax_set),
            "kappa_plus": ext(self.kappa_plus), "kappa_minus": ext(self.kappa_minus),
            "mu_plus": ext(self.mu_plus), "mu_minus": ext(self.mu_minus),
            "beta_plus": ext(self.beta_plus), "beta_minus": ext(self.beta_minus),
        }


def _merge(points, tol):
    out = []
    for p in sorted(points):
        if not out or p - out[-1] > tol:
            out.append(p)
    return out


def critical_points(profile, scan=2048):
    """Zeros of u' on the closed channel, located by scan, bisection and Newton."""
    y1, y2 = profile.domain
    ys = np.linspace(y1, y2, scan + 1)
    d1 = profile._impl.eval(ys, 1)
    scale = max(1.0, float(np.max(np.abs(d1))))
    zero_tol = 1e-12 * scale
    f = lambda y: float(profile._impl.eval(np.asarray(y), 1))
    roots = []
    for i in range(scan):
        a, b = ys[i], ys[i + 1]
        fa, fb = d1[i], d1[i + 1]
        if abs(fa) <= zero_tol:
            roots.append(a)
        elif fa * fb < 0 and abs(fb) > zero_tol:
            roots.append(brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    if abs(d1[-1]) <= zero_tol:
        roots.append(y2)
    polished = []
    for r in roots:
        for _ in range(3):
            d2 = float(profile._impl.eval(np.asarray(r), 2))
            if d2 == 0.0:
                break
            r = min(max(r - f(r) / d2, y1), y2)
        j = int(np.argmin(np.abs(ys - r)))
        if abs(ys[j] - r) <= 1e-13 * (y2 - y1) and abs(d1[j]) <= abs(f(r)):
            r = ys[j]
        polished.append(float(r))
    roots = _merge(polished, 1e-10)
    # Near a touching zero of u' (no sign change) u'' must also vanish, which
    # is precisely an (H1) violation; catch it rather than miss the point.
    absd = np.abs(d1)
    for i in range(1, scan):
        if absd[i] <= absd[i - 1] and absd[i] <= absd[i + 1] and d1[i - 1] * d1[i + 1] > 0 \
                and absd[i] < 1e-6 * scale and all(abs(ys[i] - r) > 2 * (ys[1] - ys[0]) for r in roots):
            raise AssumptionError(f"degenerate critical point of u near y={ys[i]:.12g}")
    return roots


def characteristic_quantities(profile, scan=2048):
    y1, y2 = profile.domain
    roots = critical_points(profile, scan)
    imp = profile._impl
    d2_scale = max(1.0, float(np.max(np.abs(imp.eval(np.linspace(y1, y2, scan + 1), 2)))))
    crit = []
    width = profile.length
    for r in roots:
        u2 = float(imp.eval(np.asarray(r), 2))
        if abs(u2) <= H1_TOL * d2_scale:
            raise AssumptionError(f"u'' vanishes at the critical point y={r:.17g}")
        interior = (r - y1) > 1e-10 * width and (y2 - r) > 1e-10 * width
        crit.append(CriticalPoint(r, float(imp.eval(np.asarray(r), 0)), u2, interior))
    cand = [(y1, float(imp.eval(np.asarray(y1), 0))), (y2, float(imp.eval(np.asarray(y2), 0)))]
    cand += [(c.y, c.u) for c in crit]
    u_min = min(v for _, v in cand)
    u_max = max(v for _, v in cand)
    tie = 1e-12 * (u_max - u_min)
    argmin = tuple(_merge([y for y, v in cand if v - u_min <= tie], 1e-10))
    argmax = tuple(_merge([y for y, v in cand if u_max - v <= tie], 1e-10))

    at_min = [c for c in crit if c.u - u_min <= tie]
    at_max = [c for c in crit if u_max - c.u <= tie]
    kp = ExtendedReal.finite(min(c.u2 for c in at_min)) if at_min else ExtendedReal.pos_inf()
    km = ExtendedReal.finite(max(c.u2 for c in at_max)) if at_max else ExtendedReal.neg_inf()
    in_min = [c for c in at_min if c.interior]
    in_max = [c for c in at_max if c.interior]
    mp = ExtendedReal.finite(min(c.u2 for c in in_min)) if in_min else None
    mm = ExtendedReal.finite(max(c.u2 for c in in_max)) if in_max else None
    # An interior minimum attained at a non-critical point is impossible, but
    # an interior point of {u = u_min} is always critical; sets agree.
    bp = kp.scale(9 / 8)
    if mp is not None:
        bp = ext_min(bp, mp)
    bm = km.scale(9 / 8)
    if mm is not None:
        bm = ext_max(bm, mm)
    return CharacteristicQuantities(u_min, u_max, argmin, argmax, kp, km, mp, mm, bp, bm, tuple(crit))


def m_beta(profile, beta):
    """Number of interior extremal points whose curvature is beaten by beta."""
    q = profile.quantities
    beta = float(beta)
    if 0 < beta and beta <= q.kappa_plus.scale(9 / 8):
        return sum(1 for c in q.critical_points
                   if c.interior and c.u - q.u_min <= 1e-12 * (q.u_max - q.u_min) and c.u2 - beta < 0)
    if beta < 0 and beta >= q.kappa_minus.scale(9 / 8):
        return sum(1 for c in q.critical_points
                   if c.interior and q.u_max - c.u <= 1e-12 * (q.u_max - q.u_min) and c.u2 - beta > 0)
    raise ParameterError(f"beta={beta!r} outside (0, 9 kappa_+/8] and [9 kappa_-/8, 0)")


# --- class K+ certificate -----------------------------------------------------

@dataclass(frozen=True)
class KPlusCertificate:
    u_beta: float
    K_min: float
    K_max: float


def _roots_of(fun, ys, vals, scale):
    tol = 1e-9 * scale
    roots = []
    for i in range(ys.size - 1):
        a, b, fa, fb = ys[i], ys[i + 1], vals[i], vals[i + 1]
        if abs(fa) <= tol:
            roots.append(_polish(fun, ys, vals, i))
        elif fa * fb < 0 and abs(fb) > tol:
            roots.append(brentq(fun, a, b, xtol=1e-15))
    if abs(vals[-1]) <= tol:
        roots.append(_polish(fun, ys, vals, ys.size - 1))
    return _merge(roots, 1e-9 * (ys[-1] - ys[0]))


def _polish(fun, ys, vals, i):
    # A grid value that is merely small still sits off the true zero; bracket
    # with the neighbours when they change sign.
    if vals[i] == 0:
        return ys[i]
    lo, hi = max(i - 1, 0), min(i + 1, ys.size - 1)
    for j in (lo, hi):
        if j != i and vals[i] * vals[j] < 0:
            a, b = sorted((ys[i], ys[j]))
            return brentq(fun, a, b, xtol=1e-15)
    return ys[i]


def class_K_plus_test(profile, beta, grid=10_000, eps=1e-6):
    """Search u_beta with (beta - u'')/(u - u_beta) in [eps, 1/eps].

    Any admissible u_beta must be the value of u at a zero of beta - u'',
    because K_beta can only stay bounded where numerator and denominator
    vanish together.  Those values are the candidates; each is checked on a
    uniform grid with the removable singularities replaced by their limits.
    """
    imp = profile._impl
    y1, y2 = profile.domain
    ys = np.linspace(y1, y2, grid + 1)
    u = imp.eval(ys, 0)
    d2 = imp.eval(ys, 2)
    lo, hi = float(np.min(d2)), float(np.max(d2))
    scale = max(1.0, abs(lo), abs(hi))
    if not (lo - 1e-9 * scale <= beta <= hi + 1e-9 * scale):
        raise ParameterError(f"beta={beta!r} not in the range of u''")
    num = beta - d2
    g = lambda y: beta - float(imp.eval(np.asarray(y), 2))
    zeros = _roots_of(g, ys, num, scale)
    if not zeros:
        # beta touches an extreme value of u'' between grid points
        i = int(np.argmin(np.abs(num)))
        zeros = [float(ys[i])]
    u_range = float(np.ptp(u))
    best = None
    for z in zeros:
        ub = float(imp.eval(np.asarray(z), 0))
        den = u - ub
        near = np.abs(den) <= 1e-7 * u_range
        holes = np.zeros_like(near)
        limits = []
        for w in _roots_of(lambda y: float(imp.eval(np.asarray(y), 0)) - ub, ys, den, u_range):
            u1 = float(imp.eval(np.asarray(w), 1))
            if abs(u1) > 1e-6 * scale:
                limits.append(-float(imp.eval(np.asarray(w), 3)) / u1)
                radius = 1e-4 * profile.length
            else:
                radius = 1e-3 * profile.length
            holes |= np.abs(ys - w) <= radius
        keep = ~(near | holes)
        with np.errstate(divide="ignore", invalid="ignore"):
            K = num[keep] / den[keep]
        vals = np.concatenate([K, limits])
        if vals.size == 0 or not np.all(np.isfinite(vals)):
            continue
        kmin, kmax = float(vals.min()), float(vals.max())
        if kmin >= eps and kmax <= 1 / eps:
            cert = KPlusCertificate(ub, kmin, kmax)
            if best is None or cert.K_max / cert.K_min < best.K_max / best.K_min:
                best = cert
    return best


def u_beta_of(profile, beta):
    cert = class_K_plus_test(profile, beta)
    if cert is None:
        raise AssumptionError(f"profile is not in class K+ at beta={beta!r}")
    return cert.u_beta
