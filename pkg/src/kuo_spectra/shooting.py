"""Shooting for isolated real eigenvalues.

For a wavenumber alpha the speed c is an isolated eigenvalue exactly when the
solution of

    -psi'' + (u'' - beta)/(u - c) psi = -alpha**2 psi,  psi(y2) = 0, psi'(y2) = 1

also vanishes at y1.  The integration runs from y2 down to y1 in segments;
the state is renormalized between segments so that growing solutions never
overflow, and the discarded scale is kept as a logarithm.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import ParameterError, ProximityError, SpectrumOverflowError
from .rk_eigen import ABOVE, BELOW, expected_divergent_branches, offset_of

PROXIMITY = 1e-10
RESCALE = 1e150
SEGMENTS = 8


@dataclass(frozen=True)
class ShootResult:
    c: float
    D: float             # psi(y1), +-inf when the magnitude overflows a float
    D_prime_y: float     # psi'(y1) on the same scale as D
    log_scale: float     # log of the factor divided out during rescaling
    steps: int
    local_error: float
    mantissa: float = 0.0
    mantissa_prime: float = 0.0

    @property
    def direction(self):
        """psi(y1) on the unit circle of (psi, psi'): same zeros as D, always finite."""
        return self.mantissa / math.hypot(self.mantissa, self.mantissa_prime)

    @property
    def log_abs_D(self):
        return math.log(abs(self.mantissa)) + self.log_scale if self.mantissa else -math.inf


def _potential(profile, beta, off):
    """(u'' - beta)/(u - c) with u - c measured from the nearest extremal point.

    Forming u(y) - c directly loses all relative accuracy once |c - edge| is
    near the rounding level of u, which wrecks the step-size control.
    """
    imp = profile._impl
    q = profile.quantities
    pts = q.argmin_set if off.side == BELOW else q.argmax_set
    edge = q.u_min if off.side == BELOW else q.u_max
    anchors = [(float(a), float(imp.eval(np.asarray(a), 0)) - edge) for a in pts]
    shift = off.delta if off.side == BELOW else -off.delta

    def pot(y):
        a, base = min(anchors, key=lambda t: abs(y - t[0]))
        denom = float(imp.increment(a, np.asarray(y - a))) + base + shift
        return (float(imp.eval(np.asarray(y), 2)) - beta) / denom
    return pot


def integrate_rayleigh(profile, beta, alpha, c, rtol=1e-10):
    """Integrate the Rayleigh-Kuo equation from y2 to y1 with unit slope at y2."""
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    off = offset_of(profile, c)
    if off.delta < PROXIMITY:
        raise ProximityError(f"|c - edge| = {off.delta:.3g} is below {PROXIMITY:g}")
    q = _potential(profile, beta, off)
    a2 = alpha * alpha

    def rhs(y, z):
        return np.array([z[1], (q(y) + a2) * z[0]])

    y1, y2 = profile.domain
    knots = np.linspace(y2, y1, SEGMENTS + 1)
    z = np.array([0.0, 1.0])
    log_scale = 0.0
    steps = 0
    err = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        sol = solve_ivp(rhs, (a, b), z, method="DOP853", rtol=rtol, atol=1e-300,
                        first_step=abs(b - a) * 1e-3)
        if sol.status != 0:
            raise ProximityError(f"integration failed at c={c!r}: {sol.message}")
        steps += sol.t.size - 1
        z = sol.y[:, -1]
        norm = float(np.max(np.abs(z)))
        if norm > RESCALE or norm < 1 / RESCALE:
            z = z / norm
            log_scale += math.log(norm)
        err = max(err, rtol * float(np.max(np.abs(sol.y))))
    try:
        factor = math.exp(log_scale)
        D, Dp = float(z[0] * factor), float(z[1] * factor)
    except OverflowError:
        D = math.copysign(math.inf, z[0]) if z[0] else 0.0
        Dp = math.copysign(math.inf, z[1]) if z[1] else 0.0
    return ShootResult(float(c), D, Dp, log_scale, steps, err, float(z[0]), float(z[1]))


def shooting_function(profile, beta, alpha):
    """c -> psi(y1) normalized by |(psi, psi')(y1)|; continuous with the zeros of D."""
    return lambda c: integrate_rayleigh(profile, beta, alpha, c).direction


def scan_schedule(profile, side, far, points=256, ratio=0.85, closest=PROXIMITY):
    """Speeds approaching the edge geometrically, from distance ``far`` inward."""
    q = profile.quantities
    d = far * ratio ** np.arange(points)
    d = d[d >= closest]
    if d.size == 0 or d[-1] > closest * 1.0001:
        d = np.append(d, closest)
    return q.u_min - d if side == BELOW else q.u_max + d


def root_window(profile, beta, alpha):
    """Distance beyond which lambda_n(c) > -alpha**2 for every n.

    The potential is bounded by max|u'' - beta| / dist(c, Ran u) and the
    Dirichlet Laplacian is at least (pi/L)**2.
    """
    ys = np.linspace(profile.y1, profile.y2, 2049)
    bound = float(np.max(np.abs(profile._impl.eval(ys, 2) - beta)))
    return max(bound / ((math.pi / profile.length) ** 2 + alpha ** 2), 1e-6) * 1.05


def find_discrete_spectrum_shooting(profile, beta, alpha, window=None, max_roots=64,
                                    points=256, ratio=0.85, xtol=1e-12):
    """Real speeds c in ``window`` with psi_c(y1) = 0, sorted.

    ``window`` is an interval disjoint from the range of u, or None for both
    exterior sides out to the distance where no root can lie.
    """
    q = profile.quantities
    far = root_window(profile, beta, alpha)
    sides = []
    if window is None:
        sides = [(BELOW, far, 0.0), (ABOVE, far, 0.0)]
    else:
        lo, hi = sorted(float(v) for v in window)
        if hi <= q.u_min:
            sides = [(BELOW, min(far, q.u_min - lo), q.u_min - hi)]
        elif lo >= q.u_max:
            sides = [(ABOVE, min(far, hi - q.u_max), lo - q.u_max)]
        else:
            raise ParameterError("window must not meet the range of u")
    f = shooting_function(profile, beta, alpha)
    roots = []
    for side, dmax, dmin in sides:
        if dmax <= max(dmin, PROXIMITY):
            continue
        if dmin <= PROXIMITY and expected_divergent_branches(profile, beta, side) == math.inf:
            # Roots accumulate at the edge, log-periodically; a finite scan
            # sees only a few of them, so counting cannot reveal the overflow.
            raise SpectrumOverflowError(
                "every branch diverges at this edge, so roots accumulate there", max_roots + 1)
        cs = scan_schedule(profile, side, dmax, points, ratio, max(dmin, PROXIMITY))
        vals = [f(c) for c in cs]
        for c0, c1, v0, v1 in zip(cs[:-1], cs[1:], vals[:-1], vals[1:]):
            if v0 == 0.0:
                roots.append(float(c0))
            elif v0 * v1 < 0:
                roots.append(brentq(f, min(c0, c1), max(c0, c1), xtol=xtol, rtol=1e-15))
            if len(roots) > max_roots:
                raise SpectrumOverflowError(
                    f"more than {max_roots} roots of D in the window", len(roots))
        if vals and vals[-1] == 0.0:
            roots.append(float(cs[-1]))
    return sorted(roots)
