"""Discrete spectrum, the constants M_beta and Lambda_beta, and family counts.

A speed c outside the range of u is an isolated eigenvalue for wavenumber
alpha exactly when some Rayleigh-Kuo eigenvalue lambda_n(c) equals
-alpha**2.  The routines here locate those crossings branch by branch on
schedules that accumulate geometrically at the range edges.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import (ContradictionError, IndeterminateLimitError, ParameterError,
                     SpectrumOverflowError, UnsupportedProfileError)
from .extended import ExtendedReal
from .profile import class_K_plus_test, m_beta
from .rk_eigen import ABOVE, BELOW, Offset, classify_limit, eigen_at_offset, \
    expected_divergent_branches, offset_of
from .shooting import find_discrete_spectrum_shooting

SCAN_RATIO = 0.85
SCAN_CLOSEST = 1e-14
CLUSTER_TOL = 1e-8
MAX_ROOTS = 64
TABLE_BRANCHES = 4
M_POINTS = 512


@dataclass(frozen=True)
class SpectrumEntry:
    c: float
    n: int
    k: int = 1

    def to_json(self):
        return {"c": self.c, "n": self.n, "k": self.k}


@dataclass
class DiscreteSpectrum:
    alpha: float
    beta: float
    entries: list = field(default_factory=list)
    truncation: dict = None    # {"k_max": int, "bound": float} when harmonics were cut off

    @property
    def speeds(self):
        return [e.c for e in self.entries]

    def __len__(self):
        return len(self.entries)

    def to_json(self):
        return {"alpha": self.alpha, "beta": self.beta,
                "entries": [e.to_json() for e in self.entries], "truncation": self.truncation}


def potential_bound(profile, beta):
    ys = np.linspace(profile.y1, profile.y2, 2049)
    return float(np.max(np.abs(profile._impl.eval(ys, 2) - beta)))


def root_distance(profile, beta, alpha):
    """Distance from the range beyond which every lambda_n(c) exceeds -alpha**2."""
    ground = (math.pi / profile.length) ** 2
    return max(potential_bound(profile, beta) / (ground + alpha ** 2), 1e-6) * 1.05


def log_schedule(far, closest=SCAN_CLOSEST, ratio=SCAN_RATIO, sub=1):
    """Distances from ``far`` down to ``closest`` on the lattice ratio**(j/sub).

    Using a fixed lattice lets scans for different wavenumbers share their
    eigenvalue evaluations.  Both end distances are included.
    """
    if far <= closest:
        return np.array([float(far)])
    lr = math.log(ratio)
    j0 = math.ceil(sub * math.log(far) / lr)
    j1 = math.floor(sub * math.log(closest) / lr)
    d = np.exp(lr * (np.arange(j0, j1 + 1) / sub))
    if d.size == 0 or d[0] < far * (1 - 1e-12):
        d = np.insert(d, 0, far)
    if d[-1] > closest * (1 + 1e-12):
        d = np.append(d, closest)
    return d


def _sides(profile, window, far):
    """(side, largest distance, smallest distance) triples covering ``window``."""
    q = profile.quantities
    if window is None:
        return [(BELOW, far, 0.0), (ABOVE, far, 0.0)]
    lo, hi = sorted(float(v) for v in window)
    if hi <= q.u_min:
        return [(BELOW, min(far, q.u_min - lo), q.u_min - hi)]
    if lo >= q.u_max:
        return [(ABOVE, min(far, hi - q.u_max), lo - q.u_max)]
    raise ParameterError("window must not meet the range of u")


def _speed(profile, side, d):
    q = profile.quantities
    return q.u_min - d if side == BELOW else q.u_max + d


def _table(profile, beta, side, ds, n_max, grid):
    return np.array([[s.lambda_ for s in eigen_at_offset(profile, beta, Offset(side, d), n_max,
                                                         grid, vectors=False)]
                     for d in ds])


def _variational_side(profile, beta, alpha, side, dmax, dmin, grid, max_roots):
    target = -alpha * alpha
    closest = max(dmin, SCAN_CLOSEST)
    if dmax <= closest:
        return []
    if expected_divergent_branches(profile, beta, side) == math.inf:
        raise SpectrumOverflowError(
            "every branch diverges at this edge, so crossings accumulate there", max_roots + 1)
    ds = log_schedule(dmax, closest)
    n_max = TABLE_BRANCHES
    while True:
        tab = _table(profile, beta, side, ds, n_max, grid)
        if np.all(tab[:, -1] > target):
            break
        if n_max > max_roots:
            raise SpectrumOverflowError(f"more than {max_roots} branches reach -alpha^2",
                                        n_max)
        n_max *= 2
    entries = []
    for n in range(1, n_max + 1):
        g = tab[:, n - 1] - target
        if np.all(g > 0):
            continue

        def f(d, n=n):
            return eigen_at_offset(profile, beta, Offset(side, d), n_max, grid,
                                   vectors=False)[n - 1].lambda_ - target
        for i in range(len(ds) - 1):
            if g[i] == 0.0:
                entries.append(SpectrumEntry(_speed(profile, side, ds[i]), n))
            elif g[i] * g[i + 1] < 0:
                d = brentq(f, ds[i + 1], ds[i], xtol=min(1e-13, ds[i + 1] * 1e-4), rtol=1e-14)
                entries.append(SpectrumEntry(_speed(profile, side, d), n))
        if len(entries) > max_roots:
            raise SpectrumOverflowError(f"more than {max_roots} crossings", len(entries))
    return entries


def find_discrete_spectrum(profile, beta, alpha, window=None, k=1, method="variational",
                           grid=None, max_roots=MAX_ROOTS):
    """Isolated real eigenvalues for wavenumber ``alpha`` as a DiscreteSpectrum.

    ``method`` is "variational" (crossings of the Rayleigh-Kuo eigencurves)
    or "shooting" (zeros of the boundary value of the shot solution).  Only
    the variational method reports the branch index; shooting entries carry
    n = 0.
    """
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    far = root_distance(profile, beta, alpha)
    entries = []
    if method == "variational":
        for side, dmax, dmin in _sides(profile, window, far):
            entries += _variational_side(profile, beta, alpha, side, dmax, dmin, grid, max_roots)
    elif method == "shooting":
        for side, dmax, dmin in _sides(profile, window, far):
            q = profile.quantities
            edge = q.u_min if side == BELOW else q.u_max
            sgn = -1 if side == BELOW else 1
            win = (edge + sgn * max(dmin, 0.0), edge + sgn * dmax)
            if dmin == 0.0:
                win = (edge + sgn * 1e-300, win[1])
            entries += [SpectrumEntry(c, 0) for c in
                        find_discrete_spectrum_shooting(profile, beta, alpha, win, max_roots)]
    else:
        raise ParameterError(f"unknown method {method!r}")
    entries = [SpectrumEntry(e.c, e.n, k) for e in entries]
    return DiscreteSpectrum(float(alpha), float(beta), sorted(entries, key=lambda e: e.c))


def _branch_inf(profile, beta, n, side, far, grid, limit=None, sub=1):
    """Infimum of lambda_n over one exterior side.

    Grid minimum over the log-clustered lattice, refined by bounded scalar
    minimization in log-distance, and compared with the edge limit when one
    is supplied.
    """
    n_max = max(TABLE_BRANCHES, n)
    ds = log_schedule(far, SCAN_CLOSEST, sub=sub)
    vals = _table(profile, beta, side, ds, n_max, grid)[:, n - 1]
    i = int(np.argmin(vals))
    best, arg = float(vals[i]), float(ds[i])
    if 0 < i < len(ds) - 1:
        def f(t):
            return eigen_at_offset(profile, beta, Offset(side, math.exp(t)), n_max, grid,
                                   vectors=False)[n - 1].lambda_
        res = minimize_scalar(f, bounds=(math.log(ds[i + 1]), math.log(ds[i - 1])),
                              method="bounded", options={"xatol": 1e-6})
        if res.fun < best:
            best, arg = float(res.fun), float(math.exp(res.x))
    if limit is not None and limit < best:
        best, arg = float(limit), 0.0
    return best, arg


def _relevant_side(beta):
    return BELOW if beta > 0 else ABOVE


def _limit_or_none(profile, beta, n, side, grid):
    """Converged edge limit of lambda_n, or None when it cannot be decided."""
    try:
        v = classify_limit(profile, beta, n, side, grid)
    except IndeterminateLimitError:
        return None, None
    return (None if v.diverges else v.value), v


def M_beta_estimate(profile, beta, points=M_POINTS, grid=None):
    """-inf of lambda_{m_beta + 1}(c) over the exterior side selected by beta."""
    q = profile.quantities
    beta = float(beta)
    if beta > 0:
        ok = ExtendedReal.finite(beta) <= q.kappa_plus.scale(9 / 8)
    elif beta < 0:
        ok = ExtendedReal.finite(beta) >= q.kappa_minus.scale(9 / 8)
    else:
        ok = False
    if not ok:
        raise ParameterError("beta is outside the range where M_beta is finite")
    side = _relevant_side(beta)
    n = m_beta(profile, beta) + 1
    limit, verdict = _limit_or_none(profile, beta, n, side, grid)
    if verdict is not None and verdict.diverges:
        raise ContradictionError(f"lambda_{n} diverges at the edge although M_beta must be finite")
    far = max(potential_bound(profile, beta) / (math.pi / profile.length) ** 2, 1.0) * 1.05
    sub = 1
    while len(log_schedule(far, SCAN_CLOSEST, sub=sub)) < points:
        sub += 1
    best, _ = _branch_inf(profile, beta, n, side, far, grid, limit, sub)
    return -best


def Lambda_beta(profile, beta, grid=None):
    """sup over exterior c of max(-lambda_1(c), 0) as an ExtendedReal."""
    beta = float(beta)
    if beta == 0:
        raise ParameterError("beta must be nonzero")
    side = _relevant_side(beta)
    limit, verdict = _limit_or_none(profile, beta, 1, side, grid)
    if verdict is not None and verdict.diverges:
        return ExtendedReal.pos_inf()
    far = potential_bound(profile, beta) / (math.pi / profile.length) ** 2 * 1.05
    worst = math.inf
    for s in (BELOW, ABOVE):
        best, _ = _branch_inf(profile, beta, 1, s, far, grid, limit if s == side else None)
        worst = min(worst, best)
    return ExtendedReal.finite(max(-worst, 0.0))


def beta_l_estimate(profile, lo=None, hi=0.0, xtol=1e-6, grid=None, ratio=0.7, closest=1e-10):
    """Largest negative beta below which inf_{c > u_max} lambda_1(c) turns negative.

    Root of g(beta) = inf lambda_1 over the upper side, bracketed by ``lo``
    (default kappa_-, where g < 0) and a point just below zero.  The infimum
    uses a coarser lattice than the root scans since only its sign matters
    near the root.
    """
    q = profile.quantities
    if lo is None:
        if not q.kappa_minus.is_finite:
            raise UnsupportedProfileError("no interior maximum: the lower bracket must be given")
        lo = q.kappa_minus.value
    bound = lambda b: potential_bound(profile, b) / (math.pi / profile.length) ** 2 * 1.05  # noqa: E731

    def g(b):
        ds = log_schedule(bound(b), closest, ratio)
        vals = _table(profile, b, ABOVE, ds, TABLE_BRANCHES, grid)[:, 0]
        i = int(np.argmin(vals))
        if 0 < i < len(ds) - 1:
            f = lambda t: eigen_at_offset(profile, b, Offset(ABOVE, math.exp(t)), TABLE_BRANCHES,  # noqa: E731
                                          grid, vectors=False)[0].lambda_
            res = minimize_scalar(f, bounds=(math.log(ds[i + 1]), math.log(ds[i - 1])),
                                  method="bounded", options={"xatol": 1e-6})
            return min(float(vals[i]), float(res.fun))
        return float(vals[i])

    a, b = float(lo), min(float(hi), -abs(xtol))
    if g(a) >= 0:
        raise ParameterError("inf lambda_1 is already nonnegative at the lower bracket")
    if g(b) < 0:
        raise ParameterError("inf lambda_1 is negative at the upper bracket")
    return brentq(g, a, b, xtol=xtol)


def assumption_flags(profile, beta):
    """Status of the structural hypotheses that the counting theory relies on.

    The one-spectral-point conditions cannot be checked from the profile
    alone and are always reported as unverified.  The endpoint conditions are
    checked from derivative values where that is decisive.
    """
    imp = profile._impl
    flags = [{"name": "E+" if beta > 0 else "E-", "status": "unverified",
              "detail": "one spectral point condition for small wavenumbers"}]
    L = profile.length
    for i, y in ((1, profile.y1), (2, profile.y2)):
        d1 = float(imp.eval(np.asarray(y), 1))
        b_i = float(imp.eval(np.asarray(y), 2))
        d3 = float(imp.eval(np.asarray(y), 3))
        scale = max(1.0, abs(b_i)) / L
        q = profile.quantities
        if abs(d1) <= 1e-12 * max(q.u_max - q.u_min, 1e-300) / L:
            d1 = 0.0
        if b_i * d1 * (-1) ** i >= 0:
            status, cond = "holds", "iii"
        elif abs(d3) > 1e-9 * scale:
            status, cond = "holds", "ii"
        else:
            ys = np.linspace(y - 0.05 * L if i == 2 else y, y + 0.05 * L if i == 1 else y, 33)
            flat = np.max(np.abs(imp.eval(ys, 2) - b_i)) <= 1e-12 * max(1.0, abs(b_i))
            status, cond = ("holds", "i") if flat else ("unverified", None)
        flags.append({"name": f"endpoint y{i}", "status": status, "condition": cond})
    return flags


@dataclass
class FamilyCountReport:
    alpha: float
    beta: float
    theta: dict                     # {"finite": n} or {"infinite": {"witness": [...]}}
    harmonics: list                 # [{"k": k, "roots": [...]}]
    lambda_hat: ExtendedReal
    m_beta: int                     # None where beta is beyond 9 kappa/8
    M_beta_hat: float = None
    assumptions: list = field(default_factory=list)

    @property
    def is_infinite(self):
        return "infinite" in self.theta

    @property
    def count(self):
        return math.inf if self.is_infinite else self.theta["finite"]

    def to_json(self):
        return {"alpha": self.alpha, "beta": self.beta, "theta": self.theta,
                "harmonics": self.harmonics, "lambda_hat": self.lambda_hat.to_json(),
                "m_beta": self.m_beta, "M_beta_hat": self.M_beta_hat,
                "assumptions": self.assumptions}


def union_count(values, tol=CLUSTER_TOL):
    """Number of distinct reals, merging those closer than ``tol``."""
    vals = sorted(values)
    count = 0
    last = None
    for v in vals:
        if last is None or v - last > tol:
            count += 1
        last = v
    return count


def family_count(profile, beta, T, grid=None, method="variational"):
    """Count traveling-wave families of minimal period T through the harmonics of 2 pi/T."""
    beta = float(beta)
    if beta == 0:
        raise ParameterError("beta must be nonzero")
    if not T > 0:
        raise ParameterError("period must be positive")
    alpha = 2 * math.pi / T
    side = _relevant_side(beta)
    try:
        m = m_beta(profile, beta)
    except ParameterError:
        m = None        # undefined beyond the transitional values
    flags = assumption_flags(profile, beta)
    verdict = None
    try:
        verdict = classify_limit(profile, beta, 1, side, grid)
    except IndeterminateLimitError:
        flags.append({"name": "edge limit of lambda_1", "status": "indeterminate"})
    if verdict is not None and verdict.diverges:
        witness = [[_speed(profile, side, d), v] for d, v in verdict.witness]
        return FamilyCountReport(alpha, beta, {"infinite": {"witness": witness}}, [],
                                 ExtendedReal.pos_inf(), m, None, flags)
    lam = Lambda_beta(profile, beta, grid=grid)
    k_max = int(math.ceil(math.sqrt(lam.value) / alpha)) if lam.value > 0 else 0
    harmonics = []
    speeds = []
    for k in range(1, k_max + 1):
        try:
            spec = find_discrete_spectrum(profile, beta, k * alpha, k=k, method=method, grid=grid)
        except SpectrumOverflowError as exc:
            return FamilyCountReport(alpha, beta,
                                     {"infinite": {"witness": [], "overflow": exc.count, "k": k}},
                                     harmonics, lam, m, None, flags)
        roots = spec.speeds
        harmonics.append({"k": k, "roots": roots})
        speeds += roots
    return FamilyCountReport(alpha, beta, {"finite": union_count(speeds)}, harmonics, lam, m,
                             None, flags)


def krein_signature(profile, beta, c_star, n, grid=None):
    """-(c* - u_beta) lambda_n'(c*) with a central difference for the derivative."""
    beta = float(beta)
    if beta == 0:
        raise ParameterError("beta must be nonzero")
    try:
        cert = class_K_plus_test(profile, beta)
    except ParameterError as exc:
        raise UnsupportedProfileError(str(exc)) from None
    if cert is None:
        raise UnsupportedProfileError(f"no u_beta exists for beta={beta!r}")
    off = offset_of(profile, c_star)
    h = max(1e-6, 1e-4 * off.delta)
    h = min(h, 0.5 * off.delta)

    def lam(d):
        return eigen_at_offset(profile, beta, Offset(off.side, d), n, grid,
                               vectors=False)[n - 1].lambda_
    # c = edge -/+ d, so d/dc = -/+ d/dd.
    dlam_dd = (lam(off.delta + h) - lam(off.delta - h)) / (2 * h)
    slope = -dlam_dd if off.side == BELOW else dlam_dd
    return -(float(c_star) - cert.u_beta) * slope
