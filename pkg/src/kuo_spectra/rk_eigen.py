"""Eigenvalue curves of the Rayleigh-Kuo operator.

For a speed ``c`` outside the range of ``u`` the operator

    L_c phi = -phi'' + (u'' - beta) / (u - c) phi,   phi(y1) = phi(y2) = 0

is a regular Sturm-Liouville operator whose potential develops a boundary
layer of width ~ sqrt(|c - edge|) around every point where ``u`` reaches the
nearby edge of its range.  It is discretized by the symmetric three-point
scheme on a mesh that is logarithmically graded toward those points, solved
with tridiagonal bisection plus inverse iteration, and the eigenvalues are
Richardson-extrapolated over three nested meshes.

Mesh nodes are stored as offsets from their nearest anchor point so that
``u - c`` is never formed by cancellation, even for ``|c - edge|`` near the
limits of double precision.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import (BranchAmbiguityError, IndeterminateLimitError,
                     ParameterError, ResolutionError)

BELOW = "at_u_min"
ABOVE = "at_u_max"

N_CAP = 65536
RICHARDSON_TOL = 1e-9
KAPPA_FLOOR_BAND = 0.1
W_FLOOR = 1e-6


@dataclass(frozen=True)
class SpectralGrid:
    """Resolution request for the finite difference discretization.

    ``N`` is the number of mesh intervals on the coarsest of the three nested
    meshes.  ``kind="graded"`` clusters nodes toward the points where ``u``
    meets the edge of its range; ``kind="uniform"`` switches grading off.
    """
    N: int = 512
    kind: str = "graded"
    spacing: float = 1 / 40
    richardson: bool = True

    def __post_init__(self):
        if self.N < 32:
            raise ParameterError("SpectralGrid needs N >= 32")
        if self.kind not in ("graded", "uniform"):
            raise ParameterError(f"unknown grid kind {self.kind!r}")


def as_grid(grid):
    if grid is None:
        return SpectralGrid()
    if isinstance(grid, SpectralGrid):
        return grid
    return SpectralGrid(N=int(grid))


@dataclass(frozen=True)
class Offset:
    """Speed ``c`` written as a side of the range plus a positive distance."""
    side: str
    delta: float

    def speed(self, profile):
        q = profile.quantities
        return q.u_min - self.delta if self.side == BELOW else q.u_max + self.delta


def offset_of(profile, c):
    q = profile.quantities
    if c < q.u_min:
        return Offset(BELOW, q.u_min - c)
    if c > q.u_max:
        return Offset(ABOVE, c - q.u_max)
    raise ParameterError(f"c={c!r} lies in the range [{q.u_min}, {q.u_max}] of u")


@dataclass
class Mesh:
    y: np.ndarray          # node positions, endpoints included
    anchor: np.ndarray     # anchor coordinate of each node
    s: np.ndarray          # node offset from its anchor
    h: np.ndarray          # interval lengths, size N
    denom: np.ndarray      # u - c at the nodes
    Xi: float

    @property
    def N(self):
        return self.h.size

    def coarsen(self, k):
        """Every k-th node; the graded meshes are nested because xi is uniform."""
        if k == 1:
            return self
        anc, sv, y = self.anchor[::k], self.s[::k], self.y[::k]
        same = anc[1:] == anc[:-1]
        h = np.where(same, sv[1:] - sv[:-1], y[1:] - y[:-1])
        return Mesh(y, anc, sv, h, self.denom[::k], self.Xi)


def _anchors(profile, off, beta=None):
    """(a, layer width, u(a) - edge) for every point where u meets the edge.

    Where u''(a) = beta the potential stays bounded at a and the limiting
    eigenfunction does not vanish there; resolving the layer below a small
    floor only feeds rounding noise into the tridiagonal Sturm counts, so the
    width is floored for such points.
    """
    q = profile.quantities
    pts = q.argmin_set if off.side == BELOW else q.argmax_set
    edge = q.u_min if off.side == BELOW else q.u_max
    imp = profile._impl
    out = []
    for a in pts:
        u1 = abs(float(imp.eval(np.asarray(a), 1)))
        u2 = abs(float(imp.eval(np.asarray(a), 2)))
        widths = []
        if u1 > 1e-10:
            widths.append(off.delta / u1)
        if u2 > 0:
            widths.append(math.sqrt(2 * off.delta / u2))
        w = min(widths) if widths else profile.length
        if beta is not None and u1 <= 1e-10 and u2 > 0:
            kappa = 2 * (float(imp.eval(np.asarray(a), 2)) - beta) / float(imp.eval(np.asarray(a), 2))
            if abs(kappa) < KAPPA_FLOOR_BAND:
                w = max(w, W_FLOOR * profile.length)
        out.append((float(a), w, float(imp.eval(np.asarray(a), 0)) - edge))
    return out


class _Map:
    """xi(y) = W0 (y - y1)/L + sum_a asinh((y - a)/w_a) - asinh((y1 - a)/w_a)."""

    def __init__(self, profile, anchors, graded=True):
        self.y1, self.y2 = profile.domain
        self.L = profile.length
        self.anchors = anchors if graded else []
        spans = [math.asinh((self.y2 - a) / w) - math.asinh((self.y1 - a) / w) for a, w, _ in self.anchors]
        self.W0 = max(1.0, 2 * sum(spans) / 3)
        self.base = [math.asinh((self.y1 - a) / w) for a, w, _ in self.anchors]
        self.Xi = self.W0 + sum(spans)

    def xi_local(self, k, t):
        """xi at the point a_k + w_k sinh(t)."""
        a, w, _ = self.anchors[k]
        s = w * np.sinh(t)
        y = a + s
        out = self.W0 * (y - self.y1) / self.L + t - self.base[k]
        for j, (b, wb, _) in enumerate(self.anchors):
            if j != k:
                out = out + np.arcsinh((y - b) / wb) - self.base[j]
        return out

    def xi(self, y):
        out = self.W0 * (y - self.y1) / self.L
        for j, (b, wb, _) in enumerate(self.anchors):
            out = out + np.arcsinh((y - b) / wb) - self.base[j]
        return out


def build_mesh(profile, off, N, graded=True, beta=None):
    """Nodes of the graded mesh with ``N`` intervals."""
    anchors = _anchors(profile, off, beta)
    m = _Map(profile, anchors, graded)
    y1, y2 = profile.domain
    xi_t = np.linspace(0.0, m.Xi, N + 1)
    anc = np.empty(N + 1)
    s = np.empty(N + 1)
    if not m.anchors:
        # uniform grid; offsets measured from the nearest edge anchor anyway
        a0 = anchors[0][0]
        y = y1 + (y2 - y1) * xi_t / m.Xi
        anc[:] = a0
        s[:] = y - a0
    else:
        pts = sorted(range(len(anchors)), key=lambda k: anchors[k][0])
        bounds = [y1] + [0.5 * (anchors[pts[i]][0] + anchors[pts[i + 1]][0]) for i in range(len(pts) - 1)] + [y2]
        xb = [float(m.xi(np.asarray(b))) for b in bounds]
        for zi, k in enumerate(pts):
            a, w, _ = anchors[k]
            # outer zones are open-ended: xi(y2) may round just below Xi
            lower = xi_t >= xb[zi] if zi > 0 else np.ones(N + 1, dtype=bool)
            upper = xi_t < xb[zi + 1] if zi < len(pts) - 1 else np.ones(N + 1, dtype=bool)
            sel = lower & upper
            target = xi_t[sel]
            lo = np.full(target.size, math.asinh((bounds[zi] - a) / w))
            hi = np.full(target.size, math.asinh((bounds[zi + 1] - a) / w))
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                below = m.xi_local(k, mid) < target
                lo = np.where(below, mid, lo)
                hi = np.where(below, hi, mid)
                if np.all(hi - lo <= 1e-15 * np.maximum(1.0, np.abs(hi))):
                    break
            t = 0.5 * (lo + hi)
            anc[sel] = a
            s[sel] = w * np.sinh(t)
        y = anc + s
    # pin the endpoints exactly
    for idx, yy in ((0, y1), (N, y2)):
        y[idx] = yy
        s[idx] = yy - anc[idx]
    same = anc[1:] == anc[:-1]
    h = np.where(same, s[1:] - s[:-1], y[1:] - y[:-1])
    if np.any(h <= 0):
        raise ResolutionError("mesh construction produced non-increasing nodes")
    imp = profile._impl
    shift = {a: du for a, _, du in anchors}
    sign = 1.0 if off.side == BELOW else -1.0
    denom = np.empty(N + 1)
    for a in np.unique(anc):
        sel = anc == a
        base = shift.get(float(a), float(imp.eval(np.asarray(a), 0)) - (profile.quantities.u_min
                                                                         if off.side == BELOW else profile.quantities.u_max))
        denom[sel] = profile.increment(a, s[sel]) + base + sign * off.delta
    return Mesh(y, anc, s, h, denom, m.Xi)


@dataclass
class GridFunction:
    y: np.ndarray
    values: np.ndarray
    weights: np.ndarray

    def dot(self, other):
        """L2 inner product, interpolating ``other`` onto this grid."""
        v = np.interp(self.y, other.y, other.values)
        return float(np.sum(self.weights * self.values * v))


@dataclass
class EigencurveSample:
    c: float
    n: int
    lambda_: float
    h1_norm: float
    eigenfunction: GridFunction = field(default=None, repr=False)
    error_estimate: float = 0.0
    offset: Offset = None

    @property
    def lam(self):
        return self.lambda_


def _tridiagonal(beta, mesh, profile):
    h = mesh.h
    m = 0.5 * (h[:-1] + h[1:])
    u2 = profile._impl.eval(mesh.y[1:-1], 2)
    pot = (u2 - beta) / mesh.denom[1:-1]
    d = (1 / h[:-1] + 1 / h[1:]) / m + pot
    e = -1 / (h[1:-1] * np.sqrt(m[:-1] * m[1:]))
    return d, e, m, pot


def _solve_mesh(profile, beta, mesh, n_max, vectors):
    d, e, m, pot = _tridiagonal(beta, mesh, profile)
    tiny = 4 * np.finfo(float).tiny
    if vectors:
        w, v = eigh_tridiagonal(d, e, select="i", select_range=(0, n_max - 1), tol=tiny)
        return w, v, m
    w = eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, n_max - 1), tol=tiny)
    return w, None, m


def base_resolution(profile, off, grid, beta=None):
    graded = grid.kind == "graded"
    m = _Map(profile, _anchors(profile, off, beta), graded)
    need = int(math.ceil(m.Xi / grid.spacing)) if graded else grid.N
    N = max(grid.N, need)
    return int(8 * math.ceil(N / 8))


def _richardson(raw):
    """Eliminate h^2 and h^4 error terms from eigenvalues on N, 2N, 4N."""
    l1, l2, l4 = raw
    r1a = (4 * l2 - l1) / 3
    r1b = (4 * l4 - l2) / 3
    r2 = (16 * r1b - r1a) / 15
    return r2, np.abs(r2 - r1b)


def _grid_function(mesh, vec, m, n):
    vals = np.zeros(mesh.y.size)
    vals[1:-1] = vec / np.sqrt(m)
    lead = vals[1] if abs(vals[1]) >= abs(vals[-2]) else vals[-2] * (-1) ** (n - 1)
    if lead < 0:
        vals = -vals
    weights = np.zeros(mesh.y.size)
    weights[1:-1] = m
    return GridFunction(mesh.y.copy(), vals, weights)


def h1_norm(mesh, values, weights):
    grad = np.sum(np.diff(values) ** 2 / mesh.h)
    return math.sqrt(grad + float(np.sum(weights * values ** 2)))


def eigen_at_offset(profile, beta, off, n_max, grid=None, vectors=True):
    """Lowest ``n_max`` eigenpairs of L_c with c given by ``off``."""
    grid = as_grid(grid)
    if off.delta <= 0 or not math.isfinite(off.delta):
        raise ParameterError("distance to the range must be positive and finite")
    if n_max < 1:
        raise ParameterError("n_max must be at least 1")
    if n_max > grid.N // 4:
        raise ResolutionError(f"n_max={n_max} exceeds N/4={grid.N // 4}")
    graded = grid.kind == "graded"
    N = base_resolution(profile, off, grid, beta)
    c = off.speed(profile)
    if not grid.richardson:
        mesh = build_mesh(profile, off, N, graded, beta)
        w, v, m = _solve_mesh(profile, beta, mesh, n_max, vectors)
        return _samples(c, off, mesh, w, v, m, np.zeros(n_max))
    key = None
    if not vectors:
        key = (profile.cache_key, float(beta), off.side, float(off.delta), int(n_max), grid)
        hit = _CACHE.get(key)
        if hit is not None:
            return _samples(c, off, None, hit[0], None, None, hit[1])
    raw = {}
    prev_err = math.inf
    while True:
        mesh = build_mesh(profile, off, 4 * N, graded, beta)
        for k, level in ((4, N), (2, 2 * N), (1, 4 * N)):
            if level not in raw or (vectors and k == 1):
                w, v, m = _solve_mesh(profile, beta, mesh.coarsen(k), n_max, vectors and k == 1)
                raw[level] = w
        lam, err = _richardson([raw[N], raw[2 * N], raw[4 * N]])
        tol = RICHARDSON_TOL * np.maximum(1.0, np.abs(lam))
        worst = float(np.max(err / tol))
        # Stop at the cap, or once doubling no longer helps: that is the
        # rounding floor of the bisection, not discretization error.
        if worst <= 1 or 8 * N > N_CAP or worst > 0.5 * prev_err:
            break
        prev_err = worst
        N *= 2
    if key is not None:
        if len(_CACHE) >= CACHE_SIZE:
            _CACHE.pop(next(iter(_CACHE)))
        _CACHE[key] = (lam, err)
        return _samples(c, off, None, lam, None, None, err)
    return _samples(c, off, mesh, lam, v, m, err)


CACHE_SIZE = 20000
_CACHE = {}


def clear_cache():
    _CACHE.clear()


def _samples(c, off, mesh, lam, v, m, err):
    out = []
    for i, val in enumerate(lam):
        gf = None
        h1 = float("nan")
        if v is not None:
            gf = _grid_function(mesh, v[:, i], m, i + 1)
            h1 = h1_norm(mesh, gf.values, gf.weights)
        out.append(EigencurveSample(float(c), i + 1, float(val), h1, gf, float(err[i]), off))
    return out


def eigenvalues(profile, beta, c, n_max, grid=None, vectors=True):
    """Lowest ``n_max`` eigenvalues of the Rayleigh-Kuo operator at speed ``c``."""
    return eigen_at_offset(profile, beta, offset_of(profile, c), n_max, grid, vectors)


def eigenvalue(profile, beta, c, n, grid=None):
    return eigenvalues(profile, beta, c, n, grid, vectors=False)[n - 1].lambda_


def rayleigh_quotient(profile, beta, sample):
    """Discrete Rayleigh quotient of the sample's eigenfunction on its own mesh."""
    off = sample.offset
    gf = sample.eigenfunction
    N = gf.y.size - 1
    mesh = build_mesh(profile, off, N, beta=beta)
    _, _, m, pot = _tridiagonal(beta, mesh, profile)
    phi = gf.values
    num = np.sum(np.diff(phi) ** 2 / mesh.h) + np.sum(pot * m * phi[1:-1] ** 2)
    return float(num / np.sum(m * phi[1:-1] ** 2))


def sign_changes(values, rel=1e-8):
    v = values[np.abs(values) > rel * np.max(np.abs(values))]
    return int(np.sum(v[1:] * v[:-1] < 0))


# --- branch tracing -------------------------------------------------------------

OVERLAP_MIN = 0.8


def trace_eigencurve(profile, beta, n, c_schedule, grid=None, max_bisect=6):
    """Follow branch ``n`` along a monotone schedule of speeds.

    Consecutive eigenfunctions must overlap by more than 0.8; when a step is
    too coarse to decide, intermediate speeds are inserted before giving up.
    """
    cs = [float(c) for c in c_schedule]
    if len(cs) > 1:
        diffs = np.diff(cs)
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ParameterError("c_schedule must be strictly monotone")
    offs = [offset_of(profile, c) for c in cs]
    if len({o.side for o in offs}) > 1:
        raise ParameterError("c_schedule crosses the range of u")
    nb = n + 1
    out = []
    prev = None
    for off in offs:
        cur = eigen_at_offset(profile, beta, off, nb, grid)
        if prev is not None:
            _match(profile, beta, prev, cur, n, nb, grid, max_bisect)
        out.append(cur[n - 1])
        prev = cur
    return out


def _best(prev_sample, cur):
    ov = [abs(prev_sample.eigenfunction.dot(s.eigenfunction)) for s in cur]
    k = int(np.argmax(ov))
    return k, ov


def _match(profile, beta, prev, cur, n, nb, grid, depth):
    k, ov = _best(prev[n - 1], cur)
    if k == n - 1 and ov[k] > OVERLAP_MIN:
        return
    if depth > 0:
        mid = Offset(prev[0].offset.side, math.sqrt(prev[0].offset.delta * cur[0].offset.delta))
        if not prev[0].offset.delta < mid.delta < cur[0].offset.delta and \
                not cur[0].offset.delta < mid.delta < prev[0].offset.delta:
            mid = Offset(mid.side, 0.5 * (prev[0].offset.delta + cur[0].offset.delta))
        between = eigen_at_offset(profile, beta, mid, nb, grid)
        _match(profile, beta, prev, between, n, nb, grid, depth - 1)
        _match(profile, beta, between, cur, n, nb, grid, depth - 1)
        return
    raise BranchAmbiguityError(
        f"branch {n} lost between c={prev[0].c!r} and c={cur[0].c!r} (overlaps {ov})",
        candidates=(cur[n - 1], cur[k]))


def write_eigencurve_csv(path, samples):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["c", "n", "lambda", "h1_norm"])
        for s in samples:
            wr.writerow([f"{s.c:.17g}", s.n, f"{s.lambda_:.17g}", f"{s.h1_norm:.17g}"])


# --- dense collocation oracle -------------------------------------------------

def cheb(N):
    """Chebyshev-Lobatto nodes on [-1, 1] and the differentiation matrix."""
    x = np.cos(np.pi * np.arange(N + 1) / N)
    cc = np.ones(N + 1)
    cc[0] = cc[-1] = 2
    cc *= (-1) ** np.arange(N + 1)
    X = np.tile(x, (N + 1, 1)).T
    dX = X - X.T
    D = np.outer(cc, 1 / cc) / (dX + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    return x, D


def dense_oracle_eigenvalues(profile, beta, c, n_max, N=256):
    """Eigenvalues from dense Chebyshev collocation; an independent check."""
    offset_of(profile, c)
    x, D = cheb(N)
    y1, y2 = profile.domain
    y = y1 + (x + 1) * (y2 - y1) / 2
    D2 = (D @ D)[1:-1, 1:-1] * (2 / (y2 - y1)) ** 2
    yi = y[1:-1]
    pot = (profile._impl.eval(yi, 2) - beta) / (profile._impl.eval(yi, 0) - c)
    A = -D2 + np.diag(pot)
    w = np.linalg.eigvals(A)
    w = np.sort(w.real[np.abs(w.imag) < 1e-8 * np.maximum(1, np.abs(w.real))])
    return w[:n_max]


# --- limits at the edge of the range ------------------------------------------

@dataclass(frozen=True)
class EdgePoint:
    """Local behaviour of the potential at a point where u meets the edge.

    For a critical point the limiting potential behaves like kappa / s**2;
    ``p = sqrt(1/4 + kappa)`` is the exponent governing how eigenvalues
    approach their limit, zero at the Hardy threshold.
    """
    a: float
    interior: bool
    critical: bool
    kappa: float
    p: float
    regime: str     # "linear", "sub", "critical", "super"


CRITICAL_BAND = 1e-9


def edge_points(profile, beta, side):
    q = profile.quantities
    pts = q.argmin_set if side == BELOW else q.argmax_set
    imp = profile._impl
    out = []
    for a in pts:
        interior = q.critical_points and any(cp.y == a and cp.interior for cp in q.critical_points)
        crit = any(cp.y == a for cp in q.critical_points)
        if not crit:
            out.append(EdgePoint(a, bool(interior), False, 0.0, 1.0, "linear"))
            continue
        u2 = float(imp.eval(np.asarray(a), 2))
        kappa = 2 * (u2 - beta) / u2
        disc = 0.25 + kappa
        if abs(disc) <= CRITICAL_BAND:
            regime, p = "critical", 0.0
        elif disc > 0:
            regime, p = "sub", math.sqrt(disc)
        else:
            regime, p = "super", 0.0
        out.append(EdgePoint(a, bool(interior), True, kappa, p, regime))
    return out


def expected_divergent_branches(profile, beta, side):
    """Branches forced to -infinity by the local structure (inf for all)."""
    pts = edge_points(profile, beta, side)
    if any(p.regime == "super" for p in pts):
        return math.inf
    return sum(1 for p in pts if p.interior and p.critical and p.kappa < 0)


@dataclass
class LimitVerdict:
    kind: str                # "diverges_to_minus_infinity" or "converges"
    value: float = None
    error: float = None
    samples: tuple = ()      # (distance, lambda) pairs
    witness: tuple = ()

    @property
    def diverges(self):
        return self.kind == DIVERGES

    def to_json(self):
        out = {"kind": self.kind, "samples": [[d, v] for d, v in self.samples]}
        if self.kind == CONVERGES:
            out.update(value=self.value, error=self.error)
        else:
            out["witness"] = [[d, v] for d, v in self.witness]
        return out


DIVERGES = "diverges_to_minus_infinity"
CONVERGES = "converges"
BASE_DECADES = 8
MAX_DECADES = 16


def _diverging(vals):
    if len(vals) < 4 or vals[-1] >= -1e3:
        return False
    steps = np.diff(vals[-4:])
    return bool(np.all(steps < 0) and np.all(np.abs(steps[1:]) > np.abs(steps[:-1])))


def _power_basis(points):
    exps = {1.0}
    for p in points:
        if p.regime == "sub":
            exps.update(k * p.p for k in range(1, 5))
    exps = sorted(e for e in exps if 0 < e < 2.5)
    merged = []
    for e in exps:
        if not merged or e - merged[-1] > 0.05:
            merged.append(e)
    logs = any(p.regime == "linear" for p in points)
    return merged, logs


def _fit_power(delta, vals, exps, logs):
    cols = [np.ones_like(delta)] + [delta ** e for e in exps]
    if logs:
        cols.append(delta * np.log(delta))
    A = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(A, vals, rcond=None)
    return coef[0]


def _fit_log(delta, vals, deg=3):
    """Limit of vals ~ L + sum_k a_k t**k with t = 1/(log(1/sqrt(delta)) + b)."""
    x = 0.5 * np.log(1 / delta)

    def resid(b):
        t = 1 / (x + b)
        A = np.vander(t, deg + 1, increasing=True)
        coef, *_ = np.linalg.lstsq(A, vals, rcond=None)
        return float(np.sum((A @ coef - vals) ** 2)), coef[0]

    lo = -0.9 * float(x.min())
    bs = np.linspace(lo, 25.0, 300)
    r = [resid(b)[0] for b in bs]
    i = int(np.argmin(r))
    a, c = bs[max(i - 1, 0)], bs[min(i + 1, bs.size - 1)]
    gr = (math.sqrt(5) - 1) / 2
    for _ in range(60):
        m1, m2 = c - gr * (c - a), a + gr * (c - a)
        if resid(m1)[0] < resid(m2)[0]:
            c = m2
        else:
            a = m1
    return resid(0.5 * (a + c))[1]


def extrapolate_limit(points, delta, vals):
    """Limit value and a spread-based error estimate."""
    delta = np.asarray(delta, dtype=float)
    vals = np.asarray(vals, dtype=float)
    if any(p.regime == "critical" for p in points):
        # regular O(delta) corrections spoil a logarithmic fit; use the deep tail
        fits = []
        for cut, deg in ((1e-8, 3), (1e-6, 3), (1e-8, 2)):
            sel = delta <= cut
            if np.count_nonzero(sel) < deg + 3:
                sel = np.arange(delta.size) >= delta.size - (deg + 3)
            fits.append(_fit_log(delta[sel], vals[sel], deg))
    else:
        exps, logs = _power_basis(points)
        fits = []
        for k in (0, 1, 2):
            d, v = delta[k:], vals[k:]
            use = exps[: max(1, min(len(exps), d.size - 2 - logs))]
            fits.append(_fit_power(d, v, use, logs))
    return fits[0], float(np.max(np.abs(np.array(fits) - fits[0])))


def classify_limit(profile, beta, n, side, grid=None, decades=BASE_DECADES, max_decades=MAX_DECADES):
    """Decide whether lambda_n(c) diverges or converges as c approaches the range.

    Samples at distances 10**-j, j = 1..decades.  When the local structure
    predicts a divergence that has not shown up yet, or the approach is only
    logarithmic, the schedule is extended to 10**-max_decades.
    """
    if side not in (BELOW, ABOVE):
        raise ParameterError(f"side must be {BELOW!r} or {ABOVE!r}")
    if (side == BELOW and not beta > 0) or (side == ABOVE and not beta < 0):
        raise ParameterError("side and the sign of beta are incompatible")
    pts = edge_points(profile, beta, side)
    forced = expected_divergent_branches(profile, beta, side)
    slow = any(p.regime == "critical" for p in pts) or \
        any(p.regime == "sub" and p.p < 0.5 for p in pts)
    samples = []
    errs = []

    def extend(upto):
        for j in range(len(samples) + 1, upto + 1):
            off = Offset(side, 10.0 ** -j)
            s = eigen_at_offset(profile, beta, off, n, grid, vectors=False)[n - 1]
            samples.append((off.delta, s.lambda_))
            errs.append(s.error_estimate)

    extend(decades)
    vals = [v for _, v in samples]
    if n <= forced and not _diverging(vals):
        extend(max_decades)
        vals = [v for _, v in samples]
    if _diverging(vals):
        k = next(i for i, v in enumerate(vals) if v < vals[0] - 1.0) if vals[-1] < vals[0] - 1.0 else 0
        return LimitVerdict(DIVERGES, samples=tuple(samples), witness=tuple(samples[max(k, len(samples) - 6):]))
    if n <= forced:
        raise IndeterminateLimitError(
            f"lambda_{n} is expected to diverge but the samples do not show it", samples)
    if slow:
        extend(max_decades)
    delta = np.array([d for d, _ in samples])
    vals = np.array([v for _, v in samples])
    tail = np.diff(vals[-5:])
    scale = max(1.0, float(np.max(np.abs(vals))))
    noise = max(10 * max(errs), 1e-12 * scale)
    wobbly = np.any(tail[1:] * tail[:-1] < 0) and np.max(np.abs(tail)) > 10 * noise
    if wobbly:
        raise IndeterminateLimitError(f"lambda_{n} samples are not monotone near the edge", samples)
    if np.max(np.abs(tail)) > noise and np.abs(tail[-1]) >= 0.999 * np.abs(tail[-2]):
        raise IndeterminateLimitError(f"lambda_{n} decrements do not shrink near the edge", samples)
    use = (delta <= 1e-2) & (np.array(errs) <= 1e-6 * scale)
    value, err = extrapolate_limit(pts, delta[use], vals[use])
    return LimitVerdict(CONVERGES, float(value), float(err), tuple(samples))
