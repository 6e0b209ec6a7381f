"""Small-amplitude traveling waves bifurcating from the shear flow.

In a frame moving with speed c a steady flow with stream function psi solves

    -Lap psi + beta y = f_c(psi - c y),

where f_c is read off from the base flow: f_c(psi_0(y) - c y) = omega_0(y) + beta y
with psi_0' = u and omega_0 = -u'.  Writing psi = psi_0 + phi, the trivial
branch phi = 0 exists for every c < u_min, and nontrivial even-in-x solutions
branch off where c is an isolated eigenvalue of the Rayleigh-Kuo problem.

The perturbation is expanded in cos(m alpha x), m < M, times Chebyshev
collocation in y.  Near a simple eigenvalue c0 with mode chi the unknown is
rescaled as phi = gamma (chi cos(k alpha x) + w) with w orthogonal to the
mode, which keeps the Newton system well conditioned as gamma -> 0.
"""

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy.linalg import eigvals, eig, lu_factor, lu_solve
from scipy.interpolate import BarycentricInterpolator
from scipy.optimize import brentq

from .errors import ContinuationError, DegeneratePointError, ParameterError, ValidationError
from .rk_eigen import cheb
from .reporting import save_svg

TABLE_POINTS = 4097
NEWTON_STEPS = 5
BLEND_MARGIN = 0.1
NEWTON_TOL = 1e-12
NEWTON_MAX = 25
TRANSVERSAL_MIN = 1e-6


# --- the vorticity map --------------------------------------------------------

def _hermite5(s, f0, f1, f2):
    """Quintic with value and two derivatives (f0, f1, f2) at s = 0 and zero jets at 1."""
    h0 = 1 - 10 * s ** 3 + 15 * s ** 4 - 6 * s ** 5
    h1 = s - 6 * s ** 3 + 8 * s ** 4 - 3 * s ** 5
    h2 = (s ** 2 - 3 * s ** 3 + 3 * s ** 4 - s ** 5) / 2
    d0 = -30 * s ** 2 + 60 * s ** 3 - 30 * s ** 4
    d1 = 1 - 18 * s ** 2 + 32 * s ** 3 - 15 * s ** 4
    d2 = (2 * s - 9 * s ** 2 + 12 * s ** 3 - 5 * s ** 4) / 2
    e0 = -60 * s + 180 * s ** 2 - 120 * s ** 3
    e1 = -36 * s + 96 * s ** 2 - 60 * s ** 3
    e2 = (2 - 18 * s + 36 * s ** 2 - 20 * s ** 3) / 2
    return (f0 * h0 + f1 * h1 + f2 * h2,
            f0 * d0 + f1 * d1 + f2 * d2,
            f0 * e0 + f1 * e1 + f2 * e2)


class VorticityMap:
    """f_c on the real line: exact on I_c, a C^2 quintic blend to 0 outside.

    Call with ``order`` 0, 1 or 2 for the value and the first two derivatives.
    """

    def __init__(self, profile, beta, c):
        q = profile.quantities
        if not c < q.u_min:
            raise ParameterError(f"c = {c!r} must lie below min u = {q.u_min!r}")
        self.profile, self.beta, self.c = profile, float(beta), float(c)
        y1, y2 = profile.domain
        ys = np.linspace(y1, y2, TABLE_POINTS)
        self._ys, self._gs = ys, self.argument(ys)
        self.interval = (float(self._gs[0]), float(self._gs[-1]))
        self.margin = BLEND_MARGIN * (self.interval[1] - self.interval[0])
        self._lo = self._jet_at(np.asarray(y1))
        self._hi = self._jet_at(np.asarray(y2))

    def argument(self, y):
        """psi_0(y) - c y, strictly increasing because u - c > 0."""
        return self.profile.antiderivative(y) - self.c * np.asarray(y, dtype=float)

    def inverse(self, t):
        """y in [y1, y2] with psi_0(y) - c y = t, for t in I_c."""
        t = np.asarray(t, dtype=float)
        y = np.interp(t, self._gs, self._ys)
        y1, y2 = self.profile.domain
        for _ in range(NEWTON_STEPS):
            slope = self.profile._impl.eval(y, 0) - self.c
            y = np.clip(y - (self.argument(y) - t) / slope, y1, y2)
        return y

    def _jet_at(self, y):
        imp = self.profile._impl
        u, u1, u2, u3 = (imp.eval(y, k) for k in range(4))
        w = u - self.c
        f0 = -u1 + self.beta * y
        f1 = (self.beta - u2) / w
        f2 = (-u3 * w - (self.beta - u2) * u1) / w ** 3
        return f0, f1, f2

    def __call__(self, t, order=0):
        t = np.asarray(t, dtype=float)
        lo, hi = self.interval
        out = np.zeros_like(t)
        inside = (t >= lo) & (t <= hi)
        if np.any(inside):
            out[inside] = self._jet_at(self.inverse(t[inside]))[order]
        m = self.margin
        for mask, s, jet, sign in (((t > hi) & (t < hi + m), (t - hi) / m, self._hi, 1.0),
                                   ((t < lo) & (t > lo - m), (lo - t) / m, self._lo, -1.0)):
            if np.any(mask):
                f0, f1, f2 = (float(v) for v in jet)
                vals = _hermite5(s[mask], f0, sign * m * f1, m * m * f2)
                out[mask] = vals[order] * (sign / m) ** order
        return out


def build_vorticity_map(profile, beta, c):
    """The map f_c with f_c(psi_0(y) - c y) = omega_0(y) + beta y on the channel."""
    return VorticityMap(profile, beta, c)


# --- discretization -----------------------------------------------------------

@dataclass(frozen=True)
class BifurcationGrid:
    modes: int = 32          # cos(m alpha x), m = 0 .. modes - 1
    nodes: int = 128         # Chebyshev-Lobatto nodes in y, walls included

    def __post_init__(self):
        if self.modes < 2 or self.nodes < 8:
            raise ParameterError("BifurcationGrid needs modes >= 2 and nodes >= 8")


def _clenshaw_curtis(N):
    """Weights on [-1, 1] for the nodes cos(pi j / N)."""
    theta = np.pi * np.arange(N + 1) / N
    w = np.zeros(N + 1)
    v = np.ones(N - 1)
    inner = theta[1:-1]
    if N % 2 == 0:
        w[0] = w[N] = 1 / (N * N - 1)
        for k in range(1, N // 2):
            v -= 2 * np.cos(2 * k * inner) / (4 * k * k - 1)
        v -= np.cos(N * inner) / (N * N - 1)
    else:
        w[0] = w[N] = 1 / (N * N)
        for k in range(1, (N - 1) // 2 + 1):
            v -= 2 * np.cos(2 * k * inner) / (4 * k * k - 1)
    w[1:-1] = 2 * v / N
    return w


class _Discretization:
    def __init__(self, profile, beta, alpha, grid):
        self.profile, self.beta, self.alpha = profile, float(beta), float(alpha)
        self.M = grid.modes
        N = grid.nodes - 1
        x, D = cheb(N)
        y1, y2 = profile.domain
        scale = 2 / (y2 - y1)
        self.y = y1 + (x + 1) / scale
        self.D = D * scale
        self.D2 = self.D @ self.D
        self.wy = _clenshaw_curtis(N) / scale
        self.inner = slice(1, N)
        self.Ni = N - 1
        self.T = 2 * math.pi / self.alpha
        P = 3 * self.M
        self.x = self.T * np.arange(P) / P
        m = np.arange(self.M)
        self.k = m * self.alpha
        self.C = np.cos(np.outer(self.x, self.k))
        self.S = np.sin(np.outer(self.x, self.k))
        self.A = self.C.T * np.where(m == 0, 1.0, 2.0)[:, None] / P
        self.mode_weight = np.where(m == 0, 1.0, 0.5) * self.T
        imp = profile._impl
        self.u = imp.eval(self.y, 0)
        self.u2 = imp.eval(self.y, 2)
        self.psi0 = profile.antiderivative(self.y)
        self.omega0 = -imp.eval(self.y, 1)

    def l2(self, coeffs):
        """L^2(D_T) norm of sum_m coeffs[m](y) cos(m alpha x) (or sin)."""
        return math.sqrt(float(np.sum(self.mode_weight[:, None] * self.wy * coeffs ** 2)))

    def h1(self, coeffs):
        dy = coeffs @ self.D.T
        dx = coeffs * self.k[:, None]
        return math.sqrt(self.l2(coeffs) ** 2 + self.l2(dy) ** 2 + self.l2(dx) ** 2)

    def minus_laplacian(self, coeffs):
        return -(coeffs @ self.D2.T) + (self.k ** 2)[:, None] * coeffs

    def residual(self, phi, c, fmap=None):
        """-Lap phi - [f_c(psi_0 + phi - c y) - f_c(psi_0 - c y)] in mode space."""
        fmap = fmap or VorticityMap(self.profile, self.beta, c)
        base = self.psi0 - c * self.y
        t = base[None, :] + self.C @ phi
        f = self.A @ fmap(t)
        f[0] -= fmap(base)
        return self.minus_laplacian(phi) - f, fmap, t

    def coupling(self, fmap, t):
        """Mode-space matrices of multiplication by f_c'(t), one per interior node."""
        fp = fmap(t[:, self.inner], order=1)
        return np.einsum("mj,ji,jn->imn", self.A, fp, self.C)


# --- the linear problem at c0 -------------------------------------------------

def _interior_operator(disc, c, k):
    i = disc.inner
    pot = (disc.u2[i] - disc.beta) / (disc.u[i] - c)
    return -disc.D2[i, i] + np.diag(pot) + (k * disc.alpha) ** 2 * np.eye(disc.Ni)


def _nearest_zero(disc, c, k):
    w = eigvals(_interior_operator(disc, c, k))
    w = w[np.argmin(np.abs(w))]
    return float(w.real)


def refine_speed(disc, c_guess, k, width=1e-4):
    """Zero of the collocation eigenvalue nearest 0, bracketed around c_guess."""
    g = partial(_nearest_zero, disc, k=k)
    lo, hi = c_guess - width, c_guess + width
    q = disc.profile.quantities
    hi = min(hi, 0.5 * (c_guess + q.u_min))
    for _ in range(20):
        if g(lo) * g(hi) < 0:
            return brentq(g, lo, hi, xtol=1e-15, rtol=1e-15)
        width *= 2
        lo = c_guess - width
    raise ParameterError(f"no eigenvalue crossing near c = {c_guess!r} for harmonic {k}")


def _kernel_mode(disc, c0, k):
    w, v = eig(_interior_operator(disc, c0, k))
    j = int(np.argmin(np.abs(w)))
    chi = np.zeros(disc.y.size)
    chi[disc.inner] = v[:, j].real
    chi /= math.sqrt(float(np.sum(disc.wy * chi ** 2)))
    if chi[np.argmax(np.abs(chi))] < 0:
        chi = -chi
    return chi


def transversality(disc, c0, k, h=1e-6):
    """d/dc of the eigenvalue that vanishes at c0 (collocation, central difference)."""
    return (_nearest_zero(disc, c0 + h, k) - _nearest_zero(disc, c0 - h, k)) / (2 * h)


# --- states -------------------------------------------------------------------

@dataclass(frozen=True)
class TravelingWaveState:
    phi: np.ndarray              # (modes, nodes) cos(m alpha x) coefficients on the y nodes
    y: np.ndarray
    c: float
    gamma: float
    residual_l2: float
    min_horizontal_excess: float
    alpha: float
    k_star: int
    c0: float
    mode: np.ndarray = field(repr=False, default=None)
    newton_steps: int = 0

    @property
    def period(self):
        return 2 * math.pi / self.alpha

    def to_json(self):
        return {"c": self.c, "gamma": self.gamma, "c0": self.c0, "alpha": self.alpha,
                "period": self.period, "k_star": self.k_star,
                "residual_l2": self.residual_l2,
                "min_horizontal_excess": self.min_horizontal_excess,
                "newton_steps": self.newton_steps,
                "y": self.y.tolist(),
                "cos_coefficients": [{"m": m, "values": row.tolist()}
                                     for m, row in enumerate(self.phi)]}


def _horizontal_excess(disc, phi, c):
    uy = disc.u[None, :] + disc.C @ (phi @ disc.D.T)
    return float(np.min(uy - c))


def _state(disc, phi, c, gamma, res, k_star, c0, chi, steps):
    return TravelingWaveState(phi, disc.y, float(c), float(gamma), disc.l2(res),
                              _horizontal_excess(disc, phi, c), disc.alpha, k_star, float(c0),
                              chi, steps)


def _assemble_jacobian(disc, fmap, t, dc_column, k_star, chi):
    M, Ni = disc.M, disc.Ni
    n = M * Ni
    J = np.zeros((n + 1, n + 1))
    i = disc.inner
    L = -disc.D2[i, i]
    for m in range(M):
        blk = slice(m * Ni, (m + 1) * Ni)
        J[blk, blk] = L + disc.k[m] ** 2 * np.eye(Ni)
    G = disc.coupling(fmap, t)
    rows = np.arange(M)[:, None] * Ni
    for node in range(Ni):
        J[np.ix_(rows[:, 0] + node, rows[:, 0] + node)] -= G[node]
    J[:n, n] = dc_column
    J[n, k_star * Ni:(k_star + 1) * Ni] = disc.wy[i] * chi[i]
    return J


def continue_branch(profile, beta, c0, k_star, gamma_schedule, grid=None, *, alpha):
    """Newton continuation of the bifurcating branch through ``gamma_schedule``.

    ``c0`` is an approximate isolated real eigenvalue of harmonic ``k_star``
    at wavenumber ``alpha`` below min u; it is refined on the collocation grid.
    The amplitude is gamma = <phi_{k*}, chi> with chi the unit L^2 mode.
    """
    grid = grid or BifurcationGrid()
    if not 1 <= k_star < grid.modes:
        raise ParameterError(f"k_star must lie in 1..{grid.modes - 1}")
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    disc = _Discretization(profile, beta, alpha, grid)
    c0 = refine_speed(disc, float(c0), k_star)
    slope = transversality(disc, c0, k_star)
    if abs(slope) <= TRANSVERSAL_MIN:
        raise DegeneratePointError(
            f"lambda'(c0) = {slope:.3g}: degenerate bifurcation point is out of scope")
    chi = _kernel_mode(disc, c0, k_star)
    i = disc.inner
    M, Ni = disc.M, disc.Ni
    states = []
    c_prev = c0
    last_ok = None
    for gamma in sorted(gamma_schedule, key=abs):
        gamma = float(gamma)
        if gamma == 0.0:
            phi = np.zeros((M, disc.y.size))
            states.append(_state(disc, phi, c0, 0.0, phi, k_star, c0, chi, 0))
            continue
        base = np.zeros((M, disc.y.size))
        base[k_star] = chi
        w = np.zeros((M, disc.y.size))
        c = c_prev
        steps = 0
        while True:
            phi = gamma * (base + w)
            res, fmap, t = disc.residual(phi, c)
            if steps > 0 and disc.l2(res) < NEWTON_TOL:
                break
            if steps >= NEWTON_MAX or not np.all(np.isfinite(res)):
                raise ContinuationError(
                    f"Newton stalled at gamma = {gamma!r} (residual {disc.l2(res):.3g}); "
                    f"last converged gamma = {last_ok!r}")
            h = 1e-6 * max(1.0, abs(c))
            rp = disc.residual(phi, c + h)[0]
            rm = disc.residual(phi, c - h)[0]
            dc = ((rp - rm) / (2 * h))[:, i].ravel() / gamma
            J = _assemble_jacobian(disc, fmap, t, dc, k_star, chi)
            rhs = np.append(res[:, i].ravel() / gamma,
                            float(np.sum(disc.wy[i] * chi[i] * w[k_star, i])))
            step = lu_solve(lu_factor(J), rhs)
            w[:, i] -= step[:-1].reshape(M, Ni)
            c -= step[-1]
            steps += 1
            if not c < profile.quantities.u_min:
                raise ContinuationError(f"speed left the exterior at gamma = {gamma!r}; "
                                        f"last converged gamma = {last_ok!r}")
        states.append(_state(disc, phi, c, gamma, res, k_star, c0, chi, steps))
        c_prev, last_ok = c, gamma
    return states


# --- checks on converged states -----------------------------------------------

def _disc_for(state, profile, beta):
    grid = BifurcationGrid(state.phi.shape[0], state.y.size)
    return _Discretization(profile, beta, state.alpha, grid)


def steady_residual(state, profile, beta):
    """L^2 norm of (u_e - c) d_x omega_e + v_e (d_y omega_e + beta) at interior nodes."""
    disc = _disc_for(state, profile, beta)
    phi = state.phi
    i = disc.inner
    lap = -disc.minus_laplacian(phi)
    omega = disc.C @ (-lap)
    omega[:, :] += disc.omega0[None, :]
    omega_x = disc.S @ (disc.k[:, None] * lap)          # d_x of -sum lap_m cos
    omega_y = omega @ disc.D.T
    u_e = disc.u[None, :] + disc.C @ (phi @ disc.D.T)
    v_e = disc.S @ (disc.k[:, None] * phi)              # -d_x of sum phi_m cos
    r = (u_e - state.c) * omega_x + v_e * (omega_y + beta)
    r = r[:, i]
    return math.sqrt(float(np.sum(r ** 2 * disc.wy[i][None, :])) * disc.T / disc.x.size)


def quadratic_remainder(state):
    """||phi_gamma - gamma chi cos(k* alpha x)||_{L^2(D_T)} / gamma^2."""
    if state.gamma == 0:
        return 0.0
    diff = state.phi.copy()
    diff[state.k_star] -= state.gamma * state.mode
    T = state.period
    weight = np.where(np.arange(diff.shape[0]) == 0, 1.0, 0.5) * T
    N = state.y.size - 1
    wy = _clenshaw_curtis(N) * (state.y[0] - state.y[-1]) / 2
    return math.sqrt(float(np.sum(weight[:, None] * wy * diff ** 2))) / state.gamma ** 2


@dataclass(frozen=True)
class ConcentrationReport:
    gammas: list
    distances: list
    dominant_harmonics: list
    minimal_periods: list
    remainders: list
    speed_offsets: list

    @property
    def monotone(self):
        d = self.distances
        return all(b < a for a, b in zip(d[:-1], d[1:]))

    def to_json(self):
        return {"gammas": list(self.gammas), "distances": list(self.distances),
                "dominant_harmonics": list(self.dominant_harmonics),
                "minimal_periods": list(self.minimal_periods),
                "quadratic_remainders": list(self.remainders),
                "speed_offsets": list(self.speed_offsets), "monotone": self.monotone}


ENERGY_FLOOR = 1e-24


def validate_concentration(states, profile, beta, c0=None):
    """Distances of the normalized vertical velocity to the kernel mode chi sin(k* alpha x).

    States are taken in order of decreasing |gamma|; the distances must
    decrease strictly.
    """
    states = sorted((s for s in states if s.gamma != 0), key=lambda s: -abs(s.gamma))
    if len(states) < 3:
        raise ParameterError("need at least three nontrivial states")
    disc = _disc_for(states[0], profile, beta)
    k_star = states[0].k_star
    kernel = np.zeros_like(states[0].phi)
    kernel[k_star] = states[0].mode
    kernel /= disc.l2(kernel)
    dists, dom, periods = [], [], []
    for s in states:
        v = disc.k[:, None] * s.phi
        v = v / disc.l2(v)
        if np.sum(disc.wy * v[k_star] * kernel[k_star]) < 0:
            v = -v
        dists.append(disc.h1(v - kernel))
        energy = disc.mode_weight * np.sum(disc.wy * s.phi ** 2, axis=1)
        energy[0] = 0.0
        dom.append(int(np.argmax(energy)))
        present = [m for m in range(1, energy.size) if energy[m] > ENERGY_FLOOR * energy.max()]
        g = 0
        for m in present:
            g = math.gcd(g, m)
        periods.append(s.period / g if g else math.inf)
    ref = c0 if c0 is not None else states[0].c0
    report = ConcentrationReport([s.gamma for s in states], dists, dom, periods,
                                 [quadratic_remainder(s) for s in states],
                                 [s.c - ref for s in states])
    if not report.monotone:
        raise ValidationError(f"distances are not strictly decreasing: {dists}")
    return report


def write_streamline_svg(path, state, profile, beta, points=(160, 80)):
    """Streamlines psi_0 + phi - c y over one period, rasterized into an SVG."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    disc = _disc_for(state, profile, beta)
    xs = np.linspace(0, state.period, points[0])
    ys = np.linspace(profile.y1, profile.y2, points[1])
    # barycentric interpolation of the Chebyshev data onto a uniform raster
    rows = np.array([BarycentricInterpolator(disc.y, state.phi[m])(ys)
                     for m in range(state.phi.shape[0])])
    phi = np.cos(np.outer(xs, disc.k)) @ rows
    psi = profile.antiderivative(ys)[None, :] + phi - state.c * ys[None, :]
    fig, ax = plt.subplots(figsize=(8, 3))
    ax.contour(xs, ys, psi.T, levels=24, colors="k", linewidths=0.6)
    # everything below zorder 10 (the contour lines) is written as an image
    ax.set_rasterization_zorder(10)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"gamma = {state.gamma:.3g}, c = {state.c:.9g}")
    fig.tight_layout()
    save_svg(fig, path, dpi=120)
    plt.close(fig)
