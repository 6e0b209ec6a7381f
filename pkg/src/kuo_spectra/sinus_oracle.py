"""Closed-form reference values for the sinus profile u = (1 + cos(pi y))/2.

For this profile u'' - beta = pi**2 (u_beta - u) with u_beta = 1/2 - beta/pi**2,
which makes the edge limits of the Rayleigh-Kuo eigenvalues explicit and
splits the (alpha, beta) half plane into nine regions with known spectrum
counts.  Lambda_beta and beta_l enter some region boundaries and are only
available numerically; they are injected as hooks (a number or a callable
of beta) so that everything else here stays closed form.
"""

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ParameterError
from .extended import ExtendedReal
from .reporting import save_svg

PI2 = math.pi ** 2
BETA_PLUS = 9 * PI2 / 16
BETA_HALF = PI2 / 2
BETA_V = (math.sqrt(3) - 1) * PI2 / 4
GAMMA_TOL = 1e-9

REGIONS = ("I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "Gamma")
_COUNTS = {"IX": 0, "III": 1, "VII": 1, "IV": 2, "V": 2, "VI": 2, "II": 3, "Gamma": 1}


def r_of(beta):
    """r = 1/4 + sqrt(9/16 -+ beta/pi^2) for |beta| <= 9 pi^2/16, beta != 0."""
    beta = float(beta)
    if beta > 0 and beta <= BETA_PLUS:
        return 0.25 + math.sqrt(max(9 / 16 - beta / PI2, 0.0))
    if beta < 0 and beta >= -BETA_PLUS:
        return 0.25 + math.sqrt(max(9 / 16 + beta / PI2, 0.0))
    raise ParameterError(f"r is defined only for 0 < |beta| <= 9 pi^2/16, got {beta!r}")


def lambda_at_0(beta, n):
    """Limit of lambda_n(c) as c -> 0^- for beta in (0, 9 pi^2/16]."""
    if not (0 < beta <= BETA_PLUS):
        raise ParameterError("lambda_at_0 needs 0 < beta <= 9 pi^2/16")
    if n < 1:
        raise ParameterError("n must be at least 1")
    r = r_of(beta)
    return ((r + (n - 1) / 2) ** 2 - 1) * PI2


def lambda_at_1(beta, n):
    """Reference eigenvalue lambda_n(1) for beta in [-9 pi^2/16, 0)."""
    if not (-BETA_PLUS <= beta < 0):
        raise ParameterError("lambda_at_1 needs -9 pi^2/16 <= beta < 0")
    if n < 1:
        raise ParameterError("n must be at least 1")
    if beta == -BETA_HALF:
        return (n * n / 4 - 1) * PI2
    r = r_of(beta)
    return ((r - 0.5 + math.ceil(n / 2)) ** 2 - 1) * PI2


def limit_at_1(beta, n):
    """Limit of lambda_n(c) as c -> 1^+, or None where it diverges.

    Below -pi^2/2 the first branch escapes to -infinity and branch n + 1
    takes over the reference value of branch n.
    """
    if beta < -BETA_PLUS:
        return None
    if beta < -BETA_HALF:
        return None if n == 1 else lambda_at_1(beta, n - 1)
    return lambda_at_1(beta, n)


def lambda_beta_closed(beta):
    """Lambda_beta where it has a closed form, else None.

    Returns an ExtendedReal; the infinite cases are the ones where the first
    branch diverges at the nearby edge.
    """
    beta = float(beta)
    if beta < -BETA_HALF or beta > BETA_PLUS:
        return ExtendedReal.pos_inf()
    if beta == -BETA_HALF:
        return ExtendedReal.finite(3 * PI2 / 4)
    if (0 < beta <= BETA_V) or (BETA_HALF <= beta <= BETA_PLUS):
        r = r_of(beta)
        return ExtendedReal.finite((1 - r * r) * PI2)
    return None


def _hook(h, beta):
    v = h(beta) if callable(h) else h
    if isinstance(v, ExtendedReal):
        return v.to_float()
    return float(v)


def _lam(beta, hook):
    closed = lambda_beta_closed(beta)
    if closed is not None:
        return closed.to_float()
    if hook is None:
        raise ParameterError(f"Lambda_beta at beta={beta!r} needs a numeric hook")
    return _hook(hook, beta)


@lru_cache(maxsize=1)
def default_beta_l():
    """Numerical beta_l for the sinus profile (bisection on inf lambda_1)."""
    from .profile import sinus
    from .spectrum import beta_l_estimate
    return beta_l_estimate(sinus())


def default_lambda_hook(beta):
    from .profile import sinus
    from .spectrum import Lambda_beta
    return Lambda_beta(sinus(), beta)


def _near(a, b):
    return abs(a - b) <= GAMMA_TOL * max(1.0, abs(b))


def region_classify(alpha, beta, lambda_beta_hook=None, beta_l_hook=None):
    """Label of (alpha, beta) in the nine-region partition, or "Gamma"."""
    alpha, beta = float(alpha), float(beta)
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    if beta < -BETA_PLUS:
        return "I"
    if beta > BETA_PLUS:
        return "VIII"
    if beta < -BETA_HALF:
        r = r_of(beta)
        return "II" if alpha < math.pi * math.sqrt(-r * r - r + 0.75) else "III"
    if beta == -BETA_HALF:
        return "III" if alpha < math.sqrt(3) * math.pi / 2 else "IX"
    if beta < 0:
        bl = _hook(beta_l_hook if beta_l_hook is not None else default_beta_l(), beta)
        if beta >= bl:
            return "IX"
        s = math.sqrt(_lam(beta, lambda_beta_hook if lambda_beta_hook is not None
                           else default_lambda_hook))
        if _near(alpha, s):
            return "Gamma"
        return "IV" if alpha < s else "IX"
    if beta == 0:
        return "IX"
    if beta <= BETA_V:
        s = math.sqrt(_lam(beta, lambda_beta_hook))
        return "VII" if alpha < s else "IX"
    r = r_of(beta)
    a1 = math.pi * math.sqrt(1 - r * r)
    if beta < BETA_HALF:
        s = math.sqrt(_lam(beta, lambda_beta_hook if lambda_beta_hook is not None
                           else default_lambda_hook))
        if _near(alpha, s):
            return "Gamma"
        if alpha <= a1:
            return "VII"
        return "V" if alpha < s else "IX"
    am = math.pi * math.sqrt(max(-r * r - r + 0.75, 0.0))
    if alpha < am:
        return "VI"
    return "VII" if alpha < a1 else "IX"


def expected_spectrum_count(region):
    """Number of isolated real eigenvalues for a region label."""
    if region in ("I", "VIII"):
        return ExtendedReal.pos_inf()
    if region not in _COUNTS:
        raise ParameterError(f"unknown region label {region!r}")
    return ExtendedReal.finite(_COUNTS[region])


@dataclass(frozen=True)
class ThetaValue:
    """Exact count, infinity, or an inclusive bracket [lower, upper]."""
    kind: str            # "finite", "infinite" or "bounds"
    value: int = None
    lower: int = None
    upper: int = None

    def to_json(self):
        if self.kind == "finite":
            return {"finite": self.value}
        if self.kind == "infinite":
            return {"infinite": True}
        return {"bounds": [self.lower, self.upper]}

    def contains(self, n):
        if self.kind == "finite":
            return n == self.value
        if self.kind == "infinite":
            return n == math.inf
        return self.lower <= n <= self.upper


def theta_formula(alpha, beta, lambda_beta_hook=None, beta_l_hook=None):
    """Number of traveling-wave families for alpha = 2 pi/T from the case table."""
    alpha, beta = float(alpha), float(beta)
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    if beta == 0:
        raise ParameterError("theta is undefined at beta = 0")
    fin = lambda k: ThetaValue("finite", int(k))  # noqa: E731
    if beta < -BETA_HALF or beta > BETA_PLUS:
        return ThetaValue("infinite")
    if beta == -BETA_HALF:
        return fin(math.ceil(math.sqrt(3) * math.pi / (2 * alpha)) - 1)
    if beta < 0:
        bl = _hook(beta_l_hook if beta_l_hook is not None else default_beta_l(), beta)
        if beta >= bl:
            return fin(0)
        x = math.sqrt(_lam(beta, lambda_beta_hook if lambda_beta_hook is not None
                           else default_lambda_hook)) / alpha
        return fin(math.floor(x) + math.ceil(x) - 1)
    if beta <= BETA_V:
        x = math.sqrt(_lam(beta, lambda_beta_hook)) / alpha
        return fin(math.ceil(x) - 1)
    r = r_of(beta)
    a1 = math.pi * math.sqrt(1 - r * r)
    if beta < BETA_HALF:
        x = math.sqrt(_lam(beta, lambda_beta_hook if lambda_beta_hook is not None
                           else default_lambda_hook)) / alpha
        return fin(math.floor(x) + math.ceil(x) - math.floor(a1 / alpha) - 1)
    am = math.pi * math.sqrt(max(-r * r - r + 0.75, 0.0))
    n1 = math.ceil(a1 / alpha) - 1
    if alpha >= am:
        return fin(n1)
    return ThetaValue("bounds", lower=n1, upper=n1 + math.ceil(am / alpha) - 1)


def region_lattice(alphas, betas, lambda_beta_hook=None, beta_l_hook=None):
    """Rows (alpha, beta, region, expected_count) over the product lattice.

    The Lambda_beta hook is evaluated once per beta column.
    """
    rows = []
    bl = beta_l_hook
    for b in betas:
        cache = {}

        def hook(beta, b=b):
            if b not in cache:
                h = lambda_beta_hook if lambda_beta_hook is not None else default_lambda_hook
                cache[b] = _hook(h, beta)
            return cache[b]
        for a in alphas:
            label = region_classify(a, b, hook, bl)
            rows.append((float(a), float(b), label, expected_spectrum_count(label).to_json()))
    return rows


def write_region_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "beta", "region", "expected_count"])
        for a, b, label, cnt in rows:
            w.writerow([f"{a:.17g}", f"{b:.17g}", label, cnt if isinstance(cnt, str) else int(cnt)])


_COLORS = {"I": "#4c72b0", "II": "#55a868", "III": "#c44e52", "IV": "#8172b2", "V": "#ccb974",
           "VI": "#64b5cd", "VII": "#e17c05", "VIII": "#2f4b7c", "IX": "#dddddd", "Gamma": "#000000"}


def write_region_svg(path, rows):
    """Region map with beta on the horizontal axis and alpha vertical."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.patches import Patch

    alphas = np.array(sorted({r[0] for r in rows}))
    betas = np.array(sorted({r[1] for r in rows}))
    index = {lab: i for i, lab in enumerate(REGIONS)}
    img = np.full((alphas.size, betas.size), np.nan)
    ai = {a: i for i, a in enumerate(alphas)}
    bi = {b: j for j, b in enumerate(betas)}
    for a, b, label, _ in rows:
        img[ai[a], bi[b]] = index[label]
    from matplotlib.colors import ListedColormap
    cmap = ListedColormap([_COLORS[lab] for lab in REGIONS])
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.pcolormesh(betas / PI2, alphas, img, cmap=cmap, vmin=-0.5, vmax=len(REGIONS) - 0.5,
                  shading="nearest")
    ax.set_xlabel("beta / pi^2")
    ax.set_ylabel("alpha")
    present = [lab for lab in REGIONS if np.any(img == index[lab])]
    ax.legend(handles=[Patch(color=_COLORS[lab], label=lab) for lab in present],
              loc="upper center", ncol=len(present), fontsize=7, frameon=False)
    fig.tight_layout()
    save_svg(fig, path)
    plt.close(fig)
