"""Command line front end: ``kuo-spectra <command> [options]``.

Every command writes its report files into ``--out`` and prints their paths.
Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 failed assumption or precondition.
"""

import argparse
import math
import os
import sys
from dataclasses import dataclass, field


def _thread_cap():
    raw = os.environ.get("KUO_SPECTRA_THREADS")
    if raw is None:
        return None
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        return raw
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(n))
    return n


# BLAS reads its thread count when numpy is first imported, so the cap has to
# be exported before the numerical modules load.
THREADS = _thread_cap()

import numpy as np  # noqa: E402

from . import __version__  # noqa: E402
from .errors import ConfigError, KuoSpectraError  # noqa: E402
from .profile import builtin, load_profile  # noqa: E402
from .reporting import ensure_dir, save_svg, tag, write_json  # noqa: E402

COMMANDS = ("analyze-profile", "eigencurve", "count-families", "sinus-regions", "hardy",
            "bifurcate")


@dataclass
class RunConfig:
    command: str
    profile_ref: str
    profile: object
    beta: float = None
    alpha: float = None
    out: str = "kuo_out"
    grid: int = None
    seed: int = 0
    options: dict = field(default_factory=dict)

    @property
    def period(self):
        return None if self.alpha is None else 2 * math.pi / self.alpha

    def provenance(self):
        return {"command": self.command, "profile": self.profile_ref, "beta": self.beta,
                "alpha": self.alpha, "grid": self.grid, "seed": self.seed,
                "threads": THREADS if isinstance(THREADS, int) else 1,
                "version": __version__}


def _floats(text):
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--builtin", metavar="NAME", help="sinus, couette or poiseuille")
    src.add_argument("--profile", metavar="PATH", help="profile config file (JSON)")
    common.add_argument("--beta", type=float, metavar="F")
    wave = common.add_mutually_exclusive_group()
    wave.add_argument("--alpha", type=float, metavar="F", help="wavenumber")
    wave.add_argument("--period", type=float, metavar="F", help="x-period T = 2 pi/alpha")
    common.add_argument("--out", default="kuo_out", metavar="DIR")
    common.add_argument("--grid", type=int, metavar="N", help="resolution override")
    common.add_argument("--seed", type=int, default=0, metavar="N")

    parser = argparse.ArgumentParser(prog="kuo-spectra", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze-profile", parents=[common],
                   help="characteristic quantities of a profile")
    p = sub.add_parser("eigencurve", parents=[common], help="eigenvalue curves lambda_n(c)")
    p.add_argument("--n", type=int, default=3, help="number of branches")
    p.add_argument("--c", type=_floats, help="explicit speeds (one side of the range)")
    p.add_argument("--side", choices=("below", "above"),
                   help="side of the range for the default schedule")
    p.add_argument("--points", type=int, default=24)
    sub.add_parser("count-families", parents=[common], help="number of traveling-wave families")
    p = sub.add_parser("sinus-regions", parents=[common], help="region map of the sinus flow")
    p.add_argument("--alpha-range", type=_floats, default=[0.05, 4.0])
    p.add_argument("--beta-range", type=_floats, default=[-0.7, 0.7],
                   help="in units of pi^2")
    p.add_argument("--lattice", type=int, nargs=2, default=[30, 29], metavar=("NA", "NB"))
    p = sub.add_parser("hardy", parents=[common], help="Hardy inequality checks and witnesses")
    p.add_argument("--eps", type=_floats, default=[0.5, 0.05, 0.005])
    p.add_argument("--R", type=_floats, default=[10.0, 12.0, 14.0])
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--cases", type=int, default=100, help="random piecewise linear checks")
    p = sub.add_parser("bifurcate", parents=[common], help="bifurcating traveling waves")
    p.add_argument("--k-star", type=int, default=1)
    p.add_argument("--c0", type=float, help="isolated eigenvalue to start from")
    p.add_argument("--gammas", type=_floats, default=[1e-3, 2e-3, 4e-3])
    p.add_argument("--modes", type=int, default=32)
    return parser


def config_from_args(args):
    if args.profile:
        profile, ref = load_profile(args.profile), args.profile
    else:
        name = args.builtin or "sinus"
        profile, ref = builtin(name), name
    alpha = args.alpha
    if args.period is not None:
        if not args.period > 0:
            raise ConfigError("period must be positive")
        alpha = 2 * math.pi / args.period
    if alpha is not None and not alpha > 0:
        raise ConfigError("alpha must be positive")
    if args.grid is not None and args.grid < 8:
        raise ConfigError("grid must be at least 8")
    if isinstance(THREADS, str):
        raise ConfigError(f"KUO_SPECTRA_THREADS must be a positive integer, got {THREADS!r}")
    skip = {"builtin", "profile", "beta", "alpha", "period", "out", "grid", "seed", "command"}
    options = {k: v for k, v in vars(args).items() if k not in skip}
    return RunConfig(args.command, ref, profile, args.beta, alpha, args.out, args.grid,
                     args.seed, options)


def _need(cfg, *names):
    for name in names:
        if getattr(cfg, name) is None:
            flag = "--alpha or --period" if name == "alpha" else f"--{name}"
            raise ConfigError(f"{cfg.command} needs {flag}")


def _spectral_grid(cfg):
    from .rk_eigen import SpectralGrid
    return None if cfg.grid is None else SpectralGrid(N=max(cfg.grid, 32))


def _out(cfg, name):
    return os.path.join(ensure_dir(cfg.out), name)


# --- commands -----------------------------------------------------------------

def cmd_analyze_profile(cfg):
    from .profile import class_K_plus_test, m_beta
    from .spectrum import assumption_flags
    p = cfg.profile
    q = p.quantities
    report = {"provenance": cfg.provenance(), "profile": p.to_json()}
    for key, val in q.to_json().items():
        report[key] = tag(val)
    report["critical_points"] = tag([{"y": c.y, "u": c.u, "u2": c.u2, "interior": c.interior}
                                     for c in q.critical_points])
    report["transitional_factor"] = tag(9 / 8, "paper_constant")
    if cfg.beta is not None:
        report["m_beta"] = tag(m_beta(p, cfg.beta))
        try:
            cert = class_K_plus_test(p, cfg.beta)
        except KuoSpectraError as exc:
            report["class_K_plus"] = tag({"status": "not applicable", "reason": str(exc)})
        else:
            report["class_K_plus"] = tag(None if cert is None else
                                         {"u_beta": cert.u_beta, "K_min": cert.K_min,
                                          "K_max": cert.K_max})
        if cfg.beta != 0:
            report["assumptions"] = tag(assumption_flags(p, cfg.beta))
    return [write_json(_out(cfg, "analyze_profile.json"), report)]


def _default_schedule(cfg, side):
    q = cfg.profile.quantities
    d = np.geomspace(2.0, 1e-3, cfg.options["points"])
    return list(q.u_min - d) if side == "below" else list(q.u_max + d[::-1])[::-1]


def cmd_eigencurve(cfg):
    from .rk_eigen import trace_eigencurve, write_eigencurve_csv
    _need(cfg, "beta")
    opts = cfg.options
    if opts["n"] < 1:
        raise ConfigError("--n must be at least 1")
    if opts["c"]:
        cs = sorted(opts["c"])
        if cs[0] < cfg.profile.quantities.u_min:
            cs = cs[::-1]
    else:
        side = opts["side"] or ("above" if cfg.beta < 0 else "below")
        cs = _default_schedule(cfg, side)
    grid = _spectral_grid(cfg)
    samples = []
    for n in range(1, opts["n"] + 1):
        samples += trace_eigencurve(cfg.profile, cfg.beta, n, cs, grid)
    csv_path = _out(cfg, "eigencurve.csv")
    write_eigencurve_csv(csv_path, samples)
    svg_path = _out(cfg, "eigencurve.svg")
    _eigencurve_svg(svg_path, samples, cfg)
    return [csv_path, svg_path]


def _eigencurve_svg(path, samples, cfg):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(6, 4))
    for n in sorted({s.n for s in samples}):
        pts = sorted((s.c, s.lambda_) for s in samples if s.n == n)
        ax.plot([c for c, _ in pts], [v for _, v in pts], marker=".", lw=1, label=f"n = {n}")
    q = cfg.profile.quantities
    for edge in (q.u_min, q.u_max):
        ax.axvline(edge, color="0.6", lw=0.8, ls="--")
    ax.set_xlabel("c")
    ax.set_ylabel("lambda_n(c)")
    ax.set_title(f"{cfg.profile_ref}, beta = {cfg.beta:.6g}")
    ax.legend(frameon=False)
    fig.tight_layout()
    save_svg(fig, path)
    plt.close(fig)


def cmd_count_families(cfg):
    from .spectrum import family_count
    _need(cfg, "beta", "alpha")
    rep = family_count(cfg.profile, cfg.beta, cfg.period, grid=_spectral_grid(cfg))
    body = rep.to_json()
    report = {"provenance": cfg.provenance(), **{k: tag(v) for k, v in body.items()}}
    report["alpha"] = tag(cfg.alpha, "computed")
    report["beta"] = tag(cfg.beta, "computed")
    if cfg.profile_ref == "sinus":
        from .sinus_oracle import region_classify, theta_formula
        try:
            report["theta_formula"] = tag(theta_formula(cfg.alpha, cfg.beta).to_json(),
                                          "closed_form")
            report["region"] = tag(region_classify(cfg.alpha, cfg.beta), "closed_form")
        except KuoSpectraError as exc:
            report["theta_formula"] = tag({"status": "unavailable", "reason": str(exc)},
                                          "closed_form")
    return [write_json(_out(cfg, "family_count.json"), report)]


def cmd_sinus_regions(cfg):
    from .sinus_oracle import PI2, region_lattice, write_region_csv, write_region_svg
    if cfg.profile_ref != "sinus":
        raise ConfigError("sinus-regions only applies to the builtin sinus profile")
    opts = cfg.options
    (a0, a1), (b0, b1) = opts["alpha_range"], opts["beta_range"]
    na, nb = opts["lattice"]
    if na < 2 or nb < 2 or not 0 < a0 < a1 or not b0 < b1:
        raise ConfigError("bad lattice ranges")
    alphas = np.linspace(a0, a1, na)
    betas = [b for b in np.linspace(b0, b1, nb) * PI2 if b != 0]
    rows = region_lattice(alphas, betas)
    csv_path, svg_path = _out(cfg, "sinus_regions.csv"), _out(cfg, "sinus_regions.svg")
    write_region_csv(csv_path, rows)
    write_region_svg(svg_path, rows)
    return [csv_path, svg_path]


def cmd_hardy(cfg):
    from .hardy import (bump_function, check_hardy, divergence_witness, optimality_sweep,
                        piecewise_linear, power_function)
    opts = cfg.options
    rng = np.random.default_rng(cfg.seed)
    checks = {"linear": check_hardy(piecewise_linear([0.0, 1.0], [0.0, 1.0], 0.0)),
              "bump": check_hardy(bump_function(-1.0, 1.0, -1.0)),
              "power_eps_0.01": check_hardy(power_function(0.01))}
    worst, failures = 0.0, 0
    for _ in range(opts["cases"]):
        tf = _random_piecewise(rng)
        r = check_hardy(tf)
        worst = max(worst, r.ratio)
        failures += not r.holds
    eps = opts["eps"]
    report = {"provenance": cfg.provenance(),
              "checks": tag({k: {"lhs": v.lhs, "rhs": v.rhs, "holds": v.holds}
                             for k, v in checks.items()}),
              "random_cases": tag({"count": opts["cases"], "failures": failures,
                                   "max_ratio": worst}),
              "optimality_sweep": tag([{"eps": e, "ratio": r}
                                       for e, r in zip(eps, optimality_sweep(eps))]),
              "optimality_limit": tag([{"eps": e, "ratio": 1 / (0.5 + e) ** 2} for e in eps],
                                      "closed_form"),
              "hardy_constant": tag(4.0, "paper_constant")}
    beta = cfg.beta if cfg.beta is not None else 0.6 * math.pi ** 2
    witnesses = []
    for R in opts["R"]:
        witnesses.append(divergence_witness(cfg.profile, beta, opts["n"], R).to_json())
    report["divergence_witness"] = tag({"beta": beta, "n": opts["n"], "runs": witnesses})
    return [write_json(_out(cfg, "hardy.json"), report)]


def _random_piecewise(rng):
    from .hardy import piecewise_linear
    a = rng.uniform(-5, 5)
    b = a + rng.uniform(0.1, 5)
    nodes = np.sort(np.concatenate([[a, b], rng.uniform(a, b, rng.integers(2, 8))]))
    values = rng.normal(size=nodes.size)
    j = rng.integers(0, nodes.size)
    values[j] = 0.0
    return piecewise_linear(nodes, values, nodes[j])


def cmd_bifurcate(cfg):
    from .bifurcation import (BifurcationGrid, continue_branch, steady_residual,
                              validate_concentration, write_streamline_svg)
    from .errors import ParameterError
    from .spectrum import find_discrete_spectrum
    _need(cfg, "beta", "alpha")
    opts = cfg.options
    k = opts["k_star"]
    c0 = opts["c0"]
    if c0 is None:
        spec = find_discrete_spectrum(cfg.profile, cfg.beta, k * cfg.alpha, k=k)
        below = [c for c in spec.speeds if c < cfg.profile.quantities.u_min]
        if not below:
            raise ParameterError(f"no isolated eigenvalue below min u for harmonic {k}")
        c0 = max(below)
    grid = BifurcationGrid(opts["modes"], cfg.grid or 128)
    states = continue_branch(cfg.profile, cfg.beta, c0, k, opts["gammas"], grid,
                             alpha=cfg.alpha)
    paths = []
    runs = []
    for i, s in enumerate(states):
        rec = s.to_json()
        rec["steady_residual"] = steady_residual(s, cfg.profile, cfg.beta)
        runs.append(rec)
        svg = _out(cfg, f"state_{i:02d}.svg")
        write_streamline_svg(svg, s, cfg.profile, cfg.beta)
        paths.append(svg)
    report = {"provenance": cfg.provenance(), "c0_input": tag(c0), "states": tag(runs)}
    if sum(1 for s in states if s.gamma != 0) >= 3:
        report["concentration"] = tag(validate_concentration(states, cfg.profile, cfg.beta))
    return [write_json(_out(cfg, "bifurcation.json"), report)] + paths


HANDLERS = {"analyze-profile": cmd_analyze_profile, "eigencurve": cmd_eigencurve,
            "count-families": cmd_count_families, "sinus-regions": cmd_sinus_regions,
            "hardy": cmd_hardy, "bifurcate": cmd_bifurcate}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        paths = HANDLERS[cfg.command](cfg)
    except KuoSpectraError as exc:
        print(f"kuo-spectra {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
