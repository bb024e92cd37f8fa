"""Command-line front end: ``gsvi {check,grid,density,bounds,moments,oracle}``.

Exit codes: 0 success / no arbitrage, 1 arbitrage found, 2 configuration error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bs, butterfly, calendar, density
from .errors import ArbitrageError, ConfigError, DomainError, ParameterError, PreconditionError
from .surface import _PRESETS, PHI_KINDS, THETA_KINDS, SurfaceConfig, build_surface, eval_w_partials

EXIT_OK, EXIT_ARB, EXIT_CONFIG = 0, 1, 2

DEFAULT_T = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
DEFAULT_U = (0.1, 0.5, 1.0, 2.0, 3.0, 3.9)

EPILOG = """\
output columns
  grid     k,t,w,L,sigma2_loc   L is the smaller one-sided value at a kink;
                                sigma2_loc = dw/dt / L (nan where L <= 0)
  density  k,p_minus,p_plus,cdf then '# atom,k,mass' comment lines
  bounds   u,A_star,Y,numeric_bound,rel_diff for u in [0, 4)
  moments  alpha,alpha_fit,m_star,bracket_lo,bracket_hi,tail_rate
  check    JSON report (csv: condition,pass,margin)
  oracle   JSON report (csv: kind,t,k,min_margin,pass)

flags override values read from --config; numbers are printed with 17
significant digits.
"""


@dataclass
class RunConfig:
    surface: SurfaceConfig
    command: str
    k_min: float = -10.0
    k_max: float = 10.0
    k_n: int = 2001
    t_list: tuple[float, ...] = DEFAULT_T
    u_list: tuple[float, ...] = DEFAULT_U
    out: str | None = None
    fmt: str = "json"
    tol: float | None = None
    seed: int = 0
    samples: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.k_n < 3:
            raise ConfigError("--k-n must be at least 3")
        if not self.k_max > self.k_min:
            raise ConfigError("--k-max must exceed --k-min")
        if not self.t_list or any(t <= 0 for t in self.t_list):
            raise ConfigError("maturities must be positive")
        if any(b <= a for a, b in zip(self.t_list, self.t_list[1:])):
            raise ConfigError("maturities must be strictly increasing")
        if any(b <= a for a, b in zip(self.u_list, self.u_list[1:])):
            raise ConfigError("u values must be strictly increasing")

    @property
    def k_grid(self) -> np.ndarray:
        return np.linspace(self.k_min, self.k_max, self.k_n)


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(x) for x in r) + "\n")
    return buf.getvalue()


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def _dump(obj) -> str:
    return json.dumps(_json_safe(obj), indent=2) + "\n"


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("surface")
    g.add_argument("--config", help="surface config file (key = value lines)")
    g.add_argument("--surface", choices=sorted(_PRESETS), help="catalog preset")
    g.add_argument("--rho", type=float)
    g.add_argument("--nu", type=float)
    g.add_argument("--alpha", type=float, help="phi parameter")
    g.add_argument("--phi-kind", choices=PHI_KINDS)
    g.add_argument("--theta-kind", choices=THETA_KINDS)
    g.add_argument("--theta-a", type=float)
    g.add_argument("--theta-p", type=float)
    g.add_argument("--theta-lambda", type=float)
    g.add_argument("--theta-inf", type=float)
    r = common.add_argument_group("run")
    r.add_argument("--k-min", type=float)
    r.add_argument("--k-max", type=float)
    r.add_argument("--k-n", type=int)
    r.add_argument("--t", type=_floats, help="maturities, comma separated")
    r.add_argument("--u", type=_floats, help="variance levels, comma separated")
    r.add_argument("--out", help="output file (default stdout)")
    r.add_argument("--format", choices=("csv", "json"), dest="fmt")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--tol", type=float)

    p = argparse.ArgumentParser(
        prog="gsvi",
        description="Generalised SVI surfaces: arbitrage checks, grids, densities, bounds and moments.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "check": "calendar + butterfly conditions and price-level oracles",
        "grid": "w, L and local variance on a (k, t) grid",
        "density": "risk-neutral density of one slice",
        "bounds": "closed-form vs numeric butterfly bounds (symmetric SVI)",
        "moments": "critical moment of one slice",
        "oracle": "brute-force convexity / monotonicity oracles only",
    }
    for name, h in helps.items():
        sp = sub.add_parser(
            name, parents=[common], help=h, description=h, epilog=EPILOG,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        if name == "density":
            sp.add_argument("--samples", type=int, default=0, help="also draw this many samples (json summary)")
    return p


_COMMAND_DEFAULTS = {
    "check": dict(fmt="json"),
    "oracle": dict(fmt="json"),
    "grid": dict(fmt="csv", k_min=-2.0, k_max=2.0, k_n=81, t_list=tuple(np.round(np.linspace(0.05, 2.0, 40), 10))),
    "density": dict(fmt="csv", k_min=-density.K_MAX, k_max=density.K_MAX, k_n=density.DEFAULT_N, t_list=(1.0,)),
    "bounds": dict(fmt="csv"),
    "moments": dict(fmt="csv", t_list=(1.0,)),
}


def surface_config(args: argparse.Namespace, command: str) -> SurfaceConfig:
    """Defaults, then --config, then the --surface preset, then explicit flags."""
    cfg = SurfaceConfig()
    if command == "bounds" and not args.config and not args.surface:
        cfg = cfg.replace(psi_kind="svi")
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = SurfaceConfig.from_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    if args.surface:
        cfg = cfg.replace(**_PRESETS[args.surface])
    flags = {
        "rho": args.rho, "nu": args.nu, "phi_alpha": args.alpha, "phi_kind": args.phi_kind,
        "theta_kind": args.theta_kind, "theta_a": args.theta_a, "theta_p": args.theta_p,
        "theta_lambda": args.theta_lambda, "theta_inf": args.theta_inf,
    }
    return cfg.replace(**{k: v for k, v in flags.items() if v is not None})


def run_config(args: argparse.Namespace) -> RunConfig:
    d = dict(_COMMAND_DEFAULTS[args.command])
    for key, val in (("k_min", args.k_min), ("k_max", args.k_max), ("k_n", args.k_n),
                     ("t_list", args.t), ("u_list", args.u), ("fmt", args.fmt)):
        if val is not None:
            d[key] = val
    return RunConfig(
        surface=surface_config(args, args.command), command=args.command, out=args.out,
        tol=args.tol, seed=args.seed, samples=getattr(args, "samples", 0), **d,
    )


# ---------------------------------------------------------------------------
# commands; each returns (exit code, text)
# ---------------------------------------------------------------------------


def _oracles(surface, rc: RunConfig, tol: float):
    K = np.exp(rc.k_grid)
    t_grid = np.unique(np.concatenate([bs.DEFAULT_T_GRID, rc.t_list]))
    conv = [bs.convexity_oracle(surface, t, K) for t in rc.t_list]
    mono = [bs.monotonicity_oracle(surface, k, t_grid) for k in rc.k_grid]
    worst = min(mono, key=lambda r: r.min_margin)
    ok = all(r.passed(tol) for r in conv) and worst.passed(tol)
    return ok, conv, mono, worst


def cmd_check(rc: RunConfig):
    surface = build_surface(rc.surface)
    cal = calendar.check_calendar(surface, tol=rc.tol if rc.tol is not None else calendar.CAL_TOL)
    fly = butterfly.check_butterfly(surface, tol=rc.tol if rc.tol is not None else butterfly.FLY_TOL)
    otol = rc.tol if rc.tol is not None else bs.ORACLE_TOL
    oracle_ok, conv, mono, worst = _oracles(surface, rc, otol)
    passed = cal.passed and fly.passed and oracle_ok
    report = {
        "pass": passed,
        "surface": asdict(rc.surface),
        "calendar": cal.to_dict(),
        "butterfly": fly.to_dict(),
        "oracles": {
            "pass": oracle_ok,
            "convexity": [r.to_dict() for r in conv],
            "monotonicity_worst": worst.to_dict(),
            "monotonicity_n": len(mono),
        },
    }
    if rc.fmt == "csv":
        rows = [
            ("calendar", cal.passed, cal.coupling_margin),
            ("theta_monotone", cal.theta_monotone, cal.theta_min_slope),
            ("butterfly_per_u", all(r["ok"] for r in fly.per_u), fly.min_per_u_margin),
            ("m_infinity", fly.m_inf_condition["ok"], fly.m_inf_condition.get("margin", math.inf)),
            ("jumps", fly.jumps_ok, min(build_surface(rc.surface).psi.jumps, default=0.0)),
            ("lmb", fly.lmb_ok, 2 - fly.lmb_value),
            ("convexity", all(r.passed(otol) for r in conv), min(r.min_margin for r in conv)),
            ("monotonicity", worst.passed(otol), worst.min_margin),
            ("all", passed, math.nan),
        ]
        text = _csv(("condition", "pass", "margin"), rows)
    else:
        text = _dump(report)
    return (EXIT_OK if passed else EXIT_ARB), text


def cmd_oracle(rc: RunConfig):
    surface = build_surface(rc.surface)
    tol = rc.tol if rc.tol is not None else bs.ORACLE_TOL
    ok, conv, mono, worst = _oracles(surface, rc, tol)
    if rc.fmt == "csv":
        rows = [("convexity", r.witness[1], r.witness[0], r.min_margin, r.passed(tol)) for r in conv]
        rows += [("monotonicity", r.witness[1], r.witness[0], r.min_margin, r.passed(tol)) for r in mono]
        text = _csv(("kind", "t", "k", "min_margin", "pass"), rows)
    else:
        text = _dump({
            "pass": ok,
            "convexity": [r.to_dict() for r in conv],
            "monotonicity": [r.to_dict() for r in mono],
        })
    return (EXIT_OK if ok else EXIT_ARB), text


def grid_rows(surface, k: np.ndarray, t_list) -> list[tuple]:
    rows = []
    for t in t_list:
        tt = np.full_like(k, t)
        lo = eval_w_partials(surface, k, tt, side=-1)
        hi = eval_w_partials(surface, k, tt, side=+1)
        L = np.minimum(bs.L_from_derivatives(k, lo.w, lo.w_k, lo.w_kk),
                       bs.L_from_derivatives(k, hi.w, hi.w_k, hi.w_kk))
        wt = np.asarray(hi.w_t)
        with np.errstate(divide="ignore", invalid="ignore"):
            sig = np.where(L > 0, wt / L, np.nan)
        rows += list(zip(k, tt, np.asarray(hi.w), L, sig))
    return rows


def cmd_grid(rc: RunConfig):
    surface = build_surface(rc.surface)
    rows = grid_rows(surface, rc.k_grid, rc.t_list)
    header = ("k", "t", "w", "L", "sigma2_loc")
    if rc.fmt == "json":
        return EXIT_OK, _dump([dict(zip(header, r)) for r in rows])
    return EXIT_OK, _csv(header, rows)


def cmd_density(rc: RunConfig):
    surface = build_surface(rc.surface)
    t = rc.t_list[0]
    tol = rc.tol if rc.tol is not None else density.L_TOL
    ds = density.density(surface, t, rc.k_grid, tol=tol)
    if rc.fmt == "csv":
        return EXIT_OK, ds.to_csv()
    out = {"t": t, "mass": ds.mass, "mean_exp": ds.mean_exp, "atoms": [list(a) for a in ds.atoms],
           "tail_mass": list(ds.tail_mass), "min_L": ds.min_L}
    if rc.samples:
        x = density.sample(ds, rc.samples, seed=rc.seed)
        out["samples"] = {"n": rc.samples, "seed": rc.seed, "mean_k": float(x.mean()),
                          "mean_exp_k": float(np.exp(x).mean())}
    return EXIT_OK, _dump(out)


def cmd_bounds(rc: RunConfig):
    psi = build_surface(rc.surface).psi
    regions = butterfly.classify_regions(psi)
    rows = []
    for u in rc.u_list:
        if not 0 <= u < 4:
            continue
        y = float(butterfly.Y_func(u))
        a = float(butterfly.A_star(u))
        num = butterfly.butterfly_bound(psi, u, regions=regions).bound if u > 0 else 0.0
        rel = abs(num - a) / a if a else abs(num - a)
        rows.append((u, a, y, num, rel))
    header = ("u", "A_star", "Y", "numeric_bound", "rel_diff")
    if rc.fmt == "json":
        return EXIT_OK, _dump([dict(zip(header, r)) for r in rows])
    return EXIT_OK, _csv(header, rows)


def cmd_moments(rc: RunConfig):
    surface = build_surface(rc.surface)
    rows = []
    for t in rc.t_list:
        density.density(surface, t)  # raises on an arbitrageable slice
        m = density.critical_moment_from_slice(surface, t)
        rows.append((t, m.alpha, m.alpha_fit, m.m_star, m.bracket[0], m.bracket[1], m.tail_rate))
    header = ("t", "alpha", "alpha_fit", "m_star", "bracket_lo", "bracket_hi", "tail_rate")
    if rc.fmt == "json":
        return EXIT_OK, _dump([dict(zip(header, r)) for r in rows])
    return EXIT_OK, _csv(header, rows)


COMMANDS = {
    "check": cmd_check, "grid": cmd_grid, "density": cmd_density,
    "bounds": cmd_bounds, "moments": cmd_moments, "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rc = run_config(args)
        code, text = COMMANDS[rc.command](rc)
    except (ConfigError, ParameterError) as exc:
        print(f"gsvi: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArbitrageError, PreconditionError) as exc:
        print(f"gsvi: arbitrage: {exc}", file=sys.stderr)
        return EXIT_ARB
    except DomainError as exc:
        print(f"gsvi: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if rc.out:
        with open(rc.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
