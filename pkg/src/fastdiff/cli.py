"""Command-line entry point: ``fastdiff <command> [options]``.

Vector data are written as CSV (header row, 10 significant digits) and
summaries as sorted, indented JSON, so identical inputs give byte-identical
files.  Exit status: 0 on success, 1 when a ``verify`` check or a solver
fails, 2 on configuration errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import acceptance
from .errors import ConfigError, FastDiffError
from .farfield import DEFAULT_LADDER, farfield_limit
from .parabolic import (AnnulusGrid, check_sandwich, dirichlet_from, max_error, solve,
                        solve_from_field)
from .params import Params, derive, envelope_admissible, origin_value, validate
from .profile import (DEFAULT_TOL, check_envelope, expansion_residuals, fitted_origin_slope,
                      integrate_profile, ode_residual)
from .reference import BarenblattSolution, geometric_mean, self_similar
from .sweeps import elliptic_sweep, parabolic_sweep

BLOCKS = ("profile", "farfield", "parabolic", "sweeps")


@dataclass(frozen=True)
class RunConfig:
    params: Params = acceptance.DEFAULT
    blocks: dict = field(default_factory=dict)
    out: str | None = None
    seed: int = 0
    tol: float | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        if "params" in data:
            unknown = sorted(set(data) - {"params", "out", "seed", "tol", *BLOCKS})
            if unknown:
                raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
            blocks = {b: dict(data[b]) for b in BLOCKS if b in data}
            return cls(Params.from_mapping(data["params"]), blocks, data.get("out"),
                       int(data.get("seed", 0)), data.get("tol"))
        # a bare parameter object
        return cls(Params.from_mapping(data))

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"params": self.params.to_dict(), "seed": self.seed}
        out.update({k: v for k, v in self.blocks.items() if v})
        if self.out is not None:
            out["out"] = self.out
        if self.tol is not None:
            out["tol"] = self.tol
        return out

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config JSON: {exc}") from None

    def emit(self) -> str:
        return dump_json(self.to_dict())

    def block(self, name: str) -> dict:
        return self.blocks.get(name, {})


# ---------------------------------------------------------------- output

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dump_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return format(float(x), ".10g")


def csv_text(header, columns) -> str:
    rows = [",".join(header)]
    for row in zip(*columns):
        rows.append(",".join(_fmt(x) for x in row))
    return "\n".join(rows) + "\n"


class Writer:
    """Single writer for every artifact of a run."""

    def __init__(self, out: str | None):
        self.dir = Path(out) if out else None
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str) -> None:
        if self.dir is not None:
            with open(self.dir / name, "w", newline="\n") as fh:
                fh.write(text)


# ---------------------------------------------------------------- commands

def _tol(cfg: RunConfig, default: float) -> float:
    return cfg.tol if cfg.tol is not None else default


def cmd_constants(cfg: RunConfig, args, w: Writer) -> dict:
    p = cfg.params
    rep = validate(p, strict=False)
    rep.raise_if_invalid()
    out = derive(p).to_dict()
    out["strict_regime"] = validate(p, strict=True).ok
    out["envelope_admissible"] = envelope_admissible(p)
    text = dump_json(out)
    w.write("constants.json", text)
    return out


def cmd_profile(cfg: RunConfig, args, w: Writer) -> dict:
    opts = {"rho_max": 10.0, "points": 400, **cfg.block("profile")}
    for k in ("rho_max", "rho0", "points"):
        if getattr(args, k, None) is not None:
            opts[k] = getattr(args, k)
    p = cfg.params
    sol = integrate_profile(p, rho_max=float(opts["rho_max"]), tol=_tol(cfg, DEFAULT_TOL),
                            rho0=opts.get("rho0"))
    rho = np.geomspace(sol.rho0, sol.rho_max, int(opts["points"]))
    wbar, wbar_rho = sol.evaluate(rho)
    r = rho ** (p.beta / p.rho1)
    v, vp = sol.eval_v(r), sol.eval_v_prime(r)
    w.write("profile.csv", csv_text(("rho", "wbar", "wbar_rho", "r", "v", "v_prime"),
                                    (rho, wbar, wbar_rho, r, v, vp)))
    c = sol.consts
    env = check_envelope(sol)
    summary = {
        "params": p.to_dict(), "rho0": sol.rho0, "rho_max": sol.rho_max, "r_max": sol.r_max,
        "nodes": int(sol.s_grid.size), "tol": _tol(cfg, DEFAULT_TOL),
        "origin_value": origin_value(p),
        "fitted_origin_slope": fitted_origin_slope(sol),
        "expected_origin_slope": c.A1 * p.lam ** (-p.m * p.rho1 / ((1 - p.m) * p.beta)),
        "expansion_residuals": expansion_residuals(
            sol, [x for x in (1e-2, 1e-3, 1e-4) if x > sol.rho0]),
        "ode_residual_max": float(np.max(np.abs(ode_residual(sol)))),
        "envelope": {"admissible": env.admissible, "min_lower": env.min_lower,
                     "min_upper": env.min_upper, "violations": env.violations},
    }
    w.write("profile.json", dump_json(summary))
    return summary


def cmd_farfield(cfg: RunConfig, args, w: Writer) -> dict:
    opts = {"r_values": list(DEFAULT_LADDER), "n_extrapolate": 3, "diagnostic": False,
            **cfg.block("farfield")}
    if args.r_values is not None:
        opts["r_values"] = args.r_values
    if args.diagnostic:
        opts["diagnostic"] = True
    p = cfg.params
    r_top = max(opts["r_values"]) * 1.05
    sol = integrate_profile(p, rho_max=r_top ** (p.rho1 / p.beta), tol=_tol(cfg, DEFAULT_TOL))
    rep = farfield_limit(sol, opts["r_values"], n_extrapolate=int(opts["n_extrapolate"]),
                         diagnostic=bool(opts["diagnostic"]))
    w.write("farfield.csv", csv_text(("r", "w"), (rep.r, rep.w)))
    summary = {"params": p.to_dict(), **rep.summary()}
    w.write("farfield.json", dump_json(summary))
    return summary


def _grid_from(opts) -> AnnulusGrid:
    return AnnulusGrid(float(opts["r_in"]), float(opts["r_out"]), int(opts["nr"]),
                       float(opts["t_end"]), int(opts["nt"]))


PARABOLIC_DEFAULTS = {"lambda1": 2.0, "lambda2": 1.0, "r_out": 20.0, "nr": 161,
                      "t_end": 0.5, "nt": 100, "init": "geomean", "k": 1.0}


def _parabolic_opts(cfg: RunConfig, args) -> dict:
    p = cfg.params
    opts = {**PARABOLIC_DEFAULTS, "r_in": 0.05 * p.T ** (-p.beta), **cfg.block("parabolic")}
    for k in ("m", "lambda1", "lambda2", "r_in", "r_out", "nr", "t_end", "nt", "init",
              "init_file", "k"):
        if getattr(args, k, None) is not None:
            opts[k] = getattr(args, k)
    return opts


def _read_initial(path: str, nr: int) -> np.ndarray:
    vals = np.loadtxt(path, delimiter=",", ndmin=1, comments="#")
    if vals.ndim == 2:
        vals = vals[:, -1]
    if vals.shape != (nr,):
        raise ConfigError(f"initial data file has {vals.size} values, grid has {nr} nodes")
    return vals


def cmd_parabolic(cfg: RunConfig, args, w: Writer) -> dict:
    opts = _parabolic_opts(cfg, args)
    p = cfg.params if "m" not in opts else cfg.params.with_(m=float(opts["m"]))
    grid = _grid_from(opts)
    init = opts["init"]
    summary: dict[str, Any] = {"params": p.to_dict(), "init": init,
                               "grid": {k: opts[k] for k in ("r_in", "r_out", "nr", "t_end", "nt")}}
    if init == "barenblatt":
        bar = BarenblattSolution(p, float(opts["k"]), p.T)
        sol = solve_from_field(p, grid, bar, "barenblatt")
        summary["max_relative_error"] = max_error(sol, bar)
    else:
        lam1, lam2 = float(opts["lambda1"]), float(opts["lambda2"])
        if not lam1 >= lam2 > 0:
            raise ConfigError("need lambda1 >= lambda2 > 0")
        lo = self_similar(p.with_(lam=lam1), grid.r_out)
        hi = self_similar(p.with_(lam=lam2), grid.r_out)
        gm = geometric_mean(lo, hi)
        if init == "file":
            if not opts.get("init_file"):
                raise ConfigError("--init file needs --init-file")
            u0 = _read_initial(opts["init_file"], grid.nr)
            sol = solve(p, grid, u0, dirichlet_from(gm, grid), boundary_source="envelope-geomean")
        else:
            data = {"lower": lo, "upper": hi, "geomean": gm}[init]
            sol = solve_from_field(p, grid, data, f"envelope-{init}")
        rep = check_sandwich(sol, lo, hi)
        summary["sandwich"] = {"min_slack": rep.min_slack, "ordered_min_slack": rep.ordered_min_slack,
                               "inverted_nodes": rep.inverted_nodes,
                               "lower_slack": rep.lower_slack, "upper_slack": rep.upper_slack}
    summary["boundary_source"] = sol.boundary_source
    summary["scheme_stats"] = sol.scheme_stats
    T, R = np.meshgrid(sol.t, sol.r, indexing="ij")
    w.write("parabolic.csv", csv_text(("t", "r", "u"), (T.ravel(), R.ravel(), sol.u.ravel())))
    w.write("parabolic.json", dump_json(summary))
    return summary


def cmd_sweep_elliptic(cfg: RunConfig, args, w: Writer) -> dict:
    opts = {"m_values": [0.2, 0.1, 0.05, 0.025], "annulus": [0.5, 2.0], "n_mesh": 200,
            **cfg.block("sweeps").get("elliptic", {})}
    if args.m_values is not None:
        opts["m_values"] = args.m_values
    if args.annulus is not None:
        opts["annulus"] = args.annulus
    rep = elliptic_sweep(cfg.params, opts["m_values"], tuple(opts["annulus"]),
                         tol=_tol(cfg, 1e-12), n_mesh=int(opts["n_mesh"]), workers=args.workers)
    w.write("sweep_elliptic.csv", csv_text(
        ("m", "c0_norm", "c1_norm", "c2_norm"),
        (rep.m_values, rep.column("c0_norm"), rep.column("c1_norm"), rep.column("c2_norm"))))
    summary = rep.summary()
    summary["c0_decreasing"] = rep.strictly_decreasing("c0_norm")
    w.write("sweep_elliptic.json", dump_json(summary))
    return summary


def cmd_sweep_parabolic(cfg: RunConfig, args, w: Writer) -> dict:
    opts = _parabolic_opts(cfg, args)
    sw = {"m_values": [0.2, 0.1, 0.05], **cfg.block("sweeps").get("parabolic", {})}
    if args.m_values is not None:
        sw["m_values"] = args.m_values
    init = opts["init"] if opts["init"] in ("geomean", "lower", "upper") else None
    if init is None:
        raise ConfigError("sweep-parabolic supports --init geomean, lower or upper")
    rep = parabolic_sweep(cfg.params, sw["m_values"], _grid_from(opts),
                          lam1=float(opts["lambda1"]), lam2=float(opts["lambda2"]), init=init,
                          tol=_tol(cfg, 1e-12), workers=args.workers)
    w.write("sweep_parabolic.csv", csv_text(("m", "sup_norm"), (rep.m_values, rep.column("sup_norm"))))
    summary = rep.summary()
    summary["decreasing"] = rep.strictly_decreasing("sup_norm")
    w.write("sweep_parabolic.json", dump_json(summary))
    return summary


def cmd_verify(cfg: RunConfig, args, w: Writer) -> dict:
    chosen = list(acceptance.EXACT) if args.scope == "exact" else sorted(acceptance.CRITERIA)
    if args.only:
        chosen = [k for k in chosen if k in args.only]
    if args.skip:
        chosen = [k for k in chosen if k not in args.skip]
    results = acceptance.run_all(chosen, seed=cfg.seed, echo=print)
    summary = {"scope": args.scope, "seed": cfg.seed,
               "criteria": [r.summary() for r in results],
               "passed": all(r.passed for r in results)}
    w.write("verify.json", dump_json(summary))
    return summary


# ---------------------------------------------------------------- parser

def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _global_flags(parser: argparse.ArgumentParser) -> None:
    s = argparse.SUPPRESS
    parser.add_argument("--config", default=s, help="JSON config (parameters and option blocks)")
    parser.add_argument("--out", default=s, help="output directory for CSV/JSON artifacts")
    parser.add_argument("--seed", type=int, default=s, help="seed for randomized trials")
    parser.add_argument("--tol", type=float, default=s, help="profile integrator tolerance")


def _parabolic_flags(sp: argparse.ArgumentParser, with_m: bool) -> None:
    if with_m:
        sp.add_argument("--m", type=float, help="diffusion exponent (overrides config)")
    sp.add_argument("--lambda1", type=float, help="normalization of the lower envelope")
    sp.add_argument("--lambda2", type=float, help="normalization of the upper envelope")
    sp.add_argument("--r-in", dest="r_in", type=float)
    sp.add_argument("--r-out", dest="r_out", type=float)
    sp.add_argument("--nr", type=int)
    sp.add_argument("--t-end", dest="t_end", type=float)
    sp.add_argument("--nt", type=int)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common)
    parser = argparse.ArgumentParser(prog="fastdiff", parents=[common],
                                     description="Singular self-similar profiles and singular limits "
                                                 "of fast and logarithmic diffusion.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("constants", parents=[common], help="print the derived constants")

    sp = sub.add_parser("profile", parents=[common], help="integrate a singular profile")
    sp.add_argument("--rho-max", dest="rho_max", type=float)
    sp.add_argument("--rho0", type=float, help="start of the integration (default automatic)")
    sp.add_argument("--points", type=int, help="number of log-spaced output samples")

    sp = sub.add_parser("farfield", parents=[common], help="far-field limit of r^2 v (m = 0)")
    sp.add_argument("--r-values", dest="r_values", type=_floats)
    sp.add_argument("--diagnostic", action="store_true", help="allow m > 0 (no assertion)")

    sp = sub.add_parser("parabolic", parents=[common], help="solve the radial flow on an annulus")
    _parabolic_flags(sp, with_m=True)
    sp.add_argument("--init", choices=("lower", "upper", "geomean", "barenblatt", "file"))
    sp.add_argument("--init-file", dest="init_file", help="CSV of initial values, one per node")
    sp.add_argument("--k", type=float, help="Barenblatt constant for --init barenblatt")

    sp = sub.add_parser("sweep-elliptic", parents=[common], help="elliptic m -> 0 sweep")
    sp.add_argument("--m-values", dest="m_values", type=_floats)
    sp.add_argument("--annulus", type=float, nargs=2, metavar=("R_LO", "R_HI"))
    sp.add_argument("--workers", type=int, default=4)

    sp = sub.add_parser("sweep-parabolic", parents=[common], help="parabolic m -> 0 sweep")
    _parabolic_flags(sp, with_m=False)
    sp.add_argument("--m-values", dest="m_values", type=_floats)
    sp.add_argument("--init", choices=("lower", "upper", "geomean"))
    sp.add_argument("--workers", type=int, default=4)

    sp = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    sp.add_argument("scope", nargs="?", choices=("exact", "all"), default="all")
    sp.add_argument("--only", type=_ints, help="comma-separated criterion numbers to run")
    sp.add_argument("--skip", type=_ints, help="comma-separated criterion numbers to skip")
    return parser


COMMANDS = {"constants": cmd_constants, "profile": cmd_profile, "farfield": cmd_farfield,
            "parabolic": cmd_parabolic, "sweep-elliptic": cmd_sweep_elliptic,
            "sweep-parabolic": cmd_sweep_parabolic, "verify": cmd_verify}


def load_config(args) -> RunConfig:
    path = getattr(args, "config", None)
    if path:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = RunConfig.parse(text)
    else:
        cfg = RunConfig()
    changes = {}
    if getattr(args, "out", None) is not None:
        changes["out"] = args.out
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "tol", None) is not None:
        changes["tol"] = args.tol
    if changes:
        cfg = RunConfig(**{**cfg.__dict__, **changes})
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        writer = Writer(cfg.out)
        summary = COMMANDS[args.command](cfg, args, writer)
    except (ConfigError, ValueError) as exc:
        print(f"fastdiff: configuration error: {exc}", file=sys.stderr)
        return 2
    except FastDiffError as exc:
        print(f"fastdiff: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.command == "verify":
        return 0 if summary["passed"] else 1
    sys.stdout.write(dump_json(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
