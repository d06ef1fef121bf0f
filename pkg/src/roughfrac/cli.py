"""Command line entry point: ``roughfrac {verify,experiment,norms,weights,dump-grid}``.

Exit status: 0 when every selected suite passes, 1 when a verdict fails,
2 on configuration errors, 3 when a precondition or domination check fails.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import operators as ops
from . import verification as V
from .config import THEOREMS, Config, load_config, parse_config, sample_expression
from .errors import ConfigError, DominationViolation, PreconditionFailed, RoughFracError
from .gridio import format_grid
from .norms import bmo_lp_oscillation, bmo_norm, morrey_norm, weighted_lp_norm, weighted_oscillation
from .weights import ap_constant, apq_constant, rh_constant

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_PRECONDITION = 0, 1, 2, 3


def shipped_config(name: str = "default.ini") -> str:
    return resources.files("roughfrac").joinpath("configs", name).read_text()


def _load(args) -> Config:
    overrides = {}
    if args.grid_m is not None:
        overrides["grid.m"] = args.grid_m
    if args.seed is not None:
        overrides["functions.seed"] = args.seed
    if args.out is not None:
        overrides["output.dir"] = args.out
    if args.config:
        return load_config(args.config, overrides)
    return parse_config(shipped_config(), overrides)


def _versions() -> dict:
    try:
        import numba

        nb = numba.__version__
    except ImportError:  # pragma: no cover
        nb = None
    from ._accel import backend

    return {
        "roughfrac": __version__, "python": platform.python_version(), "numpy": np.__version__,
        "scipy": scipy.__version__, "numba": nb, "backend": backend(),
    }


class _Writer:
    """Collects artifacts and writes them plus a manifest into one directory."""

    def __init__(self, cfg: Config, command: str):
        self.cfg = cfg
        self.command = command
        self.out = cfg.out_dir
        self.artifacts = {}

    def report(self, name: str, report) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        body = json.dumps(report.body(), indent=2, sort_keys=True)
        (self.out / f"{name}.json").write_text(report.to_json())
        (self.out / f"{name}.csv").write_text(report.to_csv())
        self.artifacts[f"{name}.json"] = hashlib.sha256(body.encode()).hexdigest()

    def text(self, name: str, text: str) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / name).write_text(text)
        self.artifacts[name] = hashlib.sha256(text.encode()).hexdigest()

    def manifest(self) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        doc = {
            "command": self.command,
            "config_sha256": self.cfg.sha256,
            "seed": self.cfg.funcs.seed,
            "grid": self.cfg.grid.describe(),
            "versions": _versions(),
            "artifacts": self.artifacts,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        }
        (self.out / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True))


def _setting(cfg: Config, bound: float | None = None) -> V.Setting:
    return V.Setting(
        params=cfg.params, weight=cfg.weight, kernel=cfg.kernel, family=cfg.family, funcs=cfg.funcs,
        grid=cfg.grid, quad=cfg.quad, stability_bound=cfg.stability_bound if bound is None else bound,
    )


def run_theorem(cfg: Config, theorem: str) -> V.BoundednessReport:
    st = _setting(cfg)
    b = cfg.b_on
    runners = {
        "A": lambda: V.experiment_thm_A_B(st),
        "B": lambda: V.experiment_thm_A_B(st, b),
        "D": lambda: V.experiment_thm_D(st),
        "1.1": lambda: V.experiment_thm_1_1(st),
        "1.2": lambda: V.experiment_thm_1_2(st),
        "1.3": lambda: V.experiment_thm_1_3(st, b),
        "cor": lambda: V.experiment_corollary(st, b),
    }
    return runners[theorem]()


def cmd_verify(cfg: Config, args) -> int:
    if args.dry_run:
        print(f"config ok: grid {cfg.grid.describe()}, family {len(cfg.family)} balls")
        return EXIT_OK
    rep = V.suite_identities(cfg.grid, cfg.family, seed=cfg.funcs.seed)
    for row in rep.rows:
        print(f"{'PASS' if row['passed'] else 'FAIL'}  {row['name']:<30} margin={row['margin']:.3g}")
    w = _Writer(cfg, "verify")
    w.report("identities", rep)
    w.manifest()
    if not rep.passed:
        print("failing invariants: " + ", ".join(rep.failing()), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_experiment(cfg: Config, args) -> int:
    theorems = [args.theorem] if args.theorem else list(cfg.theorems) or ["1.2"]
    if args.dry_run:
        print(f"config ok: theorems {', '.join(theorems)}; params {cfg.params.to_dict()}")
        return EXIT_OK
    w = _Writer(cfg, f"experiment {' '.join(theorems)}")
    status = EXIT_OK
    try:
        for t in theorems:
            rep = run_theorem(cfg, t)
            print(f"{t}: max ratio {rep.max_ratio['fine']:.6g}, stability {rep.stability_factor:.4f}, {rep.verdict}")
            w.report(f"report_{t}", rep)
            if not rep.passed:
                status = EXIT_FAIL
    except (PreconditionFailed, DominationViolation) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        status = EXIT_PRECONDITION
    w.manifest()
    return status


def _csv_row(cells) -> str:
    return ",".join(c if isinstance(c, str) else f"{c:.9g}" for c in cells) + "\n"


def cmd_norms(cfg: Config, args) -> int:
    f = sample_expression(args.function or cfg.b_expr, cfg.grid, "function")
    p = args.p
    kappa = args.kappa if args.kappa is not None else cfg.params.kappa
    if args.dry_run:
        return EXIT_OK
    fam = cfg.family
    if args.kind == "bmo":
        res = bmo_norm(f, fam)
    elif args.kind == "bmo_lp":
        res = bmo_lp_oscillation(f, p, fam)
    elif args.kind == "weighted_oscillation":
        res = weighted_oscillation(f, p, cfg.weight, fam)
    elif args.kind == "morrey":
        res = morrey_norm(f, cfg.weight, p, kappa, fam)
    else:
        val = weighted_lp_norm(f, cfg.weight, p)
        res = None
    value = val if res is None else res.value
    ball = "" if res is None or res.ball is None else json.dumps(res.ball.to_dict())
    fid = cfg.family.family_id
    print(f"{'norm':<22}{'value':>18}  family")
    print(f"{args.kind:<22}{value:>18.9g}  {fid}")
    w = _Writer(cfg, f"norms {args.kind}")
    w.text("norms.csv", "norm_kind,value,family_id,ball\n" + _csv_row([args.kind, value, fid, f'"{ball}"' if ball else ""]))
    w.manifest()
    return EXIT_OK


def cmd_weights(cfg: Config, args) -> int:
    if args.dry_run:
        return EXIT_OK
    wgt, fam, grid = cfg.weight, cfg.family, cfg.grid
    if args.kind == "ap":
        rep = ap_constant(wgt, args.p, fam, grid)
    elif args.kind == "apq":
        rep = apq_constant(wgt, args.p, args.q if args.q is not None else cfg.params.q, fam, grid)
    else:
        rep = rh_constant(wgt, args.r, fam, grid)
    print(f"{'class':<10}{'constant':>18}  worst ball")
    print(f"{rep.weight_class:<10}{rep.constant:>18.9g}  {json.dumps(rep.worst_ball.to_dict())}")
    w = _Writer(cfg, f"weights {args.kind}")
    w.text("weights.csv", "class,constant,family_id\n" + _csv_row([rep.weight_class, rep.constant, fam.family_id]))
    w.text("weights.json", json.dumps(V._clean(rep.to_dict()), indent=2, sort_keys=True))
    w.manifest()
    return EXIT_OK


def cmd_dump_grid(cfg: Config, args) -> int:
    f = sample_expression(args.function or cfg.b_expr, cfg.grid, "function")
    if args.dry_run:
        return EXIT_OK
    a = cfg.params.alpha
    if args.operator == "riesz":
        f = ops.riesz_rough(f, cfg.kernel, a, cfg.quad)
    elif args.operator == "maximal":
        f = ops.frac_maximal_rough(f, cfg.kernel, a, ops.default_radii(cfg.grid), cfg.quad)
    w = _Writer(cfg, f"dump-grid {args.operator}")
    w.text(args.file, format_grid(f))
    w.manifest()
    print(f"wrote {cfg.out_dir / args.file}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file (default: shipped default.ini)")
    common.add_argument("--out", help="output directory (overrides [output] dir)")
    common.add_argument("--seed", type=int, help="test-function seed")
    common.add_argument("--grid-m", type=int, dest="grid_m", help="cells per axis on the coarse grid")
    common.add_argument("--dry-run", action="store_true", help="validate the config and stop")

    parser = argparse.ArgumentParser(prog="roughfrac", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run the invariant suite")
    ex = sub.add_parser("experiment", parents=[common], help="run boundedness experiments")
    ex.add_argument("--theorem", choices=THEOREMS)
    nm = sub.add_parser("norms", parents=[common], help="one norm of a sampled function")
    nm.add_argument("--kind", choices=("bmo", "bmo_lp", "weighted_oscillation", "morrey", "lp"), default="bmo")
    nm.add_argument("--function", help="expression in x, y, z, r (default: [experiment] b)")
    nm.add_argument("--p", type=float, default=2.0)
    nm.add_argument("--kappa", type=float)
    wt = sub.add_parser("weights", parents=[common], help="one weight-class constant")
    wt.add_argument("--kind", choices=("ap", "apq", "rh"), default="ap")
    wt.add_argument("--p", type=float, default=2.0)
    wt.add_argument("--q", type=float)
    wt.add_argument("--r", type=float, default=2.0)
    dg = sub.add_parser("dump-grid", parents=[common], help="write a sampled function or operator output as CSV")
    dg.add_argument("--function", help="expression in x, y, z, r (default: [experiment] b)")
    dg.add_argument("--operator", choices=("sample", "riesz", "maximal"), default="sample")
    dg.add_argument("--file", default="grid.csv")
    return parser


COMMANDS = {
    "verify": cmd_verify,
    "experiment": cmd_experiment,
    "norms": cmd_norms,
    "weights": cmd_weights,
    "dump-grid": cmd_dump_grid,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RoughFracError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
