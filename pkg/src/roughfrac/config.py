"""INI experiment configuration: parse, then validate every block before any work.

Sections and keys (all optional unless noted; defaults in ``DEFAULTS``)::

    [grid]       n, L, m
    [params]     alpha, s, p, kappa            (s may be "inf")
    [kernel]     kind = constant | expr | table, value, expr, samples
    [weight]     kind = one | power | gridded, center, beta, file
    [family]     stride, r_min, r_max          (radii in units of the coarse h
                                                when suffixed with "h", e.g. "2h")
    [functions]  tag, seed, count
    [experiment] theorems, b, stability_bound, rule, method
    [output]     dir
"""
from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ConstraintViolation
from .expr import SPATIAL_VARIABLES, Expression, ExpressionError, spatial_env
from .geometry import BallFamily, Grid, GridFunction, OperatorParams, build_ball_family, derive_params
from .gridio import read_grid_csv
from .operators import METHODS, RULES, QuadratureSpec
from .sphere import RoughKernel
from .verification import GENERATORS, TestFunctionFamily
from .weights import Weight

THEOREMS = ("A", "B", "D", "1.1", "1.2", "1.3", "cor")

DEFAULTS = {
    "grid": {"n": "2", "L": "2.0", "m": "64"},
    "params": {"alpha": "0.5", "s": "2", "p": "3", "kappa": "0.1"},
    "kernel": {"kind": "constant", "value": "1.0", "expr": "", "samples": "64"},
    "weight": {"kind": "one", "center": "", "beta": "0", "file": ""},
    "family": {"stride": "", "r_min": "2h", "r_max": "L/2"},
    "functions": {"tag": "mixed", "seed": "0", "count": "20"},
    "experiment": {"theorems": "", "b": "log(r)", "stability_bound": "1.2", "rule": "lattice", "method": "auto"},
    "output": {"dir": "out"},
}

_CONSTRAINT_KEYS = {
    "n": "grid.n",
    "alpha": "params.alpha",
    "s <= 1": "params.s",
    "p": "params.p",
    "p <= s'": "params.p",
    "p >= n/alpha": "params.p",
    "kappa": "params.kappa",
    "kappa <= 0": "params.kappa",
    "kappa >= p/q": "params.kappa",
}


@dataclass
class Config:
    grid: Grid
    params: OperatorParams
    kernel: RoughKernel
    weight: Weight
    family: BallFamily
    funcs: TestFunctionFamily
    theorems: tuple
    b_expr: str
    stability_bound: float
    quad: QuadratureSpec
    out_dir: Path
    text: str

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()

    def b_on(self, grid: Grid) -> GridFunction:
        return sample_expression(self.b_expr, grid, "experiment.b")


def sample_expression(text: str, grid: Grid, key: str) -> GridFunction:
    try:
        e = Expression(text, SPATIAL_VARIABLES)
        vals = e(**spatial_env(grid.coords()))
        return GridFunction(grid, np.broadcast_to(vals, grid.shape))
    except (ExpressionError, ValueError) as exc:
        raise ConfigError(key, str(exc)) from None


def _num(raw, key, cast=float):
    try:
        v = cast(raw)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected a number, got {raw!r}") from None
    if cast is float and math.isnan(v):
        raise ConfigError(key, "NaN is not allowed")
    return v


def _radius(raw: str, key: str, h: float, L: float) -> float:
    raw = raw.strip()
    try:
        if raw.endswith("h"):
            return float(raw[:-1] or 1) * h
        if raw.startswith("L"):
            return L / float(raw[2:]) if raw.startswith("L/") else L
        return float(raw)
    except ValueError:
        raise ConfigError(key, f"cannot read radius {raw!r}") from None


def _read(text: str) -> dict:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("<file>", str(exc).splitlines()[0]) from None
    merged = {sec: dict(vals) for sec, vals in DEFAULTS.items()}
    for sec in cp.sections():
        if sec not in DEFAULTS:
            raise ConfigError(sec, "unknown section")
        for key, val in cp.items(sec):
            if key not in DEFAULTS[sec]:
                raise ConfigError(f"{sec}.{key}", "unknown key")
            merged[sec][key] = val.strip()
    return merged


def parse_config(text: str, overrides: dict | None = None) -> Config:
    """Validate ``text`` (INI) with dotted-key ``overrides`` such as ``{"grid.m": 128}``."""
    raw = _read(text)
    for dotted, val in (overrides or {}).items():
        sec, _, key = dotted.partition(".")
        if sec not in raw or key not in raw[sec]:
            raise ConfigError(dotted, "unknown key")
        raw[sec][key] = str(val)

    g = raw["grid"]
    try:
        grid = Grid(_num(g["n"], "grid.n", int), _num(g["L"], "grid.L"), _num(g["m"], "grid.m", int))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("grid", str(exc)) from None

    pr = raw["params"]
    s = math.inf if pr["s"].lower() in ("inf", "infinity") else _num(pr["s"], "params.s")
    kappa = None if pr["kappa"] == "" else _num(pr["kappa"], "params.kappa")
    try:
        params = derive_params(grid.n, _num(pr["alpha"], "params.alpha"), s, _num(pr["p"], "params.p"), kappa)
    except ConstraintViolation as exc:
        raise ConfigError(_CONSTRAINT_KEYS.get(exc.constraint, "params"), str(exc)) from None

    kernel = _kernel(raw["kernel"], grid.n)
    weight = _weight(raw["weight"], grid)

    fam = raw["family"]
    stride = grid.m // 8 if fam["stride"] == "" else _num(fam["stride"], "family.stride", int)
    r_min = _radius(fam["r_min"], "family.r_min", grid.h, grid.half_width)
    r_max = _radius(fam["r_max"], "family.r_max", grid.h, grid.half_width)
    try:
        family = build_ball_family(grid, stride, r_min, r_max)
    except ValueError as exc:
        raise ConfigError("family", str(exc)) from None

    fn = raw["functions"]
    if fn["tag"] != "mixed" and fn["tag"] not in GENERATORS:
        raise ConfigError("functions.tag", f"must be mixed or one of {', '.join(GENERATORS)}")
    count = _num(fn["count"], "functions.count", int)
    if count < 1:
        raise ConfigError("functions.count", "must be positive")
    funcs = TestFunctionFamily(fn["tag"], _num(fn["seed"], "functions.seed", int), count)

    ex = raw["experiment"]
    theorems = tuple(t.strip() for t in ex["theorems"].split(",") if t.strip())
    for t in theorems:
        if t not in THEOREMS:
            raise ConfigError("experiment.theorems", f"unknown theorem {t!r}; choose from {', '.join(THEOREMS)}")
    if ex["rule"] not in RULES:
        raise ConfigError("experiment.rule", f"must be one of {', '.join(RULES)}")
    if ex["method"] not in METHODS:
        raise ConfigError("experiment.method", f"must be one of {', '.join(METHODS)}")
    bound = _num(ex["stability_bound"], "experiment.stability_bound")
    if not bound >= 1:
        raise ConfigError("experiment.stability_bound", "must be >= 1")
    sample_expression(ex["b"], grid, "experiment.b")
    return Config(
        grid=grid, params=params, kernel=kernel, weight=weight, family=family, funcs=funcs,
        theorems=theorems, b_expr=ex["b"], stability_bound=bound,
        quad=QuadratureSpec(rule=ex["rule"], method=ex["method"]),
        out_dir=Path(raw["output"]["dir"]), text=text,
    )


def load_config(path, overrides: dict | None = None) -> Config:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, overrides)


def _kernel(k: dict, n: int) -> RoughKernel:
    kind = k["kind"]
    try:
        if kind == "constant":
            return RoughKernel.constant(n, _num(k["value"], "kernel.value"))
        if kind == "expr":
            return RoughKernel.expression(n, k["expr"])
        if kind == "table":
            samples = _num(k["samples"], "kernel.samples", int)
            return RoughKernel.tabulate(n, k["expr"], samples)
    except ExpressionError as exc:
        raise ConfigError("kernel.expr", str(exc)) from None
    raise ConfigError("kernel.kind", "must be constant, expr or table")


def _weight(w: dict, grid: Grid) -> Weight:
    kind = w["kind"]
    if kind == "one":
        return Weight.one()
    if kind == "power":
        if w["center"]:
            center = tuple(_num(c, "weight.center") for c in w["center"].split(","))
        else:
            center = (0.0,) * grid.n
        if len(center) != grid.n:
            raise ConfigError("weight.center", f"needs {grid.n} coordinates")
        return Weight.power(center, _num(w["beta"], "weight.beta"))
    if kind == "gridded":
        try:
            samples = read_grid_csv(w["file"])
            return Weight.gridded(samples)
        except (OSError, ValueError) as exc:
            raise ConfigError("weight.file", str(exc)) from None
    raise ConfigError("weight.kind", "must be one, power or gridded")
