"""Empirical boundedness experiments and invariant suites.

An experiment evaluates one operator on a seeded family of test functions at
two resolutions (the ball family is built once on the coarse grid and reused
geometrically on the fine one) and reports the norm ratios.  Boundedness is
read as stability: the largest ratio may not grow by more than a fixed factor
under refinement or under extension of the ball family.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import operators as ops
from .errors import DominationViolation, NonIntegrable, PreconditionFailed
from .geometry import (
    Ball, BallFamily, Grid, GridFunction, OperatorParams, build_ball_family, centered_family, conjugate,
    radius_ladder, unit_ball_volume,
)
from .norms import bmo_lp_oscillation, bmo_norm, morrey_norm, morrey_norm_two_weight, weighted_lp_norm, weighted_oscillation
from .sphere import RoughKernel, sphere_norm
from .weights import Weight, ap_constant, apq_constant, ball_cells, ball_measure, check_doubling, check_rh_subset, rh_constant

GENERATORS = ("indicator", "power_bump", "gaussian", "random_blocks", "random_cells")
MIXED = ("indicator", "power_bump", "gaussian", "random_blocks")
BLOCKS_PER_AXIS = 16
DIVERGENCE_GROWTH = 1.05
DOMINATION_SLACK = 0.01


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TestFunctionFamily:
    """Seeded, compactly supported test functions.

    ``tag`` is one generator name or ``"mixed"`` (cycles through the
    resolution-independent generators).  Member ``i`` draws its parameters
    from ``default_rng([seed, i])``, so members do not depend on ``count`` and
    the same member sampled on two grids is the same function.  Supports lie
    in the central half of the box.
    """

    tag: str = "mixed"
    seed: int = 0
    count: int = 20
    scale: float = 1.0

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.tag != "mixed" and self.tag not in GENERATORS:
            raise ValueError(f"unknown test-function generator {self.tag!r}")
        if self.count < 1:
            raise ValueError("count must be positive")

    def generator(self, i: int) -> str:
        return MIXED[i % len(MIXED)] if self.tag == "mixed" else self.tag

    def member(self, grid: Grid, i: int) -> GridFunction:
        rng = np.random.default_rng([self.seed, i])
        tag = self.generator(i)
        L, n = grid.half_width, grid.n
        coords = grid.coords()
        if tag == "random_cells":
            inner = np.ones(grid.shape, dtype=bool)
            for x in coords:
                inner &= np.abs(x) < L / 2
            vals = np.where(inner, rng.uniform(-1, 1, grid.shape), 0.0)
        elif tag == "random_blocks":
            table = rng.uniform(-1, 1, (BLOCKS_PER_AXIS,) * n)
            idx = [np.floor((x + L / 2) / (L / BLOCKS_PER_AXIS)).astype(int) for x in coords]
            inside = np.ones(grid.shape, dtype=bool)
            for k in idx:
                inside &= (k >= 0) & (k < BLOCKS_PER_AXIS)
            vals = np.zeros(grid.shape)
            vals[inside] = table[tuple(k[inside] for k in idx)]
        else:
            radius = rng.uniform(L / 8, L / 4)
            c = rng.uniform(-L / 2 + radius, L / 2 - radius, n)
            d = np.sqrt(sum((x - ci) ** 2 for x, ci in zip(coords, c)))
            inside = d <= radius
            if tag == "indicator":
                vals = inside.astype(float)
            elif tag == "power_bump":
                gam = rng.uniform(0.1, 0.5)
                with np.errstate(divide="ignore"):
                    vals = np.where(inside, d ** (-gam), 0.0)
            else:
                sigma = radius / 3
                vals = np.where(inside, np.exp(-0.5 * (d / sigma) ** 2), 0.0)
        return GridFunction(grid, self.scale * vals)

    def function_id(self, i: int) -> str:
        return f"{self.generator(i)}-{self.seed}-{i}"

    def members(self, grid: Grid):
        return [(self.function_id(i), self.member(grid, i)) for i in range(self.count)]

    def describe(self) -> dict:
        d = {"tag": self.tag, "seed": self.seed, "count": self.count}
        if self.scale != 1.0:
            d["scale"] = self.scale
        return d


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def _clean(obj):
    """JSON-safe copy: tuples to lists, numpy scalars to floats, non-finite to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@dataclass
class BoundednessReport:
    experiment: str
    params: dict
    weight: dict
    kernel: dict | None
    rows: list
    max_ratio: dict
    stability_factor: float
    family_extension_factor: float | None
    stability_bound: float
    provenance: dict
    extra: dict = field(default_factory=dict)

    @property
    def ratios_finite(self) -> bool:
        return all(math.isfinite(r[k]) for r in self.rows for k in ("ratio_coarse", "ratio_fine") if r[k] is not None)

    @property
    def passed(self) -> bool:
        factors = [self.stability_factor]
        if self.family_extension_factor is not None:
            factors.append(self.family_extension_factor)
        return self.ratios_finite and all(math.isfinite(f) and f <= self.stability_bound for f in factors)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def body(self) -> dict:
        return _clean({
            "experiment": self.experiment,
            "params": self.params,
            "weight": self.weight,
            "kernel": self.kernel,
            "rows": self.rows,
            "max_ratio": self.max_ratio,
            "stability_factor": self.stability_factor,
            "family_extension_factor": self.family_extension_factor,
            "stability_bound": self.stability_bound,
            "verdict": self.verdict,
            "provenance": self.provenance,
            **({"extra": self.extra} if self.extra else {}),
        })

    def to_json(self, timestamp: bool = True) -> str:
        d = self.body()
        if timestamp:
            d["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        return json.dumps(d, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["experiment", "function_id", "skipped", "ratio_coarse", "ratio_fine", "ratio_extended"])
        for r in self.rows:
            w.writerow([self.experiment, r["function_id"], int(r["skipped"])] + [
                "" if r[k] is None else f"{r[k]:.9g}" for k in ("ratio_coarse", "ratio_fine", "ratio_extended")
            ])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# preconditions
# ---------------------------------------------------------------------------

def _weight_center(w: Weight, n: int):
    return w.center if w.kind == "power" else (0.0,) * n


def weight_class_growth(w: Weight, p: float, q: float, grid: Grid) -> tuple:
    """A(p,q) estimates on nested balls at the weight's centre, on ``grid`` and its refinement.

    Each refinement halves the smallest radius (2h), so a weight outside the
    class shows a growth factor above one while a member converges.
    """
    consts = []
    for g in (grid, grid.refined(2)):
        c = g.cell_center(g.nearest_cell(_weight_center(w, g.n)))
        fam = centered_family(c, radius_ladder(2 * g.h, g.half_width / 2))
        try:
            consts.append(apq_constant(w, p, q, fam, g).constant)
        except NonIntegrable:
            consts.append(math.inf)
    growth = consts[1] / consts[0] if math.isfinite(consts[1]) else math.inf
    return consts, growth


def check_weight_class(w: Weight, p: float, q: float, grid: Grid) -> dict:
    consts, growth = weight_class_growth(w, p, q, grid)
    info = {"class": "A(p,q)", "p": p, "q": q, "constants": consts, "growth": growth, "threshold": DIVERGENCE_GROWTH}
    if not (math.isfinite(growth) and growth <= DIVERGENCE_GROWTH):
        raise PreconditionFailed(f"weight {w.describe()} fails the A({p:g},{q:g}) divergence test (growth {growth:.4g})")
    return info


def check_bmo(b: GridFunction, family: BallFamily, extended: BallFamily) -> dict:
    v0 = bmo_norm(b, family).value
    v1 = bmo_norm(b, extended).value
    growth = 1.0 if v0 == v1 else (v1 / v0 if v0 > 0 else math.inf)
    info = {"bmo": v0, "bmo_extended": v1, "growth": growth}
    if not (math.isfinite(v1) and growth <= 1.2):
        raise PreconditionFailed(f"BMO estimate of b does not plateau (growth {growth:.4g})")
    return info


# ---------------------------------------------------------------------------
# experiment driver
# ---------------------------------------------------------------------------

def extend_family(family: BallFamily, grid: Grid) -> BallFamily:
    """Add balls with half the smallest radius, centred as in ``family``."""
    radii = family.radii_array()
    r_new = radii.min() / 2
    if r_new < 2 * grid.h * (1 - 1e-9):
        raise ValueError("grid too coarse to extend the family below its smallest radius")
    centers = sorted({b.center for b in family})
    extra = BallFamily(tuple(Ball(c, r_new) for c in centers), {"kind": "halved", "radius": r_new})
    return family.union(extra)


def _ratio(num: float, den: float):
    if den == 0:
        return None
    return num / den


@dataclass(frozen=True)
class Setting:
    """Everything an experiment needs besides the operator."""

    params: OperatorParams
    weight: Weight
    kernel: RoughKernel | None
    family: BallFamily
    funcs: TestFunctionFamily
    grid: Grid
    quad: ops.QuadratureSpec = ops.DEFAULT_QUAD
    stability_bound: float = 1.2
    extend: bool = True


def _run(tag, st: Setting, apply, source_norm, target_norm, scale_of=None, extra=None, on_pair=None):
    grids = (st.grid, st.grid.refined(2))
    ext = extend_family(st.family, grids[1]) if st.extend else None
    per_grid = []
    for gi, g in enumerate(grids):
        scale = scale_of(g) if scale_of else 1.0
        rows = []
        for fid, f in st.funcs.members(g):
            src = source_norm(f, st.family)
            if src.value == 0:
                rows.append({"function_id": fid, "ratio": None, "ratio_ext": None, "ball": None})
                continue
            out = apply(f, g)
            if on_pair is not None:
                on_pair(fid, f, g, out)
            tgt = target_norm(out, st.family)
            den = src.value * scale
            row = {"function_id": fid, "ratio": 0.0 if tgt.value == 0 else _ratio(tgt.value, den), "ball": tgt.ball}
            if ext is not None and gi == 1:
                te = target_norm(out, ext)
                se = source_norm(f, ext)
                row["ratio_ext"] = 0.0 if te.value == 0 else _ratio(te.value, se.value * scale)
            rows.append(row)
        per_grid.append(rows)
    rows = []
    for rc, rf in zip(*per_grid):
        skipped = rc["ratio"] is None or rf["ratio"] is None
        rows.append({
            "function_id": rc["function_id"],
            "skipped": skipped,
            "ratio_coarse": rc["ratio"],
            "ratio_fine": rf["ratio"],
            "ratio_extended": rf.get("ratio_ext"),
            "maximizing_ball": None if rf["ball"] is None else rf["ball"].to_dict(),
        })
    live = [r for r in rows if not r["skipped"]]
    mc = max((r["ratio_coarse"] for r in live), default=0.0)
    mf = max((r["ratio_fine"] for r in live), default=0.0)
    stability = mf / mc if mc > 0 else (1.0 if mf == 0 else math.inf)
    ext_factor = None
    if ext is not None:
        me = max((r["ratio_extended"] for r in live), default=0.0)
        ext_factor = me / mf if mf > 0 else (1.0 if me == 0 else math.inf)
    return BoundednessReport(
        experiment=tag,
        params=st.params.to_dict(),
        weight=st.weight.describe(),
        kernel=None if st.kernel is None else st.kernel.describe(),
        rows=rows,
        max_ratio={"coarse": mc, "fine": mf},
        stability_factor=stability,
        family_extension_factor=ext_factor,
        stability_bound=st.stability_bound,
        provenance={
            "grids": [g.describe() for g in grids],
            "family": st.family.provenance(),
            "extended_family": None if ext is None else ext.provenance()["family_id"],
            "functions": st.funcs.describe(),
            "quadrature": st.quad.describe(),
        },
        extra=extra or {},
    )


def _morrey_pair(st: Setting):
    p, q, kappa = st.params.p, st.params.q, st.params.kappa
    u, v = st.weight.raised(p), st.weight.raised(q)

    def source(f, fam):
        return morrey_norm_two_weight(f, u, v, p, kappa, fam)

    def target(g, fam):
        return morrey_norm(g, v, q, kappa * q / p, fam)

    return source, target


def _lebesgue_pair(st: Setting):
    p, q = st.params.p, st.params.q
    u, v = st.weight.raised(p), st.weight.raised(q)

    class _N:
        def __init__(self, value):
            self.value, self.ball = value, None

    return (lambda f, fam: _N(weighted_lp_norm(f, u, p))), (lambda g, fam: _N(weighted_lp_norm(g, v, q)))


def _precondition_rough(st: Setting) -> dict:
    sp = st.params.s_prime
    return check_weight_class(st.weight.raised(sp), st.params.p1, st.params.q1, st.grid)


def _require_morrey(st: Setting):
    if st.params.kappa is None:
        raise ValueError("Morrey experiments need kappa")


def _radii(g: Grid):
    return ops.default_radii(g)


def experiment_thm_1_1(st: Setting) -> BoundednessReport:
    """M_{Omega,alpha}: L^{p,kappa}(w^p, w^q) -> L^{q,kappa q/p}(w^q)."""
    _require_morrey(st)
    pre = _precondition_rough(st)
    src, tgt = _morrey_pair(st)
    a = st.params.alpha
    return _run("1.1", st, lambda f, g: ops.frac_maximal_rough(f, st.kernel, a, _radii(g), st.quad), src, tgt,
                extra={"precondition": pre})


def experiment_thm_1_2(st: Setting) -> BoundednessReport:
    """T_{Omega,alpha}: L^{p,kappa}(w^p, w^q) -> L^{q,kappa q/p}(w^q)."""
    _require_morrey(st)
    pre = _precondition_rough(st)
    src, tgt = _morrey_pair(st)
    a = st.params.alpha
    return _run("1.2", st, lambda f, g: ops.riesz_rough(f, st.kernel, a, st.quad), src, tgt, extra={"precondition": pre})


def _b_on(b_fn, g: Grid) -> GridFunction:
    return b_fn(g) if callable(b_fn) else b_fn


def _bmo_scale(st: Setting, b_fn):
    cache = {}

    def scale_of(g):
        if g not in cache:
            cache[g] = bmo_norm(_b_on(b_fn, g), st.family).value
        return cache[g]

    return scale_of


def experiment_thm_1_3(st: Setting, b_fn) -> BoundednessReport:
    """[b, T_{Omega,alpha}] with ratios normalised by ||b||_* ||f||.

    ``b_fn`` maps a grid to the sampled b (or is a fixed GridFunction).
    """
    _require_morrey(st)
    pre = _precondition_rough(st)
    g1 = st.grid.refined(2)
    pre_b = check_bmo(_b_on(b_fn, g1), st.family, extend_family(st.family, g1))
    src, tgt = _morrey_pair(st)
    a = st.params.alpha
    return _run(
        "1.3", st, lambda f, g: ops.commutator_T(_b_on(b_fn, g), f, st.kernel, a, st.quad), src, tgt,
        scale_of=_bmo_scale(st, b_fn), extra={"precondition": pre, "bmo": pre_b},
    )


def experiment_corollary(st: Setting, b_fn, slack: float = DOMINATION_SLACK) -> BoundednessReport:
    """[b, M_{Omega,alpha}] with the pointwise domination by the |Omega| kernel majorant.

    Raises DominationViolation when a cell exceeds the majorant by more than
    ``slack`` relative to it.
    """
    _require_morrey(st)
    pre = _precondition_rough(st)
    g1 = st.grid.refined(2)
    pre_b = check_bmo(_b_on(b_fn, g1), st.family, extend_family(st.family, g1))
    src, tgt = _morrey_pair(st)
    a = st.params.alpha
    dom = {"comparison": "[b,M_{Omega,alpha}](f) <= sum |Omega(x-y)| |x-y|^(alpha-n) |b(x)-b(y)| |f(y)|",
           "uses_abs_kernel": True, "slack": slack, "checked_cells": 0, "violations": 0, "max_excess": 0.0}
    majorants = {}

    def apply(f, g):
        M, T = ops.abs_commutator_pair(_b_on(b_fn, g), f, st.kernel, a, _radii(g), st.quad)
        majorants[id(M)] = T
        return M

    def on_pair(fid, f, g, M):
        T = majorants.pop(id(M)).values
        excess = M.values - T * (1 + slack)
        bad = np.argwhere(excess > 0)
        dom["checked_cells"] += int(M.values.size)
        dom["max_excess"] = max(dom["max_excess"], float(np.max(M.values - T)))
        if len(bad):
            dom["violations"] += len(bad)
            raise DominationViolation(
                f"{len(bad)} cells of {fid} on m={g.m} exceed the majorant", [tuple(map(int, c)) for c in bad[:20]]
            )

    return _run("cor", st, apply, src, tgt, scale_of=_bmo_scale(st, b_fn), on_pair=on_pair,
                extra={"precondition": pre, "bmo": pre_b, "domination": dom})


def experiment_thm_A_B(st: Setting, b_fn=None) -> BoundednessReport:
    """T_{Omega,alpha} (or [b, T_{Omega,alpha}] when b is given): L^p(w^p) -> L^q(w^q)."""
    pre = _precondition_rough(st)
    src, tgt = _lebesgue_pair(st)
    a = st.params.alpha
    if b_fn is None:
        return _run("A", st, lambda f, g: ops.riesz_rough(f, st.kernel, a, st.quad), src, tgt,
                    extra={"precondition": pre})
    return _run("B", st, lambda f, g: ops.commutator_T(_b_on(b_fn, g), f, st.kernel, a, st.quad), src, tgt,
                scale_of=_bmo_scale(st, b_fn), extra={"precondition": pre})


def experiment_thm_D(st: Setting) -> BoundednessReport:
    """Uncentred M_alpha over the family: L^{p,kappa}(w^p, w^q) -> L^{q,kappa q/p}(w^q)."""
    _require_morrey(st)
    pre = check_weight_class(st.weight, st.params.p, st.params.q, st.grid)
    src, tgt = _morrey_pair(st)
    a = st.params.alpha
    return _run("D", st, lambda f, g: ops.frac_maximal(f, a, 1.0, st.family, allow_uncovered=True), src, tgt,
                extra={"precondition": pre})


# ---------------------------------------------------------------------------
# invariant suite
# ---------------------------------------------------------------------------

@dataclass
class SuiteReport:
    rows: list

    @property
    def passed(self) -> bool:
        return all(r["passed"] for r in self.rows)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def failing(self) -> list:
        return [r["name"] for r in self.rows if not r["passed"]]

    def body(self) -> dict:
        return _clean({"experiment": "identities", "rows": self.rows, "verdict": self.verdict})

    def to_json(self, timestamp: bool = True) -> str:
        d = self.body()
        if timestamp:
            d["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        return json.dumps(d, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "passed", "margin"])
        for r in self.rows:
            w.writerow([r["name"], int(r["passed"]), f"{r['margin']:.9g}"])
        return buf.getvalue()


def _row(name, passed, margin, **detail):
    return {"name": name, "passed": bool(passed), "margin": float(margin), "detail": detail}


def identity_gap(f: GridFunction, alpha: float, s: float, family: BallFamily) -> float:
    """max |M_{alpha,s'} f - M_{alpha s'}(|f|^{s'})^{1/s'}| over the cells."""
    sp = conjugate(s)
    lhs = ops.frac_maximal(f, alpha, sp, family, allow_uncovered=True).values
    g = f.with_values(np.abs(f.values) ** sp)
    rhs = ops.frac_maximal(g, alpha * sp, 1.0, family, allow_uncovered=True).values ** (1.0 / sp)
    return float(np.max(np.abs(lhs - rhs)))


def domination_constant(n: int, s: float, alpha: float) -> float:
    """C with M_{Omega,alpha} f <= C ||Omega||_s M_{alpha,s'} f for centred balls.

    Hölder on the ball |y| <= r gives (r^n/n)^(1/s) for the Omega factor;
    converting r^(alpha - n/s') to |B|^(alpha/n - 1/s') leaves
    n^(-1/s) v_n^(1/s' - alpha/n).
    """
    sp = conjugate(s)
    return (n ** (-1.0 / s) if math.isfinite(s) else 1.0) * unit_ball_volume(n) ** ((1.0 - alpha * sp / n) / sp)


def domination_check(f: GridFunction, kernel: RoughKernel, alpha: float, s: float, radii, quad=ops.DEFAULT_QUAD):
    """(violating cells, smallest relative margin) for the centred Hölder chain."""
    lhs = ops.frac_maximal_rough(f, kernel, alpha, radii, quad).values
    sp = conjugate(s)
    rhs = domination_constant(f.grid.n, s, alpha) * sphere_norm(kernel, s) * ops.centered_frac_maximal(
        f, alpha, sp, radii, quad
    ).values
    viol = int(np.sum(lhs > rhs * (1 + 1e-12)))
    pos = rhs > 0
    margin = float(np.min(1 - lhs[pos] / rhs[pos])) if np.any(pos) else 1.0
    return viol, margin


def suite_identities(grid: Grid, family: BallFamily, seed: int = 0, count: int = 3) -> SuiteReport:
    """Every cheap invariant on seeded inputs; one row per invariant."""
    n = grid.n
    rows = []
    funcs = TestFunctionFamily("random_cells", seed, count)
    members = funcs.members(grid)

    gaps = [identity_gap(f, a, s, family) for _, f in members for s in (2.0, 4.0, math.inf) for a in (0.3, 0.7)]
    rows.append(_row("maximal_identity", max(gaps) == 0.0, -max(gaps), max_gap=max(gaps)))

    radii = ops.default_radii(grid)
    kernels_ = [RoughKernel.constant(n)]
    if n == 2:
        kernels_ += [RoughKernel.expression(2, "cos(theta)"), RoughKernel.tabulate(2, "sign(cos(theta))", 64)]
    viol, margin = 0, math.inf
    for k in kernels_:
        for _, f in members:
            for s in (2.0, math.inf):
                v, mg = domination_check(f, k, 0.5, s, radii)
                viol += v
                margin = min(margin, mg)
    rows.append(_row("holder_domination", viol == 0, margin, violations=viol))

    c = grid.cell_center(grid.nearest_cell((0.0,) * n))
    centered = centered_family(c, radius_ladder(2 * grid.h, grid.half_width / 2))
    a2 = ap_constant(Weight.one(), 2.0, family, grid).constant
    rows.append(_row("ap_constant_one", abs(a2 - 1) <= 1e-9, 1e-9 - abs(a2 - 1), value=a2))

    origin = (0.0,) * n
    dbl = check_doubling(Weight.one(), 2.0, centered_family(origin, [0.25, 0.5]), 3.0)
    r9 = [row[1] for row in dbl.rows]
    ok = all(abs(r - 3.0**n) <= 1e-12 * 3.0**n and r <= 3.0 ** (2 * n) for r in r9)
    rows.append(_row("doubling_lebesgue", ok, 3.0 ** (2 * n) - max(r9), ratios=r9))

    wx = Weight.power(origin, 1.0)
    dbl = check_doubling(wx, 2.0, centered_family(origin, [0.25, 0.5]), 2.0, grid)
    r8 = [row[1] for row in dbl.rows]
    ok = all(abs(r - 2.0 ** (n + 1)) <= 1e-12 * 2.0 ** (n + 1) for r in r8) and dbl.passed
    rows.append(_row("doubling_power", ok, 2.0 ** (2 * n) - max(r8), ratios=r8))

    B = Ball(origin, grid.half_width / 2)
    E = ball_cells(grid, Ball(origin, B.radius / 2))
    lhs, rhs = check_rh_subset(wx, 2.0, E, B, grid)
    C = rh_constant(wx, 2.0, centered, grid).constant
    rows.append(_row("rh_subset", lhs <= C * rhs, C * rhs - lhs, lhs=lhs, rhs=rhs, C=C, closed_form=0.5 ** (n + 1)))

    b = GridFunction.from_callable(grid, lambda *x: np.log(np.sqrt(sum(t * t for t in x))))
    ext = extend_family(family, grid) if family.radii_array().min() >= 4 * grid.h * (1 - 1e-9) else family
    base = bmo_norm(b, family).value
    base_e = bmo_norm(b, ext).value
    worst = 1.0
    ratios = {}
    for p in (1.0, 2.0, 4.0):
        r0 = bmo_lp_oscillation(b, p, family).value / base
        r1 = bmo_lp_oscillation(b, p, ext).value / base_e
        ratios[f"p={p:g}"] = [r0, r1]
        worst = max(worst, r1 / r0, r0 / r1)
    rows.append(_row("bmo_lp_plateau", worst <= 1.3, 1.3 - worst, ratios=ratios))

    r0 = weighted_oscillation(b, 2.0, wx, family).value / base
    r1 = weighted_oscillation(b, 2.0, wx, ext).value / base_e
    w7 = max(r1 / r0, r0 / r1)
    rows.append(_row("weighted_oscillation_plateau", w7 <= 1.3, 1.3 - w7, ratios=[r0, r1]))

    bm = ball_measure(Weight.one(), Ball(origin, 1.0))
    rows.append(_row("ball_measure_lebesgue", abs(bm - math.pi ** (n / 2) / math.gamma(n / 2 + 1)) <= 1e-12, 0.0, value=bm))
    return SuiteReport(rows)


def default_family(grid: Grid, stride: int | None = None, r_max: float | None = None) -> BallFamily:
    """Subgrid family used by the experiments: centres every m/8 cells, radii 2h .. L/2."""
    stride = grid.m // 8 if stride is None else stride
    return build_ball_family(grid, stride, 2 * grid.h, grid.half_width / 2 if r_max is None else r_max)
