"""Weights, ball measures and Muckenhoupt / reverse Hölder constant estimates.

All estimators average with the midpoint rule on the grid: an average over a
ball is ``sum_{cells in B} g / #cells``, so constant weights average to exactly
one and discrete Jensen/Hölder inequalities hold without slack.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateWeight, EmptySubset, GridMismatch, NonFiniteWeight, NonIntegrable
from .geometry import Ball, BallFamily, Grid, GridFunction, dilate, sphere_area, unit_ball_volume


@dataclass(frozen=True, eq=False)
class Weight:
    """``constant_one``, a power weight ``coef*|x-c|**beta``, or gridded samples."""

    kind: str
    center: tuple | None = None
    beta: float = 0.0
    coef: float = 1.0
    samples: GridFunction | None = None

    def __post_init__(self):
        if self.kind == "power":
            object.__setattr__(self, "center", tuple(float(c) for c in self.center))
            if not self.coef > 0:
                raise ValueError("power weight coefficient must be positive")
        elif self.kind == "gridded":
            v = self.samples.values
            if np.any(v < 0):
                raise ValueError("gridded weights must be nonnegative")
            if not np.all(np.isfinite(v)):
                raise NonFiniteWeight("gridded weight has non-finite cells")
        elif self.kind == "one":
            if not self.coef > 0:
                raise ValueError("constant weight must be positive")
        else:
            raise ValueError(f"unknown weight kind {self.kind!r}")

    @classmethod
    def one(cls) -> "Weight":
        return cls("one")

    @classmethod
    def power(cls, center, beta: float, coef: float = 1.0) -> "Weight":
        return cls("power", center=tuple(center), beta=float(beta), coef=float(coef))

    @classmethod
    def gridded(cls, samples: GridFunction) -> "Weight":
        return cls("gridded", samples=samples)

    def raised(self, t: float) -> "Weight":
        """Pointwise t-th power; closed-form kinds stay closed-form."""
        if self.kind == "one":
            return self if self.coef == 1.0 else Weight("one", coef=self.coef**t)
        if self.kind == "power":
            return Weight.power(self.center, self.beta * t, self.coef**t)
        v = self.samples.values
        if t < 0 and np.any(v == 0):
            raise NonFiniteWeight("zero cells raised to a negative power")
        with np.errstate(over="ignore"):
            out = v**t
        if not np.all(np.isfinite(out)):
            raise NonFiniteWeight("raising produced non-finite cells")
        return Weight.gridded(self.samples.with_values(out))

    def scaled(self, c: float) -> "Weight":
        if not c > 0:
            raise ValueError("scale must be positive")
        if self.kind == "one":
            return Weight("one", coef=self.coef * c)
        if self.kind == "power":
            return Weight.power(self.center, self.beta, self.coef * c)
        return Weight.gridded(self.samples.scaled(c))

    def cell_values(self, grid: Grid) -> np.ndarray:
        """Weight values per cell for midpoint sums.

        For a power weight, a cell whose centre lies within the equal-volume
        radius of the singular point gets the exact average of the weight over
        the disc of equal volume centred at that point.
        """
        if self.kind == "one":
            return np.full(grid.shape, self.coef)
        if self.kind == "gridded":
            if self.samples.grid != grid:
                raise GridMismatch("gridded weight lives on a different grid")
            return np.asarray(self.samples.values)
        coords = grid.coords()
        r = np.sqrt(sum((x - c) ** 2 for x, c in zip(coords, self.center)))
        with np.errstate(divide="ignore"):
            vals = self.coef * r**self.beta
        rho = (grid.cell_volume / unit_ball_volume(grid.n)) ** (1.0 / grid.n)
        near = r < rho
        if self.beta < 0 and np.any(near):
            a = grid.n + self.beta
            if a <= 0:
                raise NonIntegrable(f"|x|^{self.beta} is not integrable near its centre in dimension {grid.n}")
            vals[near] = self.coef * sphere_area(grid.n) * rho**a / a / grid.cell_volume
        if not np.all(np.isfinite(vals)):
            raise NonFiniteWeight("power weight is non-finite on the grid")
        return vals

    def describe(self) -> dict:
        if self.kind == "one":
            return {"kind": "one"} if self.coef == 1.0 else {"kind": "one", "coef": self.coef}
        if self.kind == "power":
            d = {"kind": "power", "center": list(self.center), "beta": self.beta}
            if self.coef != 1.0:
                d["coef"] = self.coef
            return d
        return {"kind": "gridded", "grid": self.samples.grid.describe()}


def raise_weight(w: Weight, t: float) -> Weight:
    return w.raised(t)


@dataclass(frozen=True, eq=False)
class WeightPair:
    u: Weight
    v: Weight


def _centered_on(w: Weight, ball: Ball) -> bool:
    return w.kind == "power" and len(w.center) == ball.n and np.allclose(w.center, ball.center, rtol=0, atol=1e-14)


def ball_measure(w: Weight, ball: Ball, grid: Grid | None = None, method: str = "auto") -> float:
    """w(B) = integral of w over B.

    ``method="auto"`` uses the closed form when it exists (constant weight, or
    power weight on a ball centred at its singular point) and the midpoint rule
    on ``grid`` otherwise; ``"exact"`` and ``"midpoint"`` force one path.
    """
    closed = w.kind == "one" or (w.kind == "power" and (w.beta == 0 or _centered_on(w, ball)))
    if method == "exact" or (method == "auto" and closed):
        if not closed:
            raise ValueError("no closed form for this weight/ball pair")
        n = ball.n
        if w.kind == "one":
            return w.coef * ball.volume()
        a = n + w.beta
        if a <= 0:
            raise NonIntegrable(f"n + beta = {a} <= 0 on a ball containing the singularity")
        return w.coef * sphere_area(n) * ball.radius**a / a
    if w.kind == "power" and w.beta <= -ball.n and math.dist(w.center, ball.center) <= ball.radius:
        raise NonIntegrable(f"n + beta = {ball.n + w.beta} <= 0 on a ball containing the singularity")
    if grid is None:
        raise ValueError("midpoint ball measure needs a grid")
    sums, _ = kernels.ball_sums(
        w.cell_values(grid).reshape(1, -1), np.array([ball.center]), np.array([ball.radius]),
        grid.half_width, grid.h, grid.m,
    )
    return float(sums[0, 0] * grid.cell_volume)


@dataclass
class WeightConstantReport:
    weight_class: str
    exponents: dict
    constant: float
    worst_ball: Ball | None
    family: dict
    per_ball: np.ndarray = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "class": self.weight_class,
            "exponents": self.exponents,
            "constant": self.constant if math.isfinite(self.constant) else "inf",
            "worst_ball": None if self.worst_ball is None else self.worst_ball.to_dict(),
            "family": self.family,
        }


def _family_averages(grid: Grid, family: BallFamily, arrays):
    sums, counts = kernels.ball_sums(
        np.stack([a.ravel() for a in arrays]), family.centers_array(), family.radii_array(),
        grid.half_width, grid.h, grid.m,
    )
    if np.any(counts == 0):
        raise DegenerateWeight("a family ball contains no cell centre")
    return sums / counts[:, None]


def _report(tag, exps, values, family):
    values = np.asarray(values, dtype=float)
    if np.any(np.isnan(values)):
        values = np.where(np.isnan(values), np.inf, values)
    k = int(np.argmax(values))
    return WeightConstantReport(tag, exps, float(values[k]), family.balls[k], family.provenance(), values)


def _positive_cells(w: Weight, grid: Grid) -> np.ndarray:
    vals = w.cell_values(grid)
    if np.any(vals <= 0):
        raise DegenerateWeight("weight vanishes on some cells; negative powers are undefined")
    return vals


def ap_constant(w: Weight, p: float, family: BallFamily, grid: Grid) -> WeightConstantReport:
    """max over the family of avg(w) * avg(w^{-1/(p-1)})^{p-1}."""
    if not p > 1:
        raise ValueError("ap_constant needs p > 1")
    vals = _positive_cells(w, grid)
    with np.errstate(over="ignore"):
        dual = vals ** (-1.0 / (p - 1.0))
    avg = _family_averages(grid, family, [vals, dual])
    with np.errstate(over="ignore", invalid="ignore"):
        per_ball = avg[:, 0] * avg[:, 1] ** (p - 1.0)
    return _report("A_p", {"p": p}, per_ball, family)


def apq_constant(w: Weight, p: float, q: float, family: BallFamily, grid: Grid) -> WeightConstantReport:
    """max over the family of avg(w^q)^{1/q} * avg(w^{-p'})^{1/p'}.

    At p = 1 the second factor becomes the largest cell value of 1/w.
    """
    if not (1 <= p < q < math.inf):
        raise ValueError("apq_constant needs 1 <= p < q < inf")
    vals = _positive_cells(w, grid)
    with np.errstate(over="ignore"):
        if p == 1:
            avg = _family_averages(grid, family, [vals**q])
            inv_max = _family_max(grid, family, 1.0 / vals)
            per_ball = avg[:, 0] ** (1.0 / q) * inv_max
        else:
            pp = p / (p - 1.0)
            avg = _family_averages(grid, family, [vals**q, vals ** (-pp)])
            per_ball = avg[:, 0] ** (1.0 / q) * avg[:, 1] ** (1.0 / pp)
    return _report("A(p,q)", {"p": p, "q": q}, per_ball, family)


def _family_max(grid: Grid, family: BallFamily, values: np.ndarray) -> np.ndarray:
    # ess sup over a ball as the max over its cell centres
    out = np.empty(len(family))
    L, h, m = grid.half_width, grid.h, grid.m
    for k, ball in enumerate(family):
        slices, mask = kernels._ball_mask_np(np.asarray(ball.center), ball.radius, L, h, m)
        out[k] = values[slices][mask].max() if slices is not None and mask.any() else np.nan
    return out


def rh_constant(w: Weight, r: float, family: BallFamily, grid: Grid) -> WeightConstantReport:
    """max over the family of avg(w^r)^{1/r} / avg(w)."""
    if not r > 1:
        raise ValueError("rh_constant needs r > 1")
    vals = w.cell_values(grid)
    avg = _family_averages(grid, family, [vals**r, vals])
    if np.any(avg[:, 1] == 0):
        raise DegenerateWeight("weight vanishes on a family ball")
    return _report("RH_r", {"r": r}, avg[:, 0] ** (1.0 / r) / avg[:, 1], family)


@dataclass
class DoublingCheck:
    rows: list
    calibration: float
    flagged: list

    @property
    def passed(self) -> bool:
        return not self.flagged


def check_doubling(
    w: Weight, p: float, family: BallFamily, lam: float, grid: Grid | None = None, method: str = "auto",
) -> DoublingCheck:
    """Ratios w(lam*B)/w(B) against lam^{np}.

    The constant is calibrated as the largest ratio at lam = 2 over the same
    family; balls whose ratio exceeds ``calibration * lam**(n*p)`` are flagged.
    """
    if not lam >= 1:
        raise ValueError("dilation factor must be >= 1")
    rows = []
    calib = 0.0
    for ball in family:
        base = ball_measure(w, ball, grid, method)
        if base <= 0:
            raise DegenerateWeight("weight vanishes on a family ball")
        ratio = ball_measure(w, dilate(ball, lam), grid, method) / base if lam != 1 else 1.0
        calib = max(calib, ball_measure(w, dilate(ball, 2.0), grid, method) / base)
        rows.append((ball, ratio, lam ** (ball.n * p)))
    flagged = [row for row in rows if row[1] > calib * row[2] * (1 + 1e-12)]
    return DoublingCheck(rows, calib, flagged)


def check_rh_subset(w: Weight, r: float, subset, ball: Ball, grid: Grid):
    """(w(E)/w(B), (|E|/|B|)^{(r-1)/r}) for a cell subset E of the ball B.

    ``subset`` is a boolean mask over the grid; cell counts stand in for
    Lebesgue measure, consistent with the midpoint rule.
    """
    subset = np.asarray(subset, dtype=bool)
    slices, mask = kernels._ball_mask_np(np.asarray(ball.center), ball.radius, grid.half_width, grid.h, grid.m)
    in_ball = np.zeros(grid.shape, dtype=bool)
    if slices is not None:
        in_ball[slices] = mask
    if not subset.any():
        raise EmptySubset("E has no cells")
    if np.any(subset & ~in_ball):
        raise ValueError("E must be a subset of the cells of B")
    vals = w.cell_values(grid)
    wB = vals[in_ball].sum()
    if wB <= 0:
        raise DegenerateWeight("weight vanishes on B")
    lhs = float(vals[subset].sum() / wB)
    rhs = float((subset.sum() / in_ball.sum()) ** ((r - 1.0) / r))
    return lhs, rhs


def ball_cells(grid: Grid, ball: Ball) -> np.ndarray:
    """Boolean mask of the cells whose centres lie in ``ball``."""
    out = np.zeros(grid.shape, dtype=bool)
    slices, mask = kernels._ball_mask_np(np.asarray(ball.center), ball.radius, grid.half_width, grid.h, grid.m)
    if slices is not None:
        out[slices] = mask
    return out


def power_weight_apq_range(n: int, p: float, q: float) -> tuple:
    """Open interval of beta with |x|^beta in A(p,q): (-n/q, n/p')."""
    pp = math.inf if p == 1 else p / (p - 1.0)
    return (-n / q, n / pp)


def divergence_growth(w: Weight, estimator, family_for, grids) -> list:
    """Estimated constants along a refinement sequence.

    ``estimator(w, family, grid)`` returns a report; ``family_for(grid)`` builds
    the family used at that resolution.  Returns the list of constants.
    """
    out = []
    for g in grids:
        try:
            out.append(estimator(w, family_for(g), g).constant)
        except NonIntegrable:
            out.append(math.inf)
    return out
