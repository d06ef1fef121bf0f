"""Grids, balls, ball families and validated exponent bundles.

Everything here is immutable; the other modules only read from these objects.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConstraintViolation, GridMismatch, InvalidLadder

SQRT2 = math.sqrt(2.0)

# Relative slack used for every "cell centre lies in the ball" test, so that
# cells sitting exactly on a ladder radius are included consistently.
MEMBERSHIP_RTOL = 1e-10


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1} (not normalised)."""
    return n * unit_ball_volume(n)


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centred grid on the box [-L, L]^n."""

    n: int
    half_width: float
    m: int

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.n}")
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise ValueError("half_width must be positive and finite")
        if self.m < 8 or self.m % 2:
            raise ValueError(f"m must be even and >= 8, got {self.m}")
        object.__setattr__(self, "half_width", float(self.half_width))

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.m

    @property
    def cell_volume(self) -> float:
        return self.h**self.n

    @property
    def shape(self) -> tuple:
        return (self.m,) * self.n

    @property
    def size(self) -> int:
        return self.m**self.n

    def centers(self) -> np.ndarray:
        return -self.half_width + (np.arange(self.m) + 0.5) * self.h

    def coords(self) -> tuple:
        c = self.centers()
        return tuple(np.meshgrid(*([c] * self.n), indexing="ij"))

    def points(self) -> np.ndarray:
        return np.stack([x.ravel() for x in self.coords()], axis=1)

    def nearest_cell(self, point) -> tuple:
        idx = np.floor((np.asarray(point, float) + self.half_width) / self.h)
        return tuple(int(i) for i in np.clip(idx, 0, self.m - 1))

    def cell_center(self, index) -> tuple:
        return tuple(float(-self.half_width + (i + 0.5) * self.h) for i in index)

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.n, self.half_width, self.m * factor)

    def describe(self) -> dict:
        return {"n": self.n, "L": self.half_width, "m": self.m}


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real values on the cells of a grid, zero outside the box."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise GridMismatch(f"values have shape {v.shape}, grid expects {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable) -> "GridFunction":
        """Sample ``fn(*coords)`` at the cell centres."""
        return cls(grid, np.broadcast_to(fn(*grid.coords()), grid.shape))

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.shape))

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def abs(self) -> "GridFunction":
        return self.with_values(np.abs(self.values))

    def scaled(self, c: float) -> "GridFunction":
        return self.with_values(c * self.values)

    def __add__(self, other):
        check_same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __mul__(self, other):
        check_same_grid(self, other)
        return self.with_values(self.values * other.values)


def check_same_grid(*objs) -> Grid:
    grids = [o.grid if isinstance(o, GridFunction) else o for o in objs if o is not None]
    g0 = grids[0]
    for g in grids[1:]:
        if g != g0:
            raise GridMismatch(f"grid {g.describe()} does not match {g0.describe()}")
    return g0


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def n(self) -> int:
        return len(self.center)

    def volume(self) -> float:
        """Lebesgue measure of the ball itself (not of its cells)."""
        return unit_ball_volume(self.n) * self.radius**self.n

    def to_dict(self) -> dict:
        return {"center": list(self.center), "radius": self.radius}


def dilate(ball: Ball, lam: float) -> Ball:
    if not lam > 0:
        raise ValueError("dilation factor must be positive")
    return Ball(ball.center, lam * ball.radius)


def radius_ladder(r_min: float, r_max: float, ratio: float = SQRT2) -> tuple:
    """Geometric radii r_min * ratio**j that do not exceed r_max."""
    if not (r_min > 0 and math.isfinite(r_max)):
        raise InvalidLadder("radii must be positive and finite")
    if r_min > r_max:
        raise InvalidLadder(f"r_min={r_min} exceeds r_max={r_max}")
    out = []
    j = 0
    while True:
        r = r_min * ratio**j
        if r > r_max * (1 + 1e-9):
            break
        out.append(float(r))
        j += 1
    return tuple(out)


@dataclass(frozen=True)
class BallFamily:
    """Finite surrogate for "all balls", with provenance for reproducibility."""

    balls: tuple
    descriptor: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.balls:
            raise ValueError("a ball family must be nonempty")
        object.__setattr__(self, "balls", tuple(self.balls))

    def __len__(self):
        return len(self.balls)

    def __iter__(self):
        return iter(self.balls)

    def centers_array(self) -> np.ndarray:
        return np.array([b.center for b in self.balls], dtype=float)

    def radii_array(self) -> np.ndarray:
        return np.array([b.radius for b in self.balls], dtype=float)

    @property
    def family_id(self) -> str:
        payload = json.dumps(
            [self.descriptor.get("kind", "custom"), self.centers_array().tolist(), self.radii_array().tolist()]
        )
        return hashlib.sha1(payload.encode()).hexdigest()[:12]

    def provenance(self) -> dict:
        return {**self.descriptor, "family_id": self.family_id, "size": len(self)}

    def union(self, other: "BallFamily") -> "BallFamily":
        seen = dict.fromkeys(self.balls)
        seen.update(dict.fromkeys(other.balls))
        balls = sorted(seen, key=lambda b: (b.center, b.radius))
        return BallFamily(tuple(balls), {"kind": "union", "parts": [self.provenance(), other.provenance()]})

    def restrict(self, predicate: Callable[[Ball], bool], label: str = "subset") -> "BallFamily":
        balls = tuple(b for b in self.balls if predicate(b))
        return BallFamily(balls, {"kind": label, "parent": self.provenance()})


def build_ball_family(grid: Grid, stride: int, r_min: float, r_max: float) -> BallFamily:
    """Balls centred on every ``stride``-th cell with a sqrt(2) radius ladder.

    Centres sit at cell indices ``k*stride + stride//2`` along each axis, so
    ``stride == m`` gives the single cell nearest the origin.
    """
    if r_min > r_max:
        raise InvalidLadder(f"r_min={r_min} exceeds r_max={r_max}")
    tol = 1e-9 * grid.h
    if r_min < 2 * grid.h - tol:
        raise InvalidLadder(f"r_min={r_min} is below 2h={2 * grid.h}")
    if r_max > grid.half_width + tol:
        raise InvalidLadder(f"r_max={r_max} exceeds the half width {grid.half_width}")
    if stride < 1 or grid.m % stride:
        raise ValueError(f"stride {stride} must divide m={grid.m}")
    radii = radius_ladder(r_min, r_max)
    idx = np.arange(0, grid.m, stride) + stride // 2
    c = grid.centers()[idx]
    centers = sorted(np.array(np.meshgrid(*([c] * grid.n), indexing="ij")).reshape(grid.n, -1).T.tolist())
    balls = tuple(Ball(tuple(ctr), r) for ctr in centers for r in radii)
    desc = {
        "kind": "subgrid",
        "grid": grid.describe(),
        "stride": stride,
        "r_min": r_min,
        "r_max": r_max,
        "radii": list(radii),
    }
    return BallFamily(balls, desc)


def centered_family(center: Sequence[float], radii: Sequence[float]) -> BallFamily:
    """Nested balls about one fixed point."""
    balls = tuple(Ball(tuple(center), r) for r in sorted(radii))
    return BallFamily(balls, {"kind": "nested", "center": [float(c) for c in center], "radii": list(map(float, radii))})


@dataclass(frozen=True)
class OperatorParams:
    n: int
    alpha: float
    s: float
    s_prime: float
    p: float
    q: float
    kappa: float | None
    p1: float
    q1: float

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        if math.isinf(self.s):
            d["s"] = "inf"
        return d

    @property
    def target_kappa(self) -> float:
        """Morrey index of the target space, kappa*q/p."""
        return self.kappa * self.q / self.p


def conjugate(s: float) -> float:
    """Hölder conjugate, with s' = 1 for s = inf."""
    if math.isinf(s):
        return 1.0
    return s / (s - 1.0)


def derive_params(n: int, alpha: float, s: float, p: float, kappa: float | None = None) -> OperatorParams:
    """Solve 1/q = 1/p - alpha/n and check every constraint of the bundle.

    ``kappa=None`` is accepted for the Lebesgue (non-Morrey) experiments.
    """
    for name, v in (("alpha", alpha), ("p", p)):
        if not math.isfinite(v):
            raise ConstraintViolation(name, "must be finite")
    if kappa is not None and not math.isfinite(kappa):
        raise ConstraintViolation("kappa", "must be finite")
    if n not in (2, 3):
        raise ConstraintViolation("n", "dimension must be 2 or 3")
    if math.isnan(s) or s <= 1:
        raise ConstraintViolation("s <= 1", "requires 1 < s <= inf")
    if not 0 < alpha < n:
        raise ConstraintViolation("alpha", "requires 0 < alpha < n")
    sp = conjugate(float(s))
    if p <= sp:
        raise ConstraintViolation("p <= s'", "requires s' < p strictly")
    if p * alpha >= n:
        raise ConstraintViolation("p >= n/alpha", "requires p < n/alpha")
    q = n * p / (n - alpha * p)
    if kappa is not None:
        if kappa <= 0:
            raise ConstraintViolation("kappa <= 0", "requires 0 < kappa < p/q")
        if kappa >= p / q:
            raise ConstraintViolation("kappa >= p/q", "requires 0 < kappa < p/q")
    return OperatorParams(
        n=n, alpha=float(alpha), s=float(s), s_prime=sp, p=float(p), q=q,
        kappa=None if kappa is None else float(kappa), p1=p / sp, q1=q / sp,
    )
