"""Rough fractional integrals, maximal operators and their commutators on grids.

Linear operators are lattice convolutions with a stencil
``K[k] = Omega(k') |k h|^(alpha - n) h^n`` (k a nonzero integer offset) plus a
singular-cell weight at k = 0.  They are evaluated either by direct summation
(:mod:`roughfrac.kernels`, lexicographic over y for every x) or by FFT
convolution of the same stencil; ``QuadratureSpec.method`` picks the path.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import gamma, gammaincc

from . import kernels
from .errors import InvalidAlpha, InvalidExponent, NoCoveringBall
from .geometry import BallFamily, Grid, GridFunction, check_same_grid, radius_ladder, sphere_area, unit_ball_volume
from .sphere import RoughKernel

RULES = ("lattice", "disc", "exclusion")
METHODS = ("auto", "direct", "fft")


@dataclass(frozen=True)
class QuadratureSpec:
    """Singular-cell rule and evaluation path.

    ``rule``:
      * ``lattice`` - the centre weight makes the lattice sum of |k|^(alpha-n)
        consistent with the integral to all orders (analytic continuation of
        the lattice zeta function); exact for smooth f up to O(h^2).
      * ``disc`` - the integral of |z|^(alpha-n) over the disc of one cell
        volume, times the angular mean of Omega.
      * ``exclusion`` - drop the singular cell.

    ``method="auto"`` sums directly up to ``direct_max_cells`` cells and uses
    FFT convolution above that.
    """

    rule: str = "lattice"
    method: str = "auto"
    direct_max_cells: int = 64**2

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown singular-cell rule {self.rule!r}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    def use_fft(self, grid: Grid) -> bool:
        if self.method == "auto":
            return grid.size > self.direct_max_cells
        return self.method == "fft"

    def describe(self) -> dict:
        return {"rule": self.rule, "method": self.method}


DEFAULT_QUAD = QuadratureSpec()


@functools.lru_cache(maxsize=None)
def lattice_zeta(s: float, n: int, cutoff: int = 6) -> float:
    """Analytic continuation of sum_{k in Z^n, k != 0} |k|^(-s).

    Uses the theta-function splitting at the self-dual point; the tail beyond
    ``cutoff`` is below 1e-40.  Only 0 < s < n is needed (and supported).
    """
    if not 0 < s < n:
        raise ValueError(f"s={s} must lie in (0, {n})")
    total = 0.0
    for k in itertools.product(range(-cutoff, cutoff + 1), repeat=n):
        k2 = sum(i * i for i in k)
        if k2 == 0:
            continue
        x = math.pi * k2
        total += gammaincc(s / 2, x) * gamma(s / 2) * x ** (-s / 2)
        total += gammaincc((n - s) / 2, x) * gamma((n - s) / 2) * x ** (-(n - s) / 2)
    total += 2.0 / (s - n) - 2.0 / s
    return float(total * math.pi ** (s / 2) / gamma(s / 2))


def singular_cell_weight(grid: Grid, alpha: float, rule: str, omega_mean: float) -> float:
    """Weight of the y = x cell in the Riesz sum (already multiplied by h^n)."""
    n = grid.n
    if rule == "exclusion":
        return 0.0
    if rule == "disc":
        rho = (grid.cell_volume / unit_ball_volume(n)) ** (1.0 / n)
        return omega_mean * sphere_area(n) * rho**alpha / alpha
    return omega_mean * -lattice_zeta(n - alpha, n) * grid.h**alpha


def _check_alpha(alpha: float, n: int):
    if not (0 < alpha < n):
        raise InvalidAlpha(f"alpha={alpha} must lie in (0, {n})")


def _offsets(grid: Grid):
    """Integer offsets of the (2m-1)^n stencil, as float arrays per axis."""
    k = np.arange(-(grid.m - 1), grid.m, dtype=float)
    return np.meshgrid(*([k] * grid.n), indexing="ij")


@functools.lru_cache(maxsize=8)
def _directions(grid: Grid, kernel: RoughKernel) -> np.ndarray:
    # the cache holds the kernel itself, so identity-based keys stay valid
    ks = _offsets(grid)
    pts = np.stack([k.ravel() for k in ks], axis=1)
    c = pts.shape[0] // 2
    vals = np.zeros(pts.shape[0])
    nz = np.ones(pts.shape[0], dtype=bool)
    nz[c] = False
    vals[nz] = kernel.on_directions(pts[nz])
    out = vals.reshape(ks[0].shape)
    out.setflags(write=False)
    return out


def _angular(grid: Grid, kernel: RoughKernel, absolute: bool = False) -> np.ndarray:
    """Omega (or |Omega|) at every nonzero offset direction; the centre holds its angular mean."""
    vals = _directions(grid, kernel)
    out = np.abs(vals) if absolute else vals.copy()
    out.ravel()[out.size // 2] = (kernel.abs() if absolute else kernel).angular_mean()
    return out


@functools.lru_cache(maxsize=4)
def _distance_sq(grid: Grid) -> np.ndarray:
    d2 = sum(k * k for k in _offsets(grid))
    out = np.rint(d2).astype(np.int64)
    out.setflags(write=False)
    return out


def riesz_stencil(
    grid: Grid, kernel: RoughKernel, alpha: float, rule: str = "lattice", absolute: bool = False,
) -> np.ndarray:
    """K[k] = Omega(k') |k h|^(alpha-n) h^n with the singular-cell weight at k = 0."""
    _check_alpha(alpha, grid.n)
    ang = _angular(grid, kernel, absolute)
    d = np.sqrt(_distance_sq(grid).astype(float)) * grid.h
    c = (2 * grid.m - 1) ** grid.n // 2
    d.ravel()[c] = 1.0
    K = ang * d ** (alpha - grid.n) * grid.cell_volume
    K.ravel()[c] = singular_cell_weight(grid, alpha, rule, float(ang.ravel()[c]))
    return K


def _convolve(stencil: np.ndarray, values: np.ndarray) -> np.ndarray:
    return fftconvolve(stencil, values, mode="valid")


def _apply_linear(stencil, values, grid, quad):
    if not np.any(values):
        return np.zeros(grid.shape)
    if quad.use_fft(grid):
        return _convolve(stencil, values)
    return kernels.stencil_sum(stencil, values)


def riesz_rough(f: GridFunction, kernel: RoughKernel, alpha: float, quad: QuadratureSpec = DEFAULT_QUAD) -> GridFunction:
    """T_{Omega,alpha} f at every cell centre."""
    grid = f.grid
    if kernel.n != grid.n:
        raise ValueError("kernel and grid dimensions differ")
    K = riesz_stencil(grid, kernel, alpha, quad.rule)
    return f.with_values(_apply_linear(K, f.values, grid, quad))


def commutator_T(
    b: GridFunction, f: GridFunction, kernel: RoughKernel, alpha: float,
    quad: QuadratureSpec = DEFAULT_QUAD, form: str = "kernel",
) -> GridFunction:
    """[b, T_{Omega,alpha}] f = b T f - T(b f).

    ``form="kernel"`` sums Omega |x-y|^(alpha-n) (b(x) - b(y)) f(y), where the
    singular cell drops out; ``form="difference"`` applies T twice.
    """
    grid = check_same_grid(b, f)
    K = riesz_stencil(grid, kernel, alpha, quad.rule)
    # shifting b by one of its own values leaves the commutator unchanged and
    # makes a constant b give exact zeros on every path
    bv = b.values - b.values.flat[0]
    if form == "difference":
        out = bv * _apply_linear(K, f.values, grid, quad) - _apply_linear(K, bv * f.values, grid, quad)
    elif form == "kernel":
        K = K.copy()
        K.ravel()[K.size // 2] = 0.0
        if not np.any(bv) or not np.any(f.values):
            out = np.zeros(grid.shape)
        elif quad.use_fft(grid):
            out = bv * _convolve(K, f.values) - _convolve(K, bv * f.values)
        else:
            out = kernels.commutator_sum(K, bv, f.values)
    else:
        raise ValueError(f"unknown commutator form {form!r}")
    return f.with_values(out)


def _check_radii(radii) -> np.ndarray:
    r = np.asarray(radii, dtype=float)
    if r.ndim != 1 or r.size == 0 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise ValueError("radii must be a nonempty increasing sequence of positive numbers")
    return r


def _ladder(stencil, values, radii, grid, quad):
    """Cumulative centred-ball sums, shape (J,) + grid.shape."""
    if not np.any(values):
        return np.zeros((len(radii),) + grid.shape)
    if not quad.use_fft(grid):
        return kernels.ladder_sums(stencil, values, radii, grid.h)
    bins = kernels.radius_bins(radii, grid.h, grid.m, grid.n)[_distance_sq(grid)]
    out = np.empty((len(radii),) + grid.shape)
    acc = np.zeros(grid.shape)
    for j in range(len(radii)):
        ring = np.where(bins == j, stencil, 0.0)
        if np.any(ring):
            acc = acc + _convolve(ring, values)
        out[j] = acc
    # the summands are nonnegative; clear FFT round-off below zero
    return np.maximum(out, 0.0)


def _angular_abs_stencil(grid, kernel):
    return _angular(grid, kernel, absolute=True) * grid.cell_volume


def frac_maximal_rough(
    f: GridFunction, kernel: RoughKernel, alpha: float, radii, quad: QuadratureSpec = DEFAULT_QUAD,
) -> GridFunction:
    """M_{Omega,alpha} f: max over the radii of r^(alpha-n) sum_{|y-x|<=r} |Omega((x-y)') f(y)| h^n.

    At y = x the direction is undefined; the cell carries the angular mean of |Omega|.
    """
    grid = f.grid
    _check_alpha(alpha, grid.n)
    r = _check_radii(radii)
    S = _ladder(_angular_abs_stencil(grid, kernel), np.abs(f.values), r, grid, quad)
    scale = r ** (alpha - grid.n)
    return f.with_values(np.max(S * scale.reshape((-1,) + (1,) * grid.n), axis=0))


def centered_frac_maximal(
    f: GridFunction, alpha: float, s: float, radii, quad: QuadratureSpec = DEFAULT_QUAD,
) -> GridFunction:
    """M_{alpha,s} restricted to balls centred at x, normalised by |B| = v_n r^n."""
    grid = f.grid
    n = grid.n
    _check_exponents(alpha, s, n)
    r = _check_radii(radii)
    a = np.abs(f.values)
    peak = a.max()
    if peak == 0:
        return f.with_values(np.zeros(grid.shape))
    ones = np.full((2 * grid.m - 1,) * n, grid.cell_volume)
    # normalise by the peak so |f|^s neither underflows nor overflows
    S = _ladder(ones, (a / peak) ** s, r, grid, quad)
    vol = unit_ball_volume(n) * r**n
    scale = vol ** (alpha * s / n - 1.0)
    core = np.max(S * scale.reshape((-1,) + (1,) * n), axis=0)
    return f.with_values(peak * core ** (1.0 / s))


def _check_exponents(alpha, s, n):
    _check_alpha(alpha, n)
    if not s >= 1 or math.isinf(s):
        raise InvalidExponent(f"s={s} must lie in [1, inf)")
    if alpha * s >= n:
        raise InvalidExponent(f"alpha*s={alpha * s} must be < n={n}")


def _family_scatter(grid: Grid, family: BallFamily, per_ball: np.ndarray, allow_uncovered: bool):
    out = kernels.ball_scatter_max(
        per_ball, family.centers_array(), family.radii_array(), grid.half_width, grid.h, grid.m, grid.n
    )
    uncovered = np.isneginf(out)
    if np.any(uncovered):
        if not allow_uncovered:
            first = tuple(int(i) for i in np.argwhere(uncovered)[0])
            raise NoCoveringBall(f"cell {first} lies in no family ball")
        out = np.where(uncovered, 0.0, out)
    return out


def _family_sums(grid: Grid, family: BallFamily, values: np.ndarray):
    sums, counts = kernels.ball_sums(
        values.reshape(1, -1), family.centers_array(), family.radii_array(), grid.half_width, grid.h, grid.m
    )
    return sums[:, 0] * grid.cell_volume, counts * grid.cell_volume


def hl_maximal(f: GridFunction, family: BallFamily, allow_uncovered: bool = False) -> GridFunction:
    """Uncentred Hardy-Littlewood maximal function over the balls of ``family``.

    |B| is the measure of the cells of B, so constants average exactly.
    """
    grid = f.grid
    sums, vols = _family_sums(grid, family, np.abs(f.values))
    avg = np.divide(sums, vols, out=np.zeros_like(sums), where=vols > 0)
    return f.with_values(_family_scatter(grid, family, avg, allow_uncovered))


def _frac_core(grid, g, beta, family, allow_uncovered):
    # max over balls B containing x of |B|^(beta/n - 1) sum_B g h^n
    sums, vols = _family_sums(grid, family, g)
    per_ball = np.zeros_like(sums)
    np.multiply(sums, vols ** (beta / grid.n - 1.0), out=per_ball, where=vols > 0)
    return _family_scatter(grid, family, per_ball, allow_uncovered)


def frac_maximal(
    f: GridFunction, alpha: float, s: float, family: BallFamily, allow_uncovered: bool = False,
) -> GridFunction:
    """M_{alpha,s} f = sup over family balls B containing x of (|B|^(alpha s/n - 1) int_B |f|^s)^(1/s).

    Evaluated literally as M_{alpha s}(|f|^s)^(1/s), so that identity holds
    bit for bit; |f|^s is not rescaled.
    """
    grid = f.grid
    _check_exponents(alpha, s, grid.n)
    core = _frac_core(grid, np.abs(f.values) ** s, alpha * s, family, allow_uncovered)
    return f.with_values(core if s == 1 else core ** (1.0 / s))


def abs_commutator_pair(
    b: GridFunction, f: GridFunction, kernel: RoughKernel, alpha: float, radii,
    quad: QuadratureSpec = DEFAULT_QUAD,
):
    """([b, M_{Omega,alpha}] f, T_{|Omega|,alpha} applied with |b(x)-b(y)| |f(y)|).

    Both sums share one pass over the support of f.  The second array is the
    pointwise majorant of the first: every centred-ball term is bounded by the
    corresponding kernel term since r^(alpha-n) <= |x-y|^(alpha-n) inside the ball.
    """
    grid = check_same_grid(b, f)
    _check_alpha(alpha, grid.n)
    r = _check_radii(radii)
    ang = _angular_abs_stencil(grid, kernel)
    ker = riesz_stencil(grid, kernel, alpha, quad.rule, absolute=True)
    bv = b.values - b.values.flat[0]
    fa = np.abs(f.values)
    if not np.any(bv) or not np.any(fa):
        z = np.zeros(grid.shape)
        return f.with_values(z), f.with_values(z)
    S, T = kernels.abs_commutator_sums(ang, ker, bv, fa, r, grid.h)
    scale = r ** (alpha - grid.n)
    M = np.max(S * scale.reshape((-1,) + (1,) * grid.n), axis=0)
    return f.with_values(M), f.with_values(T)


def commutator_M(
    b: GridFunction, f: GridFunction, kernel: RoughKernel, alpha: float, radii,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> GridFunction:
    """[b, M_{Omega,alpha}] f: max over radii of r^(alpha-n) sum |b(x)-b(y)| |Omega| |f(y)| h^n."""
    return abs_commutator_pair(b, f, kernel, alpha, radii, quad)[0]


def commutator_T_abs(
    b: GridFunction, f: GridFunction, kernel: RoughKernel, alpha: float, quad: QuadratureSpec = DEFAULT_QUAD,
) -> GridFunction:
    """sum_y |Omega((x-y)')| |x-y|^(alpha-n) |b(x)-b(y)| |f(y)| h^n."""
    grid = check_same_grid(b, f)
    return abs_commutator_pair(b, f, kernel, alpha, [grid.h], quad)[1]


def default_radii(grid: Grid, r_min: float | None = None, r_max: float | None = None) -> np.ndarray:
    """sqrt(2) ladder from ``r_min`` (default 2h) to ``r_max`` (default L)."""
    return np.array(radius_ladder(2 * grid.h if r_min is None else r_min, grid.half_width if r_max is None else r_max))
