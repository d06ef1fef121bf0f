"""Weighted Lebesgue, Morrey and BMO norms over finite ball families.

Ball integrals are midpoint sums over the cells whose centres lie in the ball;
``|B|`` in averages is the measure of those cells.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import GridMismatch, ZeroMeasureBall
from .geometry import Ball, BallFamily, GridFunction
from .weights import Weight


@dataclass
class NormResult:
    value: float
    ball: Ball | None
    family: dict | None
    kind: str = ""

    def to_dict(self) -> dict:
        return {
            "norm_kind": self.kind,
            "value": self.value,
            "ball": None if self.ball is None else self.ball.to_dict(),
            "family_id": None if self.family is None else self.family.get("family_id"),
        }


def _weight_cells(w: Weight | None, f: GridFunction) -> np.ndarray:
    if w is None:
        return np.ones(f.grid.shape)
    if w.kind == "gridded" and w.samples.grid != f.grid:
        raise GridMismatch("weight and function live on different grids")
    return w.cell_values(f.grid)


def weighted_lp_norm(f: GridFunction, w: Weight | None, p: float) -> float:
    """(sum |f|^p w h^n)^(1/p)."""
    if not p >= 1:
        raise ValueError("p must be >= 1")
    wv = _weight_cells(w, f)
    a = np.abs(f.values)
    peak = a.max()
    if peak == 0:
        return 0.0
    # scaling by the peak keeps |f|^p finite for large p
    return float(peak * (np.sum((a / peak) ** p * wv) * f.grid.cell_volume) ** (1.0 / p))


def _ball_sums(grid, family, arrays):
    sums, counts = kernels.ball_sums(
        np.stack([a.ravel() for a in arrays]), family.centers_array(), family.radii_array(),
        grid.half_width, grid.h, grid.m,
    )
    return sums * grid.cell_volume, counts


def _sup(values, family, kind):
    k = int(np.argmax(values))
    return NormResult(float(values[k]), family.balls[k], family.provenance(), kind)


def morrey_norm_two_weight(
    f: GridFunction, u: Weight | None, v: Weight | None, p: float, kappa: float, family: BallFamily,
) -> NormResult:
    """max over B of (v(B)^(-kappa) int_B |f|^p u)^(1/p)."""
    if not p >= 1:
        raise ValueError("p must be >= 1")
    if not 0 < kappa < 1:
        raise ValueError("kappa must lie in (0, 1)")
    grid = f.grid
    a = np.abs(f.values)
    peak = a.max()
    if peak == 0:
        return NormResult(0.0, family.balls[0], family.provenance(), "morrey")
    uv = _weight_cells(u, f)
    vv = uv if v is u else _weight_cells(v, f)
    sums, _ = _ball_sums(grid, family, [(a / peak) ** p * uv, vv])
    if np.any(sums[:, 1] <= 0):
        k = int(np.argmax(sums[:, 1] <= 0))
        raise ZeroMeasureBall(f"weight has zero mass on {family.balls[k].to_dict()}")
    vals = peak * (sums[:, 0] * sums[:, 1] ** (-kappa)) ** (1.0 / p)
    return _sup(vals, family, "morrey")


def morrey_norm(f: GridFunction, w: Weight | None, p: float, kappa: float, family: BallFamily) -> NormResult:
    """max over B of (w(B)^(-kappa) int_B |f|^p w)^(1/p)."""
    return morrey_norm_two_weight(f, w, w, p, kappa, family)


def _oscillation(b: GridFunction, q: float, mu: np.ndarray, family: BallFamily, kind: str) -> NormResult:
    grid = b.grid
    # shift by one of b's own values: constants then give exact zeros
    bv = b.values - b.values.flat[0]
    L, h, m = grid.half_width, grid.h, grid.m
    centers, radii = family.centers_array(), family.radii_array()
    sums, counts = kernels.ball_sums(np.stack([bv.ravel(), mu.ravel()]), centers, radii, L, h, m)
    if np.any(counts == 0):
        raise ZeroMeasureBall("a family ball contains no cell centre")
    means = sums[:, 0] / counts
    mass = sums[:, 1]
    if np.any(mass <= 0):
        raise ZeroMeasureBall("weight has zero mass on a family ball")
    osc = kernels.ball_oscillation(bv, mu, centers, radii, means, q, L, h, m)
    vals = osc / mass if q == 1 else (osc / mass) ** (1.0 / q)
    return _sup(vals, family, kind)


def bmo_norm(b: GridFunction, family: BallFamily) -> NormResult:
    """max over B of |B|^(-1) int_B |b - b_B|."""
    return _oscillation(b, 1.0, np.ones(b.grid.shape), family, "bmo")


def bmo_lp_oscillation(b: GridFunction, p: float, family: BallFamily) -> NormResult:
    """max over B of (|B|^(-1) int_B |b - b_B|^p)^(1/p)."""
    if not p >= 1:
        raise ValueError("p must be >= 1")
    return _oscillation(b, float(p), np.ones(b.grid.shape), family, "bmo_lp")


def weighted_oscillation(b: GridFunction, q: float, mu: Weight, family: BallFamily) -> NormResult:
    """max over B of (mu(B)^(-1) int_B |b - b_B|^q mu)^(1/q), b_B the Lebesgue average."""
    if not q > 1:
        raise ValueError("q must be > 1")
    return _oscillation(b, float(q), _weight_cells(mu, b), family, "weighted_oscillation")

