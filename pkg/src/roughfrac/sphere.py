"""Degree-zero homogeneous kernels given by their values on the unit sphere."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonIntegrable, ZeroVector
from .expr import Expression

ANGLE_VARIABLES = ("theta", "phi")
DEFAULT_CIRCLE_SAMPLES = 4096
DEFAULT_SPHERE_SAMPLES = (256, 512)


@dataclass(frozen=True, eq=False)
class RoughKernel:
    """Omega on S^{n-1}: a constant, an angular expression, or a table.

    For n = 2 the angle is ``theta = atan2(y2, y1)`` in [0, 2pi).  For n = 3,
    ``theta`` is the colatitude in [0, pi] and ``phi`` the longitude.  Tables
    are evaluated by nearest sample, so discontinuous kernels stay exact.
    """

    n: int
    kind: str = "constant"
    value: float = 1.0
    expr: str | None = None
    table: np.ndarray | None = None
    scale: float = 1.0
    absolute: bool = False

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError("kernels are defined for n = 2 or 3")
        if self.kind == "expr":
            object.__setattr__(self, "_expr", Expression(self.expr, ANGLE_VARIABLES))
        elif self.kind == "table":
            t = np.array(self.table, dtype=float)
            if t.ndim != self.n - 1 or t.size == 0:
                raise ValueError(f"table for n={self.n} must be {self.n - 1}-dimensional")
            t.setflags(write=False)
            object.__setattr__(self, "table", t)
        elif self.kind != "constant":
            raise ValueError(f"unknown kernel kind {self.kind!r}")

    # constructors
    @classmethod
    def constant(cls, n: int, c: float = 1.0) -> "RoughKernel":
        return cls(n, "constant", value=float(c))

    @classmethod
    def expression(cls, n: int, text: str) -> "RoughKernel":
        return cls(n, "expr", expr=text)

    @classmethod
    def tabulate(cls, n: int, text: str, samples) -> "RoughKernel":
        """Sample an angular expression onto a nearest-sample table."""
        e = Expression(text, ANGLE_VARIABLES)
        if n == 2:
            theta = 2 * np.pi * np.arange(int(samples)) / int(samples)
            vals = e(theta=theta, phi=np.zeros_like(theta))
        else:
            mt, mp = (samples, 2 * samples) if np.isscalar(samples) else samples
            theta = (np.arange(mt) + 0.5) * np.pi / mt
            phi = 2 * np.pi * np.arange(mp) / mp
            T, P = np.meshgrid(theta, phi, indexing="ij")
            vals = np.broadcast_to(e(theta=T, phi=P), T.shape)
        return cls(n, "table", table=vals, expr=text)

    def abs(self) -> "RoughKernel":
        return RoughKernel(self.n, self.kind, self.value, self.expr, self.table, abs(self.scale), True)

    def scaled(self, c: float) -> "RoughKernel":
        return RoughKernel(self.n, self.kind, self.value, self.expr, self.table, self.scale * c, self.absolute)

    # evaluation
    def on_angles(self, theta, phi=None) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.kind == "constant":
            out = np.full(theta.shape, self.value)
        elif self.kind == "expr":
            out = self._expr(theta=theta, phi=np.zeros_like(theta) if phi is None else phi)
            out = np.broadcast_to(out, theta.shape).astype(float)
        elif self.n == 2:
            mt = self.table.shape[0]
            k = np.rint(np.mod(theta, 2 * np.pi) * mt / (2 * np.pi)).astype(np.int64) % mt
            out = self.table[k]
        else:
            mt, mp = self.table.shape
            i = np.clip(np.floor(theta * mt / np.pi).astype(np.int64), 0, mt - 1)
            j = np.rint(np.mod(phi, 2 * np.pi) * mp / (2 * np.pi)).astype(np.int64) % mp
            out = self.table[i, j]
        out = self.scale * out
        return np.abs(out) if self.absolute else out

    def on_directions(self, y) -> np.ndarray:
        """Evaluate at points ``y`` of shape (..., n); only y/|y| matters."""
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.n:
            raise ValueError(f"points must have last axis {self.n}")
        r = np.sqrt(np.sum(y * y, axis=-1))
        if np.any(r == 0):
            raise ZeroVector("kernel is undefined at the origin")
        if self.n == 2:
            theta = np.mod(np.arctan2(y[..., 1], y[..., 0]), 2 * np.pi)
            return self.on_angles(theta)
        theta = np.arccos(np.clip(y[..., 2] / r, -1.0, 1.0))
        phi = np.mod(np.arctan2(y[..., 1], y[..., 0]), 2 * np.pi)
        return self.on_angles(theta, phi)

    def __call__(self, y):
        return self.on_directions(y)

    def angular_mean(self) -> float:
        """Average of Omega against the normalised surface measure."""
        vals, wts = sphere_quadrature(self)
        return float(np.sum(vals * wts) / np.sum(wts))

    def describe(self) -> dict:
        d = {"n": self.n, "kind": self.kind}
        if self.kind == "constant":
            d["value"] = self.value
        if self.expr is not None:
            d["expr"] = self.expr
        if self.kind == "table":
            d["samples"] = list(self.table.shape)
        if self.scale != 1.0:
            d["scale"] = self.scale
        if self.absolute:
            d["absolute"] = True
        return d


def eval_homogeneous(kernel: RoughKernel, y) -> float:
    """Omega(y/|y|) for a single nonzero point ``y``."""
    return float(kernel.on_directions(np.asarray(y, dtype=float)[None, :])[0])


def _circle_samples(kernel, samples):
    if samples is not None:
        if samples < 256:
            raise ValueError("use at least 256 angular samples")
        return int(samples)
    if kernel.kind == "table":
        mt = kernel.table.shape[0]
        k = 1
        while mt * k < DEFAULT_CIRCLE_SAMPLES:
            k += 2
        return mt * k  # odd multiple: no node falls on a table-cell boundary
    return DEFAULT_CIRCLE_SAMPLES


def sphere_quadrature(kernel: RoughKernel, samples=None):
    """Kernel values and trapezoid weights on S^{n-1} (weights sum to |S^{n-1}|)."""
    if kernel.n == 2:
        M = _circle_samples(kernel, samples)
        theta = 2 * np.pi * np.arange(M) / M
        return kernel.on_angles(theta), np.full(M, 2 * np.pi / M)
    nt, np_ = DEFAULT_SPHERE_SAMPLES if samples is None else samples
    theta = np.pi * np.arange(nt + 1) / nt
    phi = 2 * np.pi * np.arange(np_) / np_
    wt = np.full(nt + 1, np.pi / nt)
    wt[0] = wt[-1] = 0.5 * np.pi / nt
    wt = wt * np.sin(theta)
    T, P = np.meshgrid(theta, phi, indexing="ij")
    W = wt[:, None] * np.full(np_, 2 * np.pi / np_)[None, :]
    return kernel.on_angles(T, P), W


def sphere_norm(kernel: RoughKernel, s: float, samples=None) -> float:
    """||Omega||_{L^s(S^{n-1})} with the unnormalised surface measure.

    ``s = inf`` gives the maximum of |Omega| over the same sample set.
    """
    if not s > 1:
        raise ValueError("sphere_norm needs s in (1, inf]")
    vals, wts = sphere_quadrature(kernel, samples)
    if not np.all(np.isfinite(vals)):
        raise NonIntegrable("kernel takes non-finite values on the quadrature nodes")
    a = np.abs(vals)
    if math.isinf(s):
        return float(a.max())
    peak = a.max()
    if peak == 0:
        return 0.0
    # factor out the peak so large s does not overflow
    return float(peak * np.sum((a / peak) ** s * wts) ** (1.0 / s))
