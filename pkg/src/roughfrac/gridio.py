"""Grid functions as row-major CSV with a three-line header (n, L, m)."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .geometry import Grid, GridFunction


def format_grid(f: GridFunction) -> str:
    g = f.grid
    lines = [f"n,{g.n}", f"L,{g.half_width!r}", f"m,{g.m}"]
    rows = f.values.reshape(-1, g.m)
    lines += [",".join(f"{v:.9g}" for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def write_grid_csv(path, f: GridFunction) -> None:
    Path(path).write_text(format_grid(f))


def read_grid_csv(path) -> GridFunction:
    with open(path) as fh:
        head = [fh.readline().strip().split(",") for _ in range(3)]
        keys = [h[0] for h in head]
        if keys != ["n", "L", "m"]:
            raise ValueError(f"{path}: expected header lines n, L, m; got {keys}")
        n, L, m = int(head[0][1]), float(head[1][1]), int(head[2][1])
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    grid = Grid(n, L, m)
    if data.size != grid.size:
        raise ValueError(f"{path}: {data.size} values for a grid of {grid.size} cells")
    return GridFunction(grid, data.reshape(grid.shape))
