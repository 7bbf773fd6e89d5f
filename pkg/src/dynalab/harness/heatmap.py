"""Heatmap export of max_a Q over a tabular grid."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from dynalab.errors import UnsupportedOperation


def value_grid(qf, env) -> np.ndarray:
    """max_a Q per cell as a (height, width) array, row-major like enumerate_states."""
    if not getattr(env, "tabular", False):
        raise UnsupportedOperation(f"{type(env).__name__} has no grid to plot")
    values = np.array([qf.max_value(s) for s in env.enumerate_states()], dtype=float)
    return values.reshape(env.height, env.width)


def to_gray(grid: np.ndarray) -> np.ndarray:
    """Min-max scale to integer levels 0..255; a flat grid maps to 0."""
    lo, hi = float(np.min(grid)), float(np.max(grid))
    if hi == lo:
        return np.zeros(grid.shape, dtype=int)
    return np.rint((grid - lo) / (hi - lo) * 255.0).astype(int)


def pgm_path(path) -> Path:
    return Path(path).with_suffix(".pgm")


def emit_heatmap(qf, env, path) -> None:
    """Write the grid as CSV at ``path`` and as an ASCII PGM beside it."""
    grid = value_grid(qf, env)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for row in grid:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    gray = to_gray(grid)
    with pgm_path(path).open("w") as fh:
        fh.write(f"P2\n# min={float(grid.min())!r} max={float(grid.max())!r}\n")
        fh.write(f"{grid.shape[1]} {grid.shape[0]}\n255\n")
        for row in gray:
            fh.write(" ".join(str(v) for v in row) + "\n")


def read_csv_grid(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def read_pgm(path) -> np.ndarray:
    tokens = []
    for line in Path(path).read_text().splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if tokens[0] != "P2":
        raise ValueError(f"{path}: not an ASCII PGM")
    width, height, _maxval = (int(t) for t in tokens[1:4])
    return np.array([int(t) for t in tokens[4:]], dtype=int).reshape(height, width)
