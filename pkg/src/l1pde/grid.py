"""Uniform periodic grids, fields on them, and the basic functionals.

All grids are periodic with ``x_i = x_min + i*h`` and ``h = (x_max - x_min)/n``.
Two-dimensional fields are stored row-major: index ``(i, j)`` maps to
``i*n + j`` in the flattened array, with ``i`` running along the first axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "SupportSet",
    "norm",
    "total_variation",
    "support",
    "write_field_csv",
    "read_field_csv",
]


@dataclass(frozen=True)
class Grid:
    dim: int
    n: int
    x_min: float
    x_max: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"grid dimension must be 1 or 2, got {self.dim}")
        if self.n < 4:
            raise ValueError(f"need at least 4 points per axis, got {self.n}")
        if not self.x_max > self.x_min:
            raise ValueError("empty extent: x_max must exceed x_min")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def volume(self) -> float:
        return (self.x_max - self.x_min) ** self.dim

    def axis(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.n)

    def coords(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays with the grid's shape (``indexing='ij'``)."""
        x = self.axis()
        if self.dim == 1:
            return (x,)
        return tuple(np.meshgrid(x, x, indexing="ij"))

    def sample(self, func) -> "Field":
        """Evaluate ``func`` at the grid points and wrap the result."""
        return Field(self, np.asarray(func(*self.coords()), dtype=float))

    def zeros(self) -> "Field":
        return Field(self, np.zeros(self.shape))


@dataclass(frozen=True, eq=False)
class Field:
    """Grid values. The array is made read-only on construction."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size != self.grid.size:
            raise ValueError(
                f"field has {v.size} values, grid has {self.grid.size} points"
            )
        if v.flags.writeable:
            v = v.copy()
            v.flags.writeable = False
        v = v.reshape(self.grid.shape)
        if not np.isfinite(v).all():
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True, eq=False)
class SupportSet:
    mask: np.ndarray
    measure: float

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.mask))


def norm(u: Field, q=2) -> float:
    """Discrete Lq norm scaled by the cell volume (max norm for ``q=inf``)."""
    a = np.abs(u.values)
    if q in (np.inf, "inf"):
        return float(a.max()) if a.size else 0.0
    if q == 1:
        return float(a.sum() * u.grid.cell_volume)
    if q == 2:
        return float(np.sqrt(np.sum(a * a) * u.grid.cell_volume))
    raise ValueError(f"unsupported norm order {q!r}")


def total_variation(u: Field) -> float:
    """Sum of absolute forward differences along every axis, periodic wrap."""
    v = u.values
    return float(sum(np.abs(np.roll(v, -1, axis=ax) - v).sum() for ax in range(v.ndim)))


def support(u: Field) -> SupportSet:
    mask = u.values != 0.0
    return SupportSet(mask, float(np.count_nonzero(mask) * u.grid.cell_volume))


def _header(grid: Grid) -> str:
    return f"# grid: d={grid.dim} n={grid.n} xmin={grid.x_min!r} xmax={grid.x_max!r}"


def write_field_csv(u: Field, path) -> None:
    grid = u.grid
    lines = [_header(grid)]
    if grid.dim == 1:
        lines.extend(f"{x:.17g}" for x in u.values)
    else:
        lines.extend(",".join(f"{x:.17g}" for x in row) for row in u.values)
    Path(path).write_text("\n".join(lines) + "\n")


def read_field_csv(path) -> Field:
    text = Path(path).read_text().splitlines()
    head = text[0]
    if not head.startswith("# grid:"):
        raise ValueError(f"{path}: missing grid header")
    kv = dict(item.split("=", 1) for item in head[len("# grid:"):].split())
    grid = Grid(int(kv["d"]), int(kv["n"]), float(kv["xmin"]), float(kv["xmax"]))
    rows = [line for line in text[1:] if line.strip()]
    values = np.array([[float(x) for x in r.split(",")] for r in rows])
    return Field(grid, values.reshape(grid.shape))
