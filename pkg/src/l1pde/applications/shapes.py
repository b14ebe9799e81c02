"""Deterministic 2D region masks used as initial data and sandpile forcing."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..grid import Grid

__all__ = [
    "make_star_mask",
    "make_flower_mask",
    "make_fractal_mask",
    "make_rect_mask",
    "koch_snowflake",
    "smoothed_indicator",
]


def _require_2d(grid: Grid):
    if grid.dim != 2:
        raise ValueError("masks need a 2D grid")


def make_star_mask(grid: Grid, r0: float = 0.3, eps: float = 0.3, k: int = 5,
                   center=(0.0, 0.0)) -> np.ndarray:
    """Points with ``r <= r0 * (1 + eps*cos(k*theta))`` about ``center``."""
    _require_2d(grid)
    if r0 <= 0 or not 0 <= eps < 1 or k < 0:
        raise ValueError("need r0 > 0, 0 <= eps < 1 and k >= 0")
    X, Y = grid.coords()
    dx, dy = X - center[0], Y - center[1]
    return np.hypot(dx, dy) <= r0 * (1.0 + eps * np.cos(k * np.arctan2(dy, dx)))


def make_flower_mask(grid: Grid, r0: float = 0.25, eps: float = 0.6, k: int = 6,
                     center=(0.0, 0.0)) -> np.ndarray:
    """Star with deep petals."""
    return make_star_mask(grid, r0, eps, k, center)


def make_rect_mask(grid: Grid, lo, hi) -> np.ndarray:
    """Half-open box ``lo <= (x, y) < hi``."""
    _require_2d(grid)
    X, Y = grid.coords()
    return (X >= lo[0]) & (X < hi[0]) & (Y >= lo[1]) & (Y < hi[1])


def koch_snowflake(radius: float, depth: int, center=(0.0, 0.0)) -> np.ndarray:
    """Vertices of a Koch snowflake inscribed in a circle of ``radius``."""
    if radius <= 0 or depth < 0:
        raise ValueError("need radius > 0 and depth >= 0")
    ang = np.pi / 2 - 2 * np.pi * np.arange(3) / 3
    pts = radius * np.column_stack([np.cos(ang), np.sin(ang)])
    rot = np.array([[0.5, -np.sqrt(3) / 2], [np.sqrt(3) / 2, 0.5]])
    for _ in range(depth):
        a = pts
        b = np.roll(pts, -1, axis=0)
        d = (b - a) / 3
        p1, p3 = a + d, a + 2 * d
        # vertices run clockwise, so outward is a +60 degree turn of the edge
        p2 = p1 + d @ rot.T
        pts = np.stack([a, p1, p2, p3], axis=1).reshape(-1, 2)
    return pts + np.asarray(center, dtype=float)


def _inside_polygon(px: np.ndarray, py: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd ray casting, vectorized over points."""
    inside = np.zeros(px.shape, dtype=bool)
    xa, ya = poly[:, 0], poly[:, 1]
    xb, yb = np.roll(xa, -1), np.roll(ya, -1)
    for x0, y0, x1, y1 in zip(xa, ya, xb, yb):
        crosses = (y0 > py) != (y1 > py)
        if not crosses.any():
            continue
        xi = x0 + (py - y0) * (x1 - x0) / (y1 - y0 if y1 != y0 else np.inf)
        inside ^= crosses & (px < xi)
    return inside


def make_fractal_mask(grid: Grid, radius: float = 0.3, depth: int = 3,
                      center=(0.0, 0.0)) -> np.ndarray:
    """Filled Koch snowflake of the given depth."""
    _require_2d(grid)
    poly = koch_snowflake(radius, depth, center)
    X, Y = grid.coords()
    # only test points inside the bounding box of the polygon
    lo, hi = poly.min(axis=0), poly.max(axis=0)
    box = (X >= lo[0]) & (X <= hi[0]) & (Y >= lo[1]) & (Y <= hi[1])
    mask = np.zeros(grid.shape, dtype=bool)
    mask[box] = _inside_polygon(X[box], Y[box], poly)
    return mask


def smoothed_indicator(mask: np.ndarray, width_cells: float = 5.0,
                       amplitude: float = 1.0) -> np.ndarray:
    """Periodic Gaussian blur of a mask (standard deviation in cells)."""
    m = np.asarray(mask, dtype=float)
    if width_cells <= 0:
        return amplitude * m
    return amplitude * ndimage.gaussian_filter(m, width_cells, mode="wrap", truncate=3.0)
