"""Divisible sandpile: stationary L1 solve and a direct toppling oracle."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ..grid import Field, Grid, SupportSet
from ..schemes import SolverConfig, SolverError, dr_solve_stationary
from .shapes import make_rect_mask

__all__ = [
    "SandpileProblem",
    "SandpileResult",
    "ToppleResult",
    "two_squares",
    "sandpile_solve",
    "sandpile_topple",
    "jaccard",
]


@dataclass(frozen=True, eq=False)
class SandpileProblem:
    """Forcing ``f = sum_j alpha_j * indicator(S_j)`` on a 2D grid."""

    grid: Grid
    regions: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.grid.dim != 2:
            raise ValueError("sandpile problems live on 2D grids")
        regs = []
        for mask, alpha in self.regions:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != self.grid.shape:
                raise ValueError("region mask does not match the grid")
            if alpha < 0:
                raise ValueError("region coefficients must be nonnegative")
            regs.append((mask, float(alpha)))
        object.__setattr__(self, "regions", tuple(regs))

    def forcing(self) -> Field:
        f = np.zeros(self.grid.shape)
        for mask, alpha in self.regions:
            f += alpha * mask
        return Field(self.grid, f)

    @property
    def mass(self) -> float:
        """``sum_j alpha_j |S_j|`` with areas measured on the grid."""
        vol = self.grid.cell_volume
        return float(sum(a * np.count_nonzero(m) * vol for m, a in self.regions))


def two_squares(n: int = 500, side: float = 0.3, lo1=(0.3, 0.3), lo2=(0.4, 0.4),
                alphas=(1.0, 1.0)) -> SandpileProblem:
    """Two overlapping squares on ``[0, 1)^2``."""
    grid = Grid(2, n, 0.0, 1.0)
    regs = []
    for lo, a in zip((lo1, lo2), alphas):
        regs.append((make_rect_mask(grid, lo, (lo[0] + side, lo[1] + side)), a))
    return SandpileProblem(grid, tuple(regs))


def jaccard(a: np.ndarray, b: np.ndarray) -> float:
    union = np.count_nonzero(a | b)
    return 1.0 if union == 0 else np.count_nonzero(a & b) / union


@dataclass
class SandpileResult:
    u: Field
    support: SupportSet
    occupied: SupportSet
    iterations: int
    seconds: float


def sandpile_solve(p: SandpileProblem, tau_factor: float = 0.025, tol: float = 1e-10,
                   max_iters: int = 200_000) -> SandpileResult:
    """Stationary ``Lap u + f in d|u|`` by Douglas-Rachford with ``tau = tau_factor*h``.

    ``occupied`` is ``{u > 0}`` together with the cells where ``f >= 1``; cells
    that are exactly full hold no excess, so the odometer may vanish there.
    """
    f = p.forcing()
    cfg = SolverConfig(tau=tau_factor * p.grid.h, gamma=1.0, scheme="DR",
                       stationary_tol=tol, max_iters=max_iters)
    t0 = time.perf_counter()
    u, iters = dr_solve_stationary(f, cfg)
    secs = time.perf_counter() - t0
    vol = p.grid.cell_volume
    supp = u.values != 0
    occ = supp | (f.values >= 1.0)
    return SandpileResult(
        u, SupportSet(supp, np.count_nonzero(supp) * vol),
        SupportSet(occ, np.count_nonzero(occ) * vol), iters, secs,
    )


@njit(cache=True)
def _topple(m, odo, eps, max_sweeps, i0, i1, j0, j1):
    # sequential in-place sweeps over a box that grows with the active region;
    # the outermost ring of cells never topples, so mass cannot leave the grid
    n0, n1 = m.shape
    mx = 0.0
    for s in range(1, max_sweeps + 1):
        mx = 0.0
        a0, a1, b0, b1 = n0, -1, n1, -1
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                e = m[i, j] - 1.0
                if e > 0.0:
                    if e > mx:
                        mx = e
                    m[i, j] = 1.0
                    q = 0.25 * e
                    m[i - 1, j] += q
                    m[i + 1, j] += q
                    m[i, j - 1] += q
                    m[i, j + 1] += q
                    odo[i, j] += e
                    a0 = min(a0, i)
                    a1 = max(a1, i)
                    b0 = min(b0, j)
                    b1 = max(b1, j)
        if mx <= eps:
            return s, mx
        i0, i1 = max(1, a0 - 1), min(n0 - 2, a1 + 1)
        j0, j1 = max(1, b0 - 1), min(n1 - 2, b1 + 1)
    return -1, mx


@dataclass
class ToppleResult:
    mass: np.ndarray
    odometer: np.ndarray
    occupied: SupportSet
    sweeps: int
    residual: float
    seconds: float


def sandpile_topple(p: SandpileProblem, eps_stop: float | None = None, occ_delta: float = 1e-6,
                    max_sweeps: int = 2_000_000) -> ToppleResult:
    """Direct divisible-sandpile simulation in units of cell capacity.

    Every cell holding more than 1 keeps 1 and sends a quarter of the excess
    to each neighbour, sweeping until the largest excess is at most
    ``eps_stop`` (default ``1e-10`` times the total mass). Occupied cells are
    those holding at least ``1 - occ_delta``. ``odometer * h^2 / 4`` is the
    discrete counterpart of the stationary solution.
    """
    f = p.forcing().values
    m = np.array(f, dtype=float)
    total = m.sum()
    if eps_stop is None:
        eps_stop = 1e-10 * max(total, 1.0)
    if eps_stop <= 0:
        raise ValueError("eps_stop must be positive")
    odo = np.zeros_like(m)
    n0, n1 = m.shape
    t0 = time.perf_counter()
    sweeps, res = _topple(m, odo, eps_stop, max_sweeps, 1, n0 - 2, 1, n1 - 2)
    secs = time.perf_counter() - t0
    if sweeps < 0:
        raise SolverError(f"toppling not settled after {max_sweeps} sweeps (excess {res:.3e})",
                          last=m, residual=res, iterations=max_sweeps)
    drift = abs(m.sum() - total)
    if drift > 1e-12 * max(total, 1.0):
        raise SolverError(f"toppling lost mass: drift {drift:.3e}", last=m, residual=drift)
    occ = m >= 1.0 - occ_delta
    vol = p.grid.cell_volume
    return ToppleResult(m, odo, SupportSet(occ, np.count_nonzero(occ) * vol), sweeps, res, secs)
