"""Forced heat flow with an L1 damping term, in one and two dimensions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..analytic import TravelingWaveParams, traveling_wave
from ..diagnostics import DiagnosticsTrace, boundary_location, field_stats
from ..grid import Field, Grid
from ..operators import Resolvent
from ..schemes import ConfigError, SolverConfig, check_cfl
from .shapes import make_star_mask, smoothed_indicator

__all__ = [
    "HeatRun",
    "evolve_heat",
    "run_heat_1d",
    "run_heat_2d_star",
    "star_initial_data",
    "traveling_wave_field",
]


@dataclass
class HeatRun:
    """Result of a heat run.

    ``snapshots`` maps each requested sample time to the field at the first
    step reaching it. ``boundary`` holds ``(t, a_right)`` samples when tracking
    was requested; ``max_errors`` holds ``max_n ||u_n - oracle(t_n)||_q``.
    """

    grid: Grid
    tau: float
    steps: int
    final: Field
    snapshots: dict = field(default_factory=dict)
    trace: DiagnosticsTrace = field(default_factory=DiagnosticsTrace)
    boundary: tuple = (np.empty(0), np.empty(0))
    max_errors: dict | None = None
    extinction_time: float | None = None
    space_time_support: float = 0.0

    def at(self, t: float) -> Field:
        """Snapshot whose time is closest to ``t``."""
        if not self.snapshots:
            raise KeyError("no snapshots recorded")
        key = min(self.snapshots, key=lambda s: abs(s - t))
        return self.snapshots[key]


def _lap_into(out: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Unscaled periodic second differences of ``v`` written into ``out``."""
    out[...] = -2.0 * v.ndim * v
    for ax in range(v.ndim):
        out += np.roll(v, 1, axis=ax)
        out += np.roll(v, -1, axis=ax)
    return out


def _lap_into_1d(out: np.ndarray, v: np.ndarray) -> np.ndarray:
    out[1:-1] = v[:-2]
    out[1:-1] += v[2:]
    out[0] = v[-1] + v[1]
    out[-1] = v[-2] + v[0]
    out -= 2.0 * v
    return out


def _shrink_into(out: np.ndarray, v: np.ndarray, sigma: float, mag: np.ndarray) -> None:
    np.abs(v, out=mag)
    mag -= sigma
    np.maximum(mag, 0.0, out=mag)
    np.copysign(mag, v, out=out)


def evolve_heat(
    f: Field,
    g: Field,
    cfg: SolverConfig,
    *,
    sample_times=(),
    record_every: int = 1,
    boundary_samples: int = 0,
    oracle: Callable | None = None,
    pin: Callable | None = None,
    stop_on_extinction: bool = False,
) -> HeatRun:
    """Step ``u_t = Lap u + f - gamma p(u)`` from ``g`` to ``cfg.t_end``.

    Parameters
    ----------
    sample_times : iterable of float
        Times at which to keep snapshots (``0`` gives the initial data).
    record_every : int
        Trace stride in steps; ``0`` disables the trace.
    boundary_samples : int
        Number of equally spaced times at which to record the right support
        edge (1D only). The step count is rounded up to a multiple of it.
    oracle : callable ``(x, t) -> u``, optional
        Exact solution; max-over-steps errors are accumulated every step.
    pin : callable ``t -> (left, right)``, optional
        Overwrites the first and last cells after each step (1D only).
    stop_on_extinction : bool
        Stop at the first step with ``u == 0``. Only sensible when that state
        is a fixed point (IMEX with ``f == 0``).

    Notes
    -----
    The step is shortened to ``t_end / n_steps`` so that the run ends exactly
    at ``t_end``.
    """
    if f.grid != g.grid:
        raise ConfigError("forcing and initial data live on different grids")
    grid = g.grid
    if (pin is not None or boundary_samples) and grid.dim != 1:
        raise ConfigError("pinning and boundary tracking are 1D only")
    check_cfl(cfg, grid)
    n_steps = cfg.n_steps
    if boundary_samples:
        n_steps = math.ceil(n_steps / boundary_samples) * boundary_samples
    tau = cfg.t_end / n_steps
    h = grid.h
    thr = tau * cfg.gamma
    tf = tau * f.values
    r = tau / (h * h)
    lap_into = _lap_into_1d if grid.dim == 1 else _lap_into
    vol = grid.cell_volume
    fv = f.values

    u = np.array(g.values, dtype=float)
    buf = np.empty_like(u)
    mag = np.empty_like(u)
    dr = cfg.scheme == "DR"
    if dr:
        R = Resolvent(grid, tau)
        ut = u + thr * np.sign(u)

    pending = sorted(float(s) for s in sample_times)
    snaps: dict = {}
    trace = DiagnosticsTrace()

    def take(t):
        while pending and t >= pending[0] - 0.5 * tau:
            snaps[pending.pop(0)] = Field(grid, u)

    def record(t):
        fu = Field(grid, u)
        row = field_stats(fu)
        row["work"] = float(np.sum(fv * u) * vol)
        trace.record(t, **row)

    take(0.0)
    if record_every:
        record(0.0)
    errs = None
    if oracle is not None:
        errs = np.zeros(3)
        ex_coords = grid.coords()
    b_every = n_steps // boundary_samples if boundary_samples else 0
    b_t, b_a = [], []
    st_support = 0.0
    extinct = None

    for k in range(1, n_steps + 1):
        t = k * tau
        if dr:
            # u holds shrink(ut) from the previous step; the sweep is rotated
            # so that the reported state at t_k is shrink(ut_k) rather than a
            # copy of the state at t_{k-1}
            np.multiply(u, 2.0, out=buf)
            buf -= ut
            buf += tf
            ut += R.apply(buf)
            ut -= u
            _shrink_into(u, ut, thr, mag)
        else:
            lap_into(buf, u)
            buf *= r
            buf += u
            buf += tf
            _shrink_into(u, buf, thr, mag)
        if pin is not None:
            u[0], u[-1] = pin(t)
        nnz = np.count_nonzero(u)
        st_support += tau * nnz * vol
        if extinct is None and nnz == 0:
            extinct = t
        if errs is not None:
            d = np.abs(u - oracle(*ex_coords, t))
            errs = np.maximum(errs, [d.sum() * vol, math.sqrt((d * d).sum() * vol), d.max()])
        if b_every and k % b_every == 0:
            b_t.append(t)
            b_a.append(boundary_location(Field(grid, u), "extrapolate"))
        if record_every and k % record_every == 0:
            record(t)
        take(t)
        if stop_on_extinction and nnz == 0:
            break

    max_errors = None
    if errs is not None:
        max_errors = {"L1": float(errs[0]), "L2": float(errs[1]), "Linf": float(errs[2])}
    return HeatRun(
        grid=grid,
        tau=tau,
        steps=k,
        final=Field(grid, u),
        snapshots=snaps,
        trace=trace,
        boundary=(np.asarray(b_t), np.asarray(b_a)),
        max_errors=max_errors,
        extinction_time=extinct,
        space_time_support=st_support,
    )


def traveling_wave_field(grid: Grid, p: TravelingWaveParams, x0: float, t: float = 0.0) -> Field:
    return grid.sample(lambda x: traveling_wave(x - x0, t, p))


def run_heat_1d(f: Field, g: Field, cfg: SolverConfig, **kw) -> HeatRun:
    """One-dimensional run; see :func:`evolve_heat` for the keyword options."""
    if g.grid.dim != 1:
        raise ConfigError("run_heat_1d needs a 1D grid")
    return evolve_heat(f, g, cfg, **kw)


def star_initial_data(grid: Grid, r0=0.3, eps=0.3, k=5, amplitude=1.0,
                      smoothing_cells=5.0) -> Field:
    mask = make_star_mask(grid, r0, eps, k)
    return Field(grid, smoothed_indicator(mask, smoothing_cells, amplitude))


def run_heat_2d_star(g: Field, cfg: SolverConfig, f: Field | None = None, **kw) -> HeatRun:
    """Two-dimensional decay from ``g``; the extinction time is in the result."""
    if g.grid.dim != 2:
        raise ConfigError("run_heat_2d_star needs a 2D grid")
    if f is None:
        f = g.grid.zeros()
    return evolve_heat(f, g, cfg, **kw)
