"""Refinement studies shared by the command line, scripts and tests."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytic import TravelingWaveParams, exact_elliptic, traveling_wave
from .applications.heat import run_heat_1d, traveling_wave_field
from .diagnostics import convergence_rate, fit_sqrt_boundary
from .grid import Grid
from .schemes import SolverConfig, dr_solve_stationary

__all__ = [
    "TravelingWaveStudy",
    "traveling_wave_errors",
    "traveling_wave_convergence",
    "EllipticStudy",
    "elliptic_convergence",
    "FreeBoundaryStudy",
    "free_boundary_fit",
    "free_boundary_ladder",
    "pmap",
]


def pmap(func, items, threads: int = 1):
    """``map`` that fans out over processes when ``threads > 1``; order kept."""
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(func, items))


@dataclass(frozen=True)
class TravelingWaveStudy:
    gamma: float = 0.05
    sigma: float = 2.0
    x0: float = 2.0
    x_min: float = 0.0
    x_max: float = 16.0
    t_end: float = 1.0
    tau_factor: float = 0.25
    pin_boundary: bool = True
    ladder: tuple = (250, 500, 1000, 2000)


def traveling_wave_errors(args) -> tuple[float, dict]:
    """``(h, {q: max_n ||u_n - exact(t_n)||_q})`` for one resolution.

    With ``pin_boundary`` the two end cells are reset to the exact wave after
    every step, which stands in for the unbounded line the closed form lives on.
    """
    st, n = args
    grid = Grid(1, n, st.x_min, st.x_max)
    p = TravelingWaveParams(st.gamma, st.sigma)

    def exact(x, t):
        return traveling_wave(x - st.x0, t, p)

    x_lo, x_hi = grid.axis()[[0, -1]]
    pin = (lambda t: (exact(x_lo, t), exact(x_hi, t))) if st.pin_boundary else None
    cfg = SolverConfig(tau=st.tau_factor * grid.h**2, gamma=st.gamma, t_end=st.t_end)
    run = run_heat_1d(grid.zeros(), traveling_wave_field(grid, p, st.x0), cfg,
                      record_every=0, oracle=exact, pin=pin)
    return grid.h, run.max_errors


def traveling_wave_convergence(st: TravelingWaveStudy = TravelingWaveStudy(), threads: int = 1) -> dict:
    rows = pmap(traveling_wave_errors, [(st, n) for n in st.ladder], threads)
    hs = [h for h, _ in rows]
    out = {"n": list(st.ladder), "h": hs}
    for q in ("L1", "L2", "Linf"):
        errs = [e[q] for _, e in rows]
        out[f"E_{q}"] = errs
        out[f"slope_{q}"] = convergence_rate(hs, errs)["slope"]
    return out


@dataclass(frozen=True)
class EllipticStudy:
    gamma: float = 0.5
    x_min: float = -8.0
    x_max: float = 8.0
    tau_factor: float = 1.0
    tol: float = 1e-10
    ladder: tuple = (512, 1024, 2048, 4096)


def _elliptic_one(args):
    st, n = args
    grid = Grid(1, n, st.x_min, st.x_max)
    f = grid.sample(lambda x: (1.0 + x * x) ** -1.5)
    cfg = SolverConfig(tau=st.tau_factor * grid.h, gamma=st.gamma, scheme="DR",
                       stationary_tol=st.tol)
    u, iters = dr_solve_stationary(f, cfg)
    x = grid.axis()
    err = float(np.abs(u.values - exact_elliptic(x, st.gamma)).max())
    nz = np.flatnonzero(u.values)
    ends = (float(x[nz[0]]), float(x[nz[-1]])) if nz.size else (np.nan, np.nan)
    return grid.h, err, ends, iters


def elliptic_convergence(st: EllipticStudy = EllipticStudy(), threads: int = 1) -> dict:
    """Max-norm error of the stationary solve against the closed form."""
    rows = pmap(_elliptic_one, [(st, n) for n in st.ladder], threads)
    hs = [r[0] for r in rows]
    errs = [r[1] for r in rows]
    return {
        "n": list(st.ladder), "h": hs, "E_Linf": errs,
        "slope_Linf": convergence_rate(hs, errs)["slope"],
        "support_ends": [list(r[2]) for r in rows],
        "iterations": [r[3] for r in rows],
    }


@dataclass(frozen=True)
class FreeBoundaryStudy:
    """Forced heat ``f = amplitude*exp(-rate*x^2)`` from rest."""

    amplitude: float = 2.0
    rate: float = 5.0
    gamma: float = 1.0
    x_min: float = -8.0
    x_max: float = 8.0
    t_end: float = 0.02
    tau_factor: float = 0.25
    samples: int = 200
    window: tuple = (0.1, 0.9)
    ladder: tuple = (256, 512, 1024, 2048, 4096, 8192, 16384)
    free_exponent_n: tuple = (4096,)


@dataclass
class FreeBoundaryFit:
    n: int
    a0: float
    a1: float
    beta: float | None = None
    times: np.ndarray = field(default_factory=lambda: np.empty(0))
    edges: np.ndarray = field(default_factory=lambda: np.empty(0))


def free_boundary_fit(args) -> FreeBoundaryFit:
    """Right support edge sampled at equally spaced times, fitted over the window."""
    st, n = args
    grid = Grid(1, n, st.x_min, st.x_max)
    f = grid.sample(lambda x: st.amplitude * np.exp(-st.rate * x * x))
    cfg = SolverConfig(tau=st.tau_factor * grid.h**2, gamma=st.gamma, t_end=st.t_end)
    run = run_heat_1d(f, grid.zeros(), cfg, record_every=0, boundary_samples=st.samples)
    t, a = run.boundary
    lo, hi = st.window[0] * st.t_end, st.window[1] * st.t_end
    m = (t >= lo * (1 - 1e-9)) & (t <= hi * (1 + 1e-9)) & np.isfinite(a)
    fit = fit_sqrt_boundary(t[m], a[m])
    beta = None
    if n in st.free_exponent_n:
        beta = fit_sqrt_boundary(t[m], a[m], free_exponent=True)["beta"]
    return FreeBoundaryFit(n, fit["a0"], fit["a1"], beta, t, a)


def free_boundary_ladder(st: FreeBoundaryStudy = FreeBoundaryStudy(), threads: int = 1) -> list[FreeBoundaryFit]:
    return pmap(free_boundary_fit, [(st, n) for n in st.ladder], threads)
