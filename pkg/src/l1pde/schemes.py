"""Time steppers and the stationary Douglas-Rachford solver.

All steppers end with a shrink, so their output has exact zeros and the
support of an iterate is well defined without any threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Field, Grid
from .operators import (
    Graph,
    Resolvent,
    _laplacian,
    _shrink,
    graph_laplacian_apply,
)

__all__ = [
    "ConfigError",
    "SolverError",
    "SolverConfig",
    "DrState",
    "check_cfl",
    "imex_step",
    "dr_init",
    "dr_step",
    "dr_solve_stationary",
    "leapfrog_sg_step",
    "sg_first_step",
    "check_wave_cfl",
    "graph_imex_step",
]


class ConfigError(ValueError):
    """Invalid solver or scenario configuration (raised before stepping)."""


class SolverError(RuntimeError):
    """A solve ran out of iterations; carries the last iterate and residual."""

    def __init__(self, message, last=None, residual=None, iterations=None):
        super().__init__(message)
        self.last = last
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class SolverConfig:
    tau: float
    gamma: float
    t_end: float = 1.0
    scheme: str = "IMEX"
    stationary_tol: float = 1e-10
    max_iters: int = 200_000

    def __post_init__(self):
        scheme = self.scheme.upper()
        object.__setattr__(self, "scheme", scheme)
        if scheme not in ("IMEX", "DR"):
            raise ConfigError(f"unknown scheme {self.scheme!r} (use IMEX or DR)")
        if not self.tau > 0:
            raise ConfigError("time step tau must be positive")
        if self.gamma < 0:
            raise ConfigError("gamma must be nonnegative")
        if not self.t_end > 0:
            raise ConfigError("t_end must be positive")
        if not self.stationary_tol > 0:
            raise ConfigError("stationary_tol must be positive")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be positive")

    @property
    def n_steps(self) -> int:
        return max(1, math.ceil(self.t_end / self.tau - 1e-9))


def check_cfl(cfg: SolverConfig, grid: Grid) -> None:
    """IMEX needs ``tau <= h^2/4`` in every dimension."""
    if cfg.scheme == "IMEX":
        bound = grid.h**2 / 4
        if cfg.tau > bound * (1 + 1e-12):
            raise ConfigError(
                f"IMEX time step tau={cfg.tau:.6g} exceeds the CFL bound "
                f"h^2/4={bound:.6g} (h={grid.h:.6g})"
            )


def _check_same_grid(*fields: Field) -> None:
    g = fields[0].grid
    for other in fields[1:]:
        if other.grid != g:
            raise ConfigError("fields live on different grids")


def imex_step(u: Field, f: Field, cfg: SolverConfig) -> Field:
    """``shrink(u + tau*Lap u + tau*f, tau*gamma)``."""
    _check_same_grid(u, f)
    check_cfl(cfg, u.grid)
    v = u.values
    w = v + cfg.tau * (_laplacian(v, u.grid.h) + f.values)
    return u.with_values(_shrink(w, cfg.tau * cfg.gamma))


@dataclass(frozen=True)
class DrState:
    u: Field
    u_tilde: Field


def dr_init(u0: Field, cfg: SolverConfig) -> DrState:
    """State whose shrink reproduces ``u0``: ``u_tilde = u0 + tau*gamma*sign(u0)``."""
    ut = u0.values + cfg.tau * cfg.gamma * np.sign(u0.values)
    return DrState(u0, u0.with_values(ut))


def dr_step(
    state: DrState, f: Field, cfg: SolverConfig, resolvent: Resolvent | None = None
) -> DrState:
    """One Douglas-Rachford sweep.

    ``u_new = shrink(u_tilde, tau*gamma)`` followed by
    ``u_tilde_new = u_tilde + R(2 u_new - u_tilde + tau f) - u_new`` with
    ``R = (I - tau Lap_h)^{-1}``.
    """
    _check_same_grid(state.u_tilde, f)
    if resolvent is None:
        resolvent = Resolvent(f.grid, cfg.tau)
    ut = state.u_tilde.values
    un = _shrink(ut, cfg.tau * cfg.gamma)
    utn = ut + resolvent.apply(2.0 * un - ut + cfg.tau * f.values) - un
    return DrState(f.with_values(un), f.with_values(utn))


def dr_solve_stationary(
    f: Field, cfg: SolverConfig, u0: Field | None = None
) -> tuple[Field, int]:
    """Iterate :func:`dr_step` to a fixed point of ``Lap u + f in gamma d|u|``.

    Stops once successive iterates of both ``u`` and ``u_tilde`` move by at
    most ``stationary_tol`` in the max norm. Raises :class:`SolverError` after
    ``max_iters`` sweeps.
    """
    if u0 is None:
        u0 = f.grid.zeros()
    _check_same_grid(f, u0)
    R = Resolvent(f.grid, cfg.tau)
    thr = cfg.tau * cfg.gamma
    tf = cfg.tau * f.values
    u = u0.values
    ut = u + thr * np.sign(u)
    res = math.inf
    for it in range(1, cfg.max_iters + 1):
        un = _shrink(ut, thr)
        utn = ut + R.apply(2.0 * un - ut + tf) - un
        res = max(np.abs(un - u).max(), np.abs(utn - ut).max())
        u, ut = un, utn
        if res <= cfg.stationary_tol:
            return f.with_values(u), it
    raise SolverError(
        f"Douglas-Rachford did not reach tol={cfg.stationary_tol:g} in "
        f"{cfg.max_iters} iterations (residual {res:.3e})",
        last=f.with_values(u),
        residual=res,
        iterations=cfg.max_iters,
    )


def check_wave_cfl(tau: float, grid: Grid) -> None:
    bound = grid.h / math.sqrt(grid.dim)
    if not 0 < tau <= bound * (1 + 1e-12):
        raise ConfigError(
            f"leapfrog time step tau={tau:.6g} violates the wave CFL bound "
            f"h/sqrt(d)={bound:.6g}"
        )


def leapfrog_sg_step(u_now: Field, u_prev: Field, tau: float) -> Field:
    """``shrink(2 u_now - u_prev + tau^2 Lap u_now, tau^2)``."""
    _check_same_grid(u_now, u_prev)
    check_wave_cfl(tau, u_now.grid)
    v = u_now.values
    w = 2.0 * v - u_prev.values + tau * tau * _laplacian(v, u_now.grid.h)
    return u_now.with_values(_shrink(w, tau * tau))


def sg_first_step(g1: Field, g2: Field, tau: float) -> Field:
    """Taylor start ``shrink(g1 + tau g2 + tau^2/2 Lap g1, tau^2/2)``."""
    _check_same_grid(g1, g2)
    check_wave_cfl(tau, g1.grid)
    v = g1.values
    w = v + tau * g2.values + 0.5 * tau * tau * _laplacian(v, g1.grid.h)
    return g1.with_values(_shrink(w, 0.5 * tau * tau))


def graph_imex_step(u, g: Graph, tau: float, gamma: float) -> np.ndarray:
    """``shrink(u - tau L u, tau*gamma)`` on node values."""
    if not 0 < tau <= 1:
        raise ConfigError("graph time step must satisfy 0 < tau <= 1")
    if gamma < 0:
        raise ConfigError("gamma must be nonnegative")
    u = np.asarray(u, dtype=float)
    return _shrink(u - tau * graph_laplacian_apply(g, u), tau * gamma)
