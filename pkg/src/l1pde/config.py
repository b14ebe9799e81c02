"""INI run configurations parsed into dataclasses.

A config is one ``configparser`` file. Sections used by the runner:

``[run]``        seed, mode (evolve/stationary)
``[grid]``       dim, n, x_min, x_max
``[solver]``     scheme, gamma, t_end, tau or tau_factor, stationary_tol, max_iters
``[initial]``    kind plus shape parameters
``[forcing]``    kind plus shape parameters
``[output]``     times, record_every

Study-specific sections (``[study]``, ``[sandpile]``, ``[graph]``,
``[freeboundary]``, ``[signum_gordon]``) are read by their subcommands.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analytic import TravelingWaveParams, traveling_wave
from .applications.shapes import (
    make_flower_mask,
    make_fractal_mask,
    make_star_mask,
    smoothed_indicator,
)
from .grid import Field, Grid
from .schemes import ConfigError, SolverConfig

__all__ = [
    "RunConfig",
    "GridSpec",
    "FieldSpec",
    "OutputSpec",
    "load_config",
    "recipe_path",
    "list_recipes",
    "parse_config",
    "build_field",
    "solver_config",
]


def _floats(text: str) -> list[float]:
    return [float(s) for s in text.replace(",", " ").split()]


def _ints(text: str) -> list[int]:
    return [int(s) for s in text.replace(",", " ").split()]


@dataclass(frozen=True)
class GridSpec:
    dim: int = 1
    n: int = 512
    x_min: float = -8.0
    x_max: float = 8.0

    def build(self) -> Grid:
        try:
            return Grid(self.dim, self.n, self.x_min, self.x_max)
        except ValueError as e:
            raise ConfigError(str(e)) from None


@dataclass(frozen=True)
class FieldSpec:
    kind: str = "zero"
    params: dict = field(default_factory=dict)

    def get(self, key: str, default: float) -> float:
        return float(self.params.get(key, default))


@dataclass(frozen=True)
class OutputSpec:
    times: tuple = ()
    record_every: int = 1


@dataclass
class RunConfig:
    """Parsed config. ``sections`` keeps every raw key for echoing and studies."""

    sections: dict
    seed: int = 0
    mode: str = "evolve"
    grid: GridSpec = field(default_factory=GridSpec)
    initial: FieldSpec = field(default_factory=FieldSpec)
    forcing: FieldSpec = field(default_factory=FieldSpec)
    output: OutputSpec = field(default_factory=OutputSpec)

    def section(self, name: str) -> dict:
        return dict(self.sections.get(name, {}))

    def get(self, section: str, key: str, default=None, cast=str):
        raw = self.sections.get(section, {}).get(key)
        if raw is None:
            if default is None:
                raise ConfigError(f"missing [{section}] {key}")
            return default
        try:
            return cast(raw)
        except ValueError:
            raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from None

    def get_floats(self, section, key, default=None):
        return self.get(section, key, default, _floats)

    def get_ints(self, section, key, default=None):
        return self.get(section, key, default, _ints)

    def get_bool(self, section, key, default: bool) -> bool:
        raw = self.sections.get(section, {}).get(key)
        if raw is None:
            return default
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"bad boolean for [{section}] {key}: {raw!r}")


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"config syntax: {e}") from None
    sections = {s: dict(cp[s]) for s in cp.sections()}
    rc = RunConfig(sections)
    rc.seed = rc.get("run", "seed", 0, int)
    rc.mode = rc.get("run", "mode", "evolve").lower()
    if rc.mode not in ("evolve", "stationary"):
        raise ConfigError(f"unknown run mode {rc.mode!r}")
    if "grid" in sections:
        rc.grid = GridSpec(
            rc.get("grid", "dim", 1, int),
            rc.get("grid", "n", 512, int),
            rc.get("grid", "x_min", -8.0, float),
            rc.get("grid", "x_max", 8.0, float),
        )
    for name in ("initial", "forcing"):
        sec = dict(sections.get(name, {}))
        kind = sec.pop("kind", "zero").lower()
        setattr(rc, name, FieldSpec(kind, sec))
    rc.output = OutputSpec(
        tuple(rc.get_floats("output", "times", [])),
        rc.get("output", "record_every", 1, int),
    )
    return rc


def recipe_path(name: str) -> Path:
    """Path of a shipped recipe, e.g. ``recipe_path("fig6_star")``."""
    p = Path(__file__).with_name("recipes") / (name if name.endswith(".cfg") else name + ".cfg")
    if not p.exists():
        raise ConfigError(f"no shipped recipe named {name!r}")
    return p


def list_recipes() -> list[str]:
    return sorted(p.stem for p in Path(__file__).with_name("recipes").glob("*.cfg"))


def load_config(path) -> RunConfig:
    """Read a config file; ``recipe:<name>`` selects a shipped recipe."""
    if str(path).startswith("recipe:"):
        path = recipe_path(str(path)[len("recipe:"):])
    p = Path(path)
    try:
        text = p.read_text()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}") from None
    return parse_config(text)


def solver_config(rc: RunConfig, grid: Grid) -> SolverConfig:
    """``tau`` directly, or ``tau_factor`` times ``h^2`` (IMEX) or ``h`` (DR)."""
    scheme = rc.get("solver", "scheme", "IMEX").upper()
    gamma = rc.get("solver", "gamma", cast=float)
    if "tau" in rc.sections.get("solver", {}):
        tau = rc.get("solver", "tau", cast=float)
    else:
        fac = rc.get("solver", "tau_factor", 0.25 if scheme == "IMEX" else 0.1, float)
        tau = fac * (grid.h**2 if scheme == "IMEX" else grid.h)
    return SolverConfig(
        tau=tau,
        gamma=gamma,
        t_end=rc.get("solver", "t_end", 1.0, float),
        scheme=scheme,
        stationary_tol=rc.get("solver", "stationary_tol", 1e-10, float),
        max_iters=rc.get("solver", "max_iters", 200_000, int),
    )


def build_field(spec: FieldSpec, grid: Grid) -> Field:
    """Sample a named profile on ``grid``.

    Kinds: ``zero``, ``constant`` (value), ``gaussian`` (amplitude*exp(-rate*r^2)),
    ``algebraic`` (amplitude*(1+r^2)^(-3/2)), ``traveling_wave`` (gamma, sigma, x0),
    ``star``/``flower``/``fractal`` (smoothed masks, 2D).
    """
    k = spec.kind
    if k == "zero":
        return grid.zeros()
    if k == "constant":
        return grid.sample(lambda *xs: np.full(xs[0].shape, spec.get("value", 0.0)))
    if k in ("gaussian", "algebraic"):
        amp = spec.get("amplitude", 1.0)
        cen = spec.get("center", 0.0)

        def r2(xs):
            return sum((x - cen) ** 2 for x in xs)

        if k == "gaussian":
            rate = spec.get("rate", 1.0)
            return grid.sample(lambda *xs: amp * np.exp(-rate * r2(xs)))
        return grid.sample(lambda *xs: amp * (1.0 + r2(xs)) ** -1.5)
    if k == "traveling_wave":
        if grid.dim != 1:
            raise ConfigError("traveling_wave data needs a 1D grid")
        p = TravelingWaveParams(spec.get("gamma", 0.05), spec.get("sigma", 2.0))
        x0 = spec.get("x0", 0.0)
        return grid.sample(lambda x: traveling_wave(x - x0, 0.0, p))
    if k in ("star", "flower", "fractal"):
        if grid.dim != 2:
            raise ConfigError(f"{k} data needs a 2D grid")
        if k == "fractal":
            mask = make_fractal_mask(grid, spec.get("radius", 0.3), int(spec.get("depth", 3)))
        else:
            maker = make_star_mask if k == "star" else make_flower_mask
            defaults = (0.3, 0.3, 5) if k == "star" else (0.25, 0.6, 6)
            mask = maker(grid, spec.get("r0", defaults[0]), spec.get("eps", defaults[1]),
                         int(spec.get("k", defaults[2])))
        vals = smoothed_indicator(mask, spec.get("smoothing_cells", 5.0), spec.get("amplitude", 1.0))
        return Field(grid, vals)
    raise ConfigError(f"unknown field kind {k!r}")
