"""Error norms, rate fits, free-boundary fits and monotonicity monitors."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .grid import Field, norm, support, total_variation

__all__ = [
    "DiagnosticsTrace",
    "FitResult",
    "CheckResult",
    "field_stats",
    "error_norm",
    "convergence_rate",
    "successive_ratios",
    "fit_sqrt_boundary",
    "boundary_location",
    "monotonicity_check",
    "entropy_check",
    "superlevel",
    "C_SLACK",
]

C_SLACK = 10.0


def field_stats(u: Field) -> dict[str, float]:
    """Row of standard monitors for one snapshot."""
    l2 = norm(u, 2)
    return {
        "L1": norm(u, 1),
        "L2": l2,
        "Linf": norm(u, np.inf),
        "TV": total_variation(u),
        "support": support(u).measure,
        "energy": 0.5 * l2 * l2,
    }


@dataclass
class DiagnosticsTrace:
    """Time series of named scalar columns sharing one strictly increasing clock."""

    times: list = field(default_factory=list)
    series: dict = field(default_factory=dict)

    def record(self, t: float, **values) -> None:
        if self.times and not t > self.times[-1]:
            raise ValueError(f"trace times must increase: {t} after {self.times[-1]}")
        if self.times and set(values) != set(self.series):
            raise ValueError("every record must supply the same columns")
        self.times.append(float(t))
        for k, v in values.items():
            self.series.setdefault(k, []).append(float(v))

    def __len__(self) -> int:
        return len(self.times)

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.series[name], dtype=float)

    @property
    def t(self) -> np.ndarray:
        return np.asarray(self.times, dtype=float)

    def to_csv(self, path) -> None:
        names = list(self.series)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["time", *names])
            for i, t in enumerate(self.times):
                w.writerow([repr(t), *(repr(self.series[k][i]) for k in names)])

    @classmethod
    def from_csv(cls, path) -> "DiagnosticsTrace":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        head, body = rows[0], rows[1:]
        tr = cls()
        for r in body:
            tr.record(float(r[0]), **{k: float(v) for k, v in zip(head[1:], r[1:])})
        return tr

    def to_dict(self) -> dict:
        return {"time": list(self.times), **{k: list(v) for k, v in self.series.items()}}


@dataclass(frozen=True)
class FitResult:
    coefficients: dict
    residual: float
    condition: float

    def __getitem__(self, key):
        return self.coefficients[key]

    def to_dict(self) -> dict:
        return {"coefficients": dict(self.coefficients), "residual": self.residual,
                "condition": self.condition}


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    first_violation: int | None = None
    worst_margin: float = 0.0

    def __bool__(self) -> bool:
        return self.passed


def superlevel(u: Field, c: float) -> tuple[float, float]:
    """``(int (|u| - c)^+, |{|u| > c}|)`` for a level ``c >= 0``.

    For unforced decay both shrink over time; they are monitored, not asserted,
    since the discrete flow only satisfies the level-set inequality up to
    O(tau) terms.
    """
    if c < 0:
        raise ValueError("level must be nonnegative")
    excess = np.abs(u.values) - c
    vol = u.grid.cell_volume
    return float(np.maximum(excess, 0.0).sum() * vol), float(np.count_nonzero(excess > 0) * vol)


def error_norm(u_num: Field, oracle, q=2) -> float:
    """Discrete Lq norm of ``u_num - oracle`` sampled at the grid points."""
    return norm(u_num.with_values(u_num.values - u_num.grid.sample(oracle).values), q)


def _lstsq(X: np.ndarray, y: np.ndarray):
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    res = float(np.linalg.norm(X @ coef - y))
    cond = float(np.linalg.cond(X.T @ X))
    return coef, res, cond


def convergence_rate(hs, errors) -> FitResult:
    """Least-squares slope of ``log(error)`` against ``log(h)``."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if hs.shape != errors.shape or hs.size < 3:
        raise ValueError("need at least three (h, error) pairs")
    if (hs <= 0).any() or (errors <= 0).any():
        raise ValueError("grid spacings and errors must be positive")
    X = np.column_stack([np.ones_like(hs), np.log(hs)])
    coef, res, cond = _lstsq(X, np.log(errors))
    return FitResult({"log_c": float(coef[0]), "slope": float(coef[1])}, res, cond)


def successive_ratios(errors) -> np.ndarray:
    e = np.asarray(errors, dtype=float)
    return e[:-1] / e[1:]


def fit_sqrt_boundary(times, a_values, free_exponent: bool = False) -> FitResult:
    """Fit ``a(t) = a0 + a1*sqrt(t)``; optionally ``a0 + a1*t**beta`` too.

    The free-exponent fit starts from the square-root fit and adds ``beta`` to
    the coefficients.
    """
    t = np.asarray(times, dtype=float)
    a = np.asarray(a_values, dtype=float)
    if t.shape != a.shape or t.size < 3:
        raise ValueError("need at least three samples")
    if (t <= 0).any():
        raise ValueError("fit times must be positive")
    X = np.column_stack([np.ones_like(t), np.sqrt(t)])
    coef, res, cond = _lstsq(X, a)
    if not np.isfinite(cond) or cond > 1e14:
        raise ValueError(f"degenerate design matrix (condition {cond:.3g})")
    out = {"a0": float(coef[0]), "a1": float(coef[1])}
    if not free_exponent:
        return FitResult(out, res, cond)
    sol = optimize.least_squares(
        lambda p: p[0] + p[1] * t ** p[2] - a,
        x0=[coef[0], coef[1], 0.5],
        bounds=([-np.inf, -np.inf, 0.0], [np.inf, np.inf, 2.0]),
        xtol=1e-14, ftol=1e-14, gtol=1e-14,
    )
    J = sol.jac
    out = {"a0": float(sol.x[0]), "a1": float(sol.x[1]), "beta": float(sol.x[2])}
    return FitResult(out, float(np.linalg.norm(sol.fun)), float(np.linalg.cond(J.T @ J)))


def boundary_location(u: Field, method: str = "extrapolate", side: str = "right") -> float:
    """Position of the outer edge of the support of a 1D field.

    ``"cell"`` returns the outermost nonzero cell center shifted by ``h/2``.
    ``"extrapolate"`` uses that ``u`` vanishes quadratically at a free
    boundary, so ``sqrt(u)`` is locally linear; it is extended from the last
    two nonzero cells to its zero crossing. Returns ``nan`` for an empty support.
    """
    if u.grid.dim != 1:
        raise ValueError("boundary_location works on 1D fields")
    if side not in ("right", "left"):
        raise ValueError("side must be 'right' or 'left'")
    v = u.values if side == "right" else u.values[::-1]
    nz = np.flatnonzero(v)
    if nz.size == 0:
        return math.nan
    j = int(nz[-1])
    h = u.grid.h
    x = u.grid.axis()
    xj = x[j] if side == "right" else x[::-1][j]
    sgn = 1.0 if side == "right" else -1.0
    if method == "cell":
        return float(xj + sgn * 0.5 * h)
    if method != "extrapolate":
        raise ValueError(f"unknown method {method!r}")
    if j == 0:
        return float(xj + sgn * 0.5 * h)
    r1, r0 = math.sqrt(abs(v[j])), math.sqrt(abs(v[j - 1]))
    if r0 <= r1:
        return float(xj + sgn * 0.5 * h)
    return float(xj + sgn * h * r1 / (r0 - r1))


def monotonicity_check(series, tolerance: float = 0.0) -> CheckResult:
    """Pass iff ``series[i+1] <= series[i] + tolerance`` for every ``i``."""
    s = np.asarray(series, dtype=float)
    if s.size < 2:
        return CheckResult(True)
    excess = np.diff(s) - tolerance
    bad = np.flatnonzero(excess > 0)
    worst = float(excess.max())
    if bad.size:
        return CheckResult(False, int(bad[0]) + 1, worst)
    return CheckResult(True, None, worst)


def entropy_check(trace: DiagnosticsTrace, gamma: float, tau: float | None = None,
                  c_slack: float = C_SLACK) -> CheckResult:
    """Discrete energy inequality for ``K(u) = u^2/2``.

    Checks ``(E[n+1] - E[n])/dt <= -gamma*L1[n+1] + W[n+1] + slack`` where
    ``W`` is the optional ``work`` column ``<f, u>`` and
    ``slack = c_slack * dt * max_n |E[n+1] - E[n]|/dt``. ``dt`` is taken from
    the trace clock unless ``tau`` is given. The trace must be recorded every
    step.
    """
    if len(trace) < 2:
        return CheckResult(True)
    E = trace.column("energy")
    L1 = trace.column("L1")
    W = trace.column("work") if "work" in trace.series else np.zeros_like(E)
    dt = np.diff(trace.t) if tau is None else np.full(E.size - 1, float(tau))
    rate = np.diff(E) / dt
    slack = c_slack * dt * np.abs(rate).max()
    margin = rate - (-gamma * L1[1:] + W[1:] + slack)
    bad = np.flatnonzero(margin > 0)
    worst = float(margin.max())
    if bad.size:
        return CheckResult(False, int(bad[0]) + 1, worst)
    return CheckResult(True, None, worst)
