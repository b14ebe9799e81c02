"""Closed-form solutions and quantitative predictions used as oracles."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize, special

from .grid import Field

__all__ = [
    "TravelingWaveParams",
    "traveling_wave",
    "exact_elliptic",
    "elliptic_support_radius",
    "QuadratureError",
    "greens_elliptic_eval",
    "support_bound_elliptic",
    "support_bound_parabolic",
    "rescaled_mass",
    "FreeBoundaryError",
    "FreeBoundaryPrediction",
    "free_boundary_a1",
    "free_boundary_prediction",
]


@dataclass(frozen=True)
class TravelingWaveParams:
    gamma: float
    sigma: float

    def __post_init__(self):
        if not (self.gamma > 0 and self.sigma > 0):
            raise ValueError("traveling wave needs gamma > 0 and sigma > 0")


def traveling_wave(x, t, p: TravelingWaveParams):
    """Right-moving profile with front at ``x = sigma*t``, zero behind it."""
    g, c = p.gamma, p.sigma
    s = np.asarray(x, dtype=float) - c * t
    sp = np.maximum(s, 0.0)
    v = (g / c) * sp + (g / c**2) * np.expm1(-c * sp)
    v = np.where(s > 0, v, 0.0)
    return v if v.ndim else float(v)


def elliptic_support_radius(gamma: float) -> float:
    return math.sqrt(gamma**-2 - 1.0)


def exact_elliptic(x, gamma: float):
    """Solution of ``u'' = -(1+x^2)^{-3/2} + gamma p(u)`` on the real line."""
    if not 0 < gamma <= 1:
        raise ValueError("exact elliptic solution needs 0 < gamma <= 1")
    a = elliptic_support_radius(gamma)
    c = 0.5 * (gamma + 1.0 / gamma)
    x = np.asarray(x, dtype=float)
    inside = -np.sqrt(1.0 + x * x) + 0.5 * gamma * x * x + c
    u = np.where(np.abs(x) < a, np.maximum(inside, 0.0), 0.0)
    return u if u.ndim else float(u)


class QuadratureError(RuntimeError):
    def __init__(self, message, value=None, estimate=None):
        super().__init__(message)
        self.value = value
        self.estimate = estimate


def _quad(func, a, b, *, epsabs=1e-10, points=None, limit=200):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err, info, *rest = integrate.quad(
            func, a, b, epsabs=epsabs, epsrel=0.0, points=points, limit=limit,
            full_output=1,
        )
    if rest and err > epsabs * 100:
        raise QuadratureError(
            f"quadrature on [{a}, {b}] did not converge: {rest[0]}", val, err
        )
    return val, err


def greens_elliptic_eval(x: float, f, gamma: float, support_interval, tol=1e-10) -> float:
    """Superposition ``u(x) = -1/2 int_{-a}^{a} |x - y| (f(y) - gamma) dy``.

    Valid for a nonnegative solution whose positive set is the given interval;
    ``-|x|/2`` is the free-space Green's function of ``-d^2/dx^2``.
    """
    lo, hi = support_interval
    pts = [x] if lo < x < hi else None
    val, _ = _quad(lambda y: abs(x - y) * (f(y) - gamma), lo, hi, epsabs=tol, points=pts)
    return -0.5 * val


def _check_weights(gamma, alpha, beta):
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if alpha < 0 or beta < 0 or abs(alpha + beta - 1.0) > 1e-12:
        raise ValueError("need alpha, beta >= 0 with alpha + beta = 1")
    if alpha == 0:
        raise ValueError("alpha = 0 gives no bound")


def support_bound_elliptic(f: Field, gamma: float, alpha: float = 1.0, beta: float = 0.0) -> float:
    """``(alpha*gamma)^{-1} * int (|f| - beta*gamma)^+``."""
    _check_weights(gamma, alpha, beta)
    excess = np.maximum(np.abs(f.values) - beta * gamma, 0.0).sum() * f.grid.cell_volume
    return float(excess / (alpha * gamma))


def support_bound_parabolic(
    g: Field, f: Field, gamma: float, alpha: float = 1.0, beta: float = 0.0, T: float = 1.0
) -> float:
    """Space-time support bound for a time-independent forcing over ``[0, T]``."""
    _check_weights(gamma, alpha, beta)
    if T <= 0:
        raise ValueError("T must be positive")
    vol = g.grid.cell_volume
    mass = np.abs(g.values).sum() * vol
    excess = np.maximum(np.abs(f.values) - beta * gamma, 0.0).sum() * f.grid.cell_volume
    return float((mass + T * excess) / (alpha * gamma))


# -- free boundary coefficient ---------------------------------------------

# Beyond x - a1*sqrt(s) > _X_TAIL*sqrt(1 - s) the heat kernel is below 1e-16.
_X_TAIL = 2.0 * math.sqrt(-math.log(1e-16))


def _first_moment(x, s, a1):
    """``int_{-inf}^{a1 sqrt(s)} y G(x - y, 1 - s) dy`` in closed form."""
    tau = 1.0 - s
    c = x - a1 * math.sqrt(s)
    if tau <= 0.0:
        return 0.0 if c > 0 else x
    r = 2.0 * math.sqrt(tau)
    return 0.5 * x * special.erfc(c / r) - math.sqrt(tau / math.pi) * math.exp(-c * c / (4 * tau))


def rescaled_mass(a1: float, tol: float = 1e-11) -> tuple[float, float]:
    """Exterior mass ``m~1(a1)`` and its quadrature error estimate.

    The innermost integral is done analytically, so only the ``x`` and ``s``
    integrals are numerical. ``x`` is truncated at ``a1 + _X_TAIL``.
    """
    x_hi = a1 + _X_TAIL
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.dblquad(
            lambda s, x: _first_moment(x, s, a1), a1, x_hi, 0.0, 1.0,
            epsabs=tol, epsrel=1e-10,
        )
    return val, err


@dataclass(frozen=True)
class FreeBoundaryPrediction:
    a0: float
    a1: float
    report: dict = field(default_factory=dict)


class FreeBoundaryError(RuntimeError):
    def __init__(self, message, samples=None):
        super().__init__(message)
        self.samples = samples


def free_boundary_a1(bracket=(0.0, 4.0), xtol: float = 1e-6) -> FreeBoundaryPrediction:
    """Root of the rescaled exterior mass by bisection.

    ``a0`` is left at 0 here; :func:`free_boundary_prediction` fills it in for a
    given forcing.
    """
    lo, hi = bracket
    m_lo, e_lo = rescaled_mass(lo)
    m_hi, e_hi = rescaled_mass(hi)
    samples = {lo: m_lo, hi: m_hi}
    if m_lo * m_hi > 0:
        raise FreeBoundaryError(f"no sign change of m~1 on [{lo}, {hi}]", samples)
    worst_err = max(e_lo, e_hi)
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        m_mid, e_mid = rescaled_mass(mid)
        samples[mid] = m_mid
        worst_err = max(worst_err, e_mid)
        if (m_mid < 0) == (m_lo < 0):
            lo, m_lo = mid, m_mid
        else:
            hi = mid
    report = {
        "bracket": list(bracket),
        "bisection_xtol": xtol,
        "evaluations": len(samples),
        "m1_at_bracket": [samples[bracket[0]], samples[bracket[1]]],
        "x_truncation": f"a1 + {_X_TAIL:.6g}",
        "y_integral": "closed form (erfc/exp)",
        "max_quadrature_error": worst_err,
    }
    return FreeBoundaryPrediction(0.0, 0.5 * (lo + hi), report)


def free_boundary_prediction(f, gamma: float, x_max: float = 50.0) -> FreeBoundaryPrediction:
    """``a0`` with ``f(a0) = gamma`` for a radially decreasing ``f``, plus ``a1``."""
    if f(0.0) <= gamma:
        raise ValueError("forcing never exceeds gamma: support stays empty")
    a0 = optimize.brentq(lambda r: f(r) - gamma, 0.0, x_max, xtol=1e-14)
    base = free_boundary_a1()
    return FreeBoundaryPrediction(a0, base.a1, dict(base.report, a0=a0))
