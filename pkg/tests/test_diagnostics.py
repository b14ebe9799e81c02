import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l1pde.diagnostics import (
    DiagnosticsTrace,
    boundary_location,
    convergence_rate,
    entropy_check,
    error_norm,
    field_stats,
    fit_sqrt_boundary,
    monotonicity_check,
    successive_ratios,
    superlevel,
)
from l1pde.grid import Field, Grid, norm
from l1pde.schemes import SolverConfig, imex_step


def test_error_norm():
    g = Grid(1, 50, 0.0, 1.0)
    u = g.sample(np.sin)
    assert error_norm(u, np.sin, 2) == 0.0
    shifted = u.with_values(u.values + 0.3)
    assert error_norm(shifted, np.sin, np.inf) == pytest.approx(0.3)
    assert error_norm(shifted, np.sin, 1) == pytest.approx(0.3)


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 3.0])
def test_convergence_rate_exact_power(p):
    hs = 1.0 / np.array([16, 32, 64, 128, 256])
    fit = convergence_rate(hs, 3.7 * hs**p)
    assert fit["slope"] == pytest.approx(p, abs=1e-10)
    assert fit.residual < 1e-10


def test_convergence_rate_on_halving_errors_is_first_order():
    errors = [0.4601, 0.2319, 0.1133, 0.0570, 0.0284, 0.0143, 0.0072]
    hs = 1.0 / np.array([128, 256, 512, 1024, 2048, 4096, 8192])
    assert convergence_rate(hs, errors)["slope"] == pytest.approx(1.0, abs=0.02)
    assert np.all(np.abs(successive_ratios(errors) - 2.0) < 0.05)


def test_convergence_rate_rejects_bad_input():
    with pytest.raises(ValueError):
        convergence_rate([0.1], [0.2])
    with pytest.raises(ValueError):
        convergence_rate([0.1, 0.05, 0.0], [1, 2, 3])
    with pytest.raises(ValueError):
        convergence_rate([0.1, 0.05, 0.02], [1, -2, 3])


def test_fit_sqrt_boundary_exact_recovery():
    t = np.linspace(0.001, 0.02, 50)
    fit = fit_sqrt_boundary(t, 0.3724 + 1.0 * np.sqrt(t))
    assert fit["a0"] == pytest.approx(0.3724, abs=1e-12)
    assert fit["a1"] == pytest.approx(1.0, abs=1e-10)
    free = fit_sqrt_boundary(t, 0.3724 + 1.0 * np.sqrt(t), free_exponent=True)
    assert free["beta"] == pytest.approx(0.5, abs=1e-6)
    free = fit_sqrt_boundary(t, 0.1 + 0.7 * t**0.4, free_exponent=True)
    assert free["beta"] == pytest.approx(0.4, abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 10))
def test_fit_sqrt_boundary_is_linear(a0, a1, c):
    t = np.linspace(0.01, 1.0, 20)
    a = a0 + a1 * np.sqrt(t) + 0.01 * np.sin(40 * t)
    f1 = fit_sqrt_boundary(t, a)
    f2 = fit_sqrt_boundary(t, c * a)
    assert f2["a0"] == pytest.approx(c * f1["a0"], abs=1e-9)
    assert f2["a1"] == pytest.approx(c * f1["a1"], abs=1e-9)


def test_fit_sqrt_boundary_degenerate():
    with pytest.raises(ValueError):
        fit_sqrt_boundary([0.1, 0.1, 0.1], [1, 2, 3])
    with pytest.raises(ValueError):
        fit_sqrt_boundary([0.0, 0.1, 0.2], [1, 2, 3])


def test_boundary_location_on_quadratic_edge():
    g = Grid(1, 400, -2.0, 2.0)
    a = 0.7431
    u = g.sample(lambda x: np.maximum(a * a - x * x, 0.0) ** 2 / 4)
    # u vanishes quadratically at +-a, so sqrt(u) is close to linear there
    assert boundary_location(u) == pytest.approx(a, abs=0.1 * g.h)
    assert boundary_location(u, side="left") == pytest.approx(-a, abs=0.1 * g.h)
    assert abs(boundary_location(u, "cell") - a) <= g.h
    assert np.isnan(boundary_location(g.zeros()))


def test_monotonicity_check():
    assert monotonicity_check([5, 4, 3, 2.5]).passed
    res = monotonicity_check([5, 4, 4.5, 3], tolerance=0.1)
    assert not res.passed and res.first_violation == 2
    assert monotonicity_check([1, 1 + 1e-13], tolerance=1e-12).passed


def test_trace_csv_round_trip(tmp_path):
    tr = DiagnosticsTrace()
    g = Grid(1, 16, 0.0, 1.0)
    for k in range(3):
        tr.record(0.1 * k, **field_stats(g.sample(lambda x: np.sin(x + k))))
    p = tmp_path / "t.csv"
    tr.to_csv(p)
    assert p.read_text().splitlines()[0].startswith("time,")
    back = DiagnosticsTrace.from_csv(p)
    assert back.times == tr.times and back.series == tr.series
    with pytest.raises(ValueError):
        tr.record(0.1, **field_stats(g.zeros()))


def test_field_stats_energy():
    g = Grid(2, 8, 0.0, 1.0)
    u = Field(g, np.full(g.shape, 2.0))
    s = field_stats(u)
    assert s["energy"] == pytest.approx(0.5 * norm(u, 2) ** 2)
    assert s["support"] == pytest.approx(1.0)


def test_entropy_check_trivial_cases():
    tr = DiagnosticsTrace()
    for k in range(5):
        tr.record(0.1 * k, energy=0.0, L1=0.0)
    assert entropy_check(tr, 1.0).passed
    tr = DiagnosticsTrace()
    for k in range(5):
        tr.record(0.1 * k, energy=1.0 - 0.1 * k, L1=0.0)
    assert entropy_check(tr, 0.0).passed
    tr = DiagnosticsTrace()
    for k in range(5):
        tr.record(0.1 * k, energy=1.0 + 0.1 * k, L1=1.0)
    assert not entropy_check(tr, 1.0).passed


def test_superlevel_values_and_decay():
    g = Grid(1, 200, -1.0, 1.0)
    u = g.sample(lambda x: np.maximum(1 - x * x, 0.0))
    ex, meas = superlevel(u, 0.75)
    assert meas == pytest.approx(1.0, abs=2 * g.h)
    assert ex == pytest.approx(1.0 / 6.0, abs=1e-3)  # int of (1/4 - x^2) over |x| < 1/2
    assert superlevel(u, 2.0) == (0.0, 0.0)
    with pytest.raises(ValueError):
        superlevel(u, -1.0)
    cfg = SolverConfig(tau=g.h**2 / 4, gamma=0.5)
    prev = superlevel(u, 0.3)[0]
    for _ in range(300):
        u = imex_step(u, g.zeros(), cfg)
        cur = superlevel(u, 0.3)[0]
        assert cur <= prev + 1e-12
        prev = cur
