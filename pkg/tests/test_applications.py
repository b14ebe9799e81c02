import math

import numpy as np
import pytest
import scipy.sparse as sp

from l1pde.analytic import support_bound_parabolic
from l1pde.applications import (
    GraphScenario,
    SandpileProblem,
    jaccard,
    make_fractal_mask,
    make_rect_mask,
    make_star_mask,
    oscillon_data,
    run_graph_diffusion,
    run_heat_1d,
    run_heat_2d_star,
    run_signum_gordon,
    sandpile_solve,
    sandpile_topple,
    smoothed_indicator,
    star_initial_data,
    two_squares,
)
from l1pde.grid import Field, Grid
from l1pde.operators import Graph
from l1pde.schemes import ConfigError, SolverConfig


# -- heat ----------------------------------------------------------------------

def test_heat_zero_stays_zero():
    g = Grid(1, 64, -1.0, 1.0)
    cfg = SolverConfig(tau=g.h**2 / 4, gamma=0.5, t_end=0.05)
    run = run_heat_1d(g.zeros(), g.zeros(), cfg, sample_times=(0.0, 0.05))
    assert not run.final.values.any()
    assert sorted(run.snapshots) == [0.0, 0.05]
    assert np.all(run.trace.column("L1") == 0.0)


def test_heat_lands_on_t_end_and_rounds_for_boundary_samples():
    g = Grid(1, 64, -8.0, 8.0)
    cfg = SolverConfig(tau=g.h**2 / 4, gamma=1.0, t_end=0.1)
    f = g.sample(lambda x: 2 * np.exp(-5 * x * x))
    run = run_heat_1d(f, g.zeros(), cfg, record_every=0, boundary_samples=7)
    assert run.steps % 7 == 0 and run.tau <= cfg.tau
    assert run.boundary[0][-1] == pytest.approx(0.1)
    assert np.all(np.isfinite(run.boundary[1]))


def test_forced_heat_from_rest_support_grows():
    # the scheme is monotone and u = 0 is a subsolution, so u(t) increases in t
    g = Grid(1, 128, -8.0, 8.0)
    cfg = SolverConfig(tau=g.h**2 / 4, gamma=1.0, t_end=0.1)
    f = g.sample(lambda x: 2 * np.exp(-5 * x * x))
    run = run_heat_1d(f, g.zeros(), cfg, record_every=1)
    assert np.all(np.diff(run.trace.column("support")) >= 0)
    assert np.all(np.diff(run.trace.column("L1")) >= -1e-15)


def test_heat_rejects_pin_in_2d():
    g = Grid(2, 16, 0.0, 1.0)
    cfg = SolverConfig(tau=g.h**2 / 4, gamma=1.0, t_end=0.01)
    with pytest.raises(ConfigError):
        run_heat_2d_star(g.zeros(), cfg, pin=lambda t: (0, 0))
    with pytest.raises(ConfigError):
        run_heat_1d(g.zeros(), g.zeros(), cfg)


def test_star_large_gamma_dies_fast():
    g = Grid(2, 64, -1.0, 1.0)
    g0 = star_initial_data(g, smoothing_cells=2)
    tau = 1e-3
    cfg = SolverConfig(tau=tau, gamma=2 * g0.values.max() / tau, t_end=0.01, scheme="DR")
    run = run_heat_2d_star(g0, cfg)
    assert run.extinction_time is not None and run.extinction_time <= 2 * tau


def test_star_pure_heat_conserves_mass():
    g = Grid(2, 64, -1.0, 1.0)
    g0 = star_initial_data(g, smoothing_cells=2)
    cfg = SolverConfig(tau=1e-3, gamma=0.0, t_end=0.05, scheme="DR")
    run = run_heat_2d_star(g0, cfg)
    assert run.extinction_time is None
    assert run.final.values.sum() == pytest.approx(g0.values.sum(), rel=1e-12)


def test_heat_space_time_support_within_bound():
    g = Grid(1, 256, -8.0, 8.0)
    f = g.sample(lambda x: 2 * np.exp(-5 * x * x))
    g0 = g.sample(lambda x: np.maximum(1 - (x - 3) ** 2, 0))
    cfg = SolverConfig(tau=g.h**2 / 4, gamma=1.0, t_end=0.2)
    run = run_heat_1d(f, g0, cfg, record_every=0)
    for a, b in [(1.0, 0.0), (0.5, 0.5), (0.2, 0.8)]:
        assert run.space_time_support <= support_bound_parabolic(g0, f, 1.0, a, b, T=0.2)


# -- graph ---------------------------------------------------------------------

def _two_rings(n):
    i = np.arange(n - 1)
    ring = sp.coo_matrix((np.ones(n), (np.r_[i, 0], np.r_[i + 1, n - 1])), shape=(n, n))
    ring = ring + ring.T
    return Graph(sp.block_diag([ring, ring]).tocsr())


def test_graph_disconnected_component_stays_zero():
    G = _two_rings(20)
    run = run_graph_diffusion(GraphScenario(G, 3, 0.0, 0.5, 50.0), stop_when_settled=False)
    assert run.n_components == 2
    assert not run.final[20:].any() and np.all(run.final[:20] > 0)


def test_graph_support_bound_and_extinction():
    G = _two_rings(50)
    sc = GraphScenario(G, 0, 0.02, 0.5, 500.0)
    run = run_graph_diffusion(sc, sample_times=(0.0, 1.0))
    assert run.max_support <= 1.0 / sc.gamma
    assert run.extinction_time is not None
    assert set(run.snapshots) == {0.0, 1.0}


def test_graph_scenario_validation():
    G = _two_rings(5)
    with pytest.raises(ConfigError):
        GraphScenario(G, 10, 0.0)
    with pytest.raises(ConfigError):
        GraphScenario(G, 0, -1.0)


# -- signum-Gordon --------------------------------------------------------------

def test_sg_zero_data():
    g = Grid(1, 64, -4.0, 4.0)
    run = run_signum_gordon(g.zeros(), g.zeros(), 0.5 * g.h, 1.0)
    assert not run.final.values.any()


def test_sg_support_agrees_across_resolutions():
    sup = []
    for n in (512, 1024):
        g = Grid(1, n, -4.0, 4.0)
        g1, g2 = oscillon_data(g)
        run = run_signum_gordon(g1, g2, 0.5 * g.h, 2.0)
        assert run.support.max() < 8.0  # compact inside the box
        sup.append(run.support.max())
    assert abs(sup[0] - sup[1]) <= 0.05 * sup[1]


# -- sandpile -------------------------------------------------------------------

def test_topple_no_excess_no_motion():
    g = Grid(2, 11, 0.0, 1.0)
    m = np.zeros(g.shape, dtype=bool)
    m[5, 5] = True
    res = sandpile_topple(SandpileProblem(g, ((m, 0.7),)))
    assert res.mass[5, 5] == 0.7 and res.mass.sum() == pytest.approx(0.7)
    assert res.occupied.count == 0  # below capacity: nothing is full
    res = sandpile_topple(SandpileProblem(g, ((m, 1.0),)))
    assert res.occupied.count == 1


def test_topple_symmetric_and_conservative():
    g = Grid(2, 31, 0.0, 1.0)
    m = np.zeros(g.shape, dtype=bool)
    m[15, 15] = True
    res = sandpile_topple(SandpileProblem(g, ((m, 9.0),)))
    occ = res.occupied.mask
    for img in (occ.T, occ[::-1], occ[:, ::-1], np.rot90(occ)):
        assert np.array_equal(img, occ)
    assert res.mass.sum() == pytest.approx(9.0, rel=1e-12)


def test_sandpile_zero_and_unit_density():
    g = Grid(2, 64, 0.0, 1.0)
    mask = make_rect_mask(g, (0.3, 0.3), (0.6, 0.6))
    res = sandpile_solve(SandpileProblem(g, ((mask, 0.0),)))
    assert not res.u.values.any()
    # unit density is the degenerate case f = gamma on the square: the iterate
    # only decays towards zero, and every cell of the square is full
    res = sandpile_solve(SandpileProblem(g, ((mask, 1.0),)))
    assert res.u.values.min() >= 0.0 and res.u.values.max() < 1e-7
    assert not res.u.values[~mask].any()
    assert res.occupied.measure == pytest.approx(mask.sum() * g.cell_volume)


def test_sandpile_small_two_squares_matches_toppling():
    p = two_squares(n=100)
    res = sandpile_solve(p)
    top = sandpile_topple(p)
    assert res.u.values.min() >= 0.0
    assert jaccard(res.occupied.mask, top.occupied.mask) >= 0.98
    assert np.abs(top.odometer * p.grid.h**2 / 4 - res.u.values).max() < 1e-6


def test_sandpile_problem_validation():
    g = Grid(2, 8, 0.0, 1.0)
    with pytest.raises(ValueError):
        SandpileProblem(g, ((np.ones((8, 8), bool), -1.0),))
    with pytest.raises(ValueError):
        SandpileProblem(g, ((np.ones((4, 4), bool), 1.0),))
    with pytest.raises(ValueError):
        SandpileProblem(Grid(1, 8, 0, 1), ())


# -- shapes ---------------------------------------------------------------------

def test_disk_area():
    g = Grid(2, 400, -1.0, 1.0)
    r0 = 0.4
    area = make_star_mask(g, r0, 0.0).sum() * g.cell_volume
    assert abs(area - math.pi * r0**2) <= 2 * math.pi * r0 * g.h


def test_area_monotone_in_radius():
    g = Grid(2, 200, -1.0, 1.0)
    areas = [make_star_mask(g, r).sum() for r in (0.1, 0.2, 0.3, 0.4)]
    assert areas == sorted(areas) and len(set(areas)) == 4
    fr = [make_fractal_mask(g, r, 2).sum() for r in (0.2, 0.3, 0.4)]
    assert fr == sorted(fr)


@pytest.mark.parametrize("k", [4, 5, 7])
def test_star_rotational_symmetry(k):
    g = Grid(2, 401, -1.0, 1.0)
    mask = make_star_mask(g, 0.4, 0.3, k)
    X, Y = g.coords()
    th = np.mod(np.arctan2(Y, X) + np.pi / k, 2 * np.pi)  # sector edges between petals
    sector = np.floor(th / (2 * np.pi / k)).astype(int) % k
    counts = np.bincount(sector[mask], minlength=k)
    assert counts.max() - counts.min() <= 0.02 * counts.mean()


def test_star_rejects_degenerate():
    g = Grid(2, 16, -1.0, 1.0)
    with pytest.raises(ValueError):
        make_star_mask(g, 0.0)
    with pytest.raises(ValueError):
        make_star_mask(g, 0.3, 1.0)
    with pytest.raises(ValueError):
        make_star_mask(Grid(1, 16, 0, 1))


def test_smoothing_conserves_mass_and_is_deterministic():
    g = Grid(2, 64, -1.0, 1.0)
    m = make_star_mask(g)
    a = smoothed_indicator(m, 3.0)
    assert a.sum() == pytest.approx(m.sum(), rel=1e-12)
    assert np.array_equal(a, smoothed_indicator(m, 3.0))
    assert Field(g, a).values.max() <= 1.0
