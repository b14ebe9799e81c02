"""Reusable scenarios built on the solvers."""

from .graph_diffusion import GraphRun, GraphScenario, knn_graph, run_graph_diffusion
from .heat import (
    HeatRun,
    evolve_heat,
    run_heat_1d,
    run_heat_2d_star,
    star_initial_data,
    traveling_wave_field,
)
from .sandpile import (
    SandpileProblem,
    SandpileResult,
    ToppleResult,
    jaccard,
    sandpile_solve,
    sandpile_topple,
    two_squares,
)
from .shapes import (
    koch_snowflake,
    make_flower_mask,
    make_fractal_mask,
    make_rect_mask,
    make_star_mask,
    smoothed_indicator,
)
from .signum_gordon import SgRun, oscillon_data, run_signum_gordon, sg_self_convergence
