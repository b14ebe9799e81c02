"""Finite-difference and splitting solvers for diffusion with an L1 damping term.

The L1 term ``gamma * |u|`` forces solutions to vanish identically outside a
bounded set. Every scheme here ends a step with a soft threshold, so the
support of a discrete solution is exact rather than thresholded.
"""

from .analytic import (
    FreeBoundaryPrediction,
    TravelingWaveParams,
    exact_elliptic,
    free_boundary_a1,
    greens_elliptic_eval,
    rescaled_mass,
    support_bound_elliptic,
    support_bound_parabolic,
    traveling_wave,
)
from .grid import Field, Grid, SupportSet, norm, read_field_csv, support, total_variation, write_field_csv
from .operators import (
    Graph,
    Resolvent,
    graph_laplacian_apply,
    laplacian_apply,
    resolvent_inverse,
    shrink,
    subgradient_select,
)
from .schemes import (
    ConfigError,
    DrState,
    SolverConfig,
    SolverError,
    dr_init,
    dr_solve_stationary,
    dr_step,
    graph_imex_step,
    imex_step,
    leapfrog_sg_step,
)

__version__ = "0.1.0"
