"""Ground states of the planar Schrodinger-Newton equation with a logarithmic kernel.

The public surface re-exported here covers the usual workflow::

    from snewton2d import Params, SolverConfig, make_grid, solve_ground_state
    res = solve_ground_state(Params(p=2, q=4), SolverConfig(), make_grid(128, 12.0))
"""

from .diagnostics import (
    DecayFit,
    SymmetryReport,
    consistency_suite,
    decay_fit,
    diagnostics_summary,
    far_field_check,
    sign_check,
    symmetry_report,
)
from .energy import EnergyReport, Params, energy_report, gradient, precondition, residual_norm
from .errors import *  # noqa: F401,F403
from .grid import (
    Coefficient,
    Field,
    GridSpec,
    NormReport,
    integrate,
    laplacian_apply,
    make_grid,
    norms,
    read_field,
    recenter,
    write_field,
)
from .logpotential import LogKernel, VSplit, build_kernel, conv_log, direct_v0_oracle, potential_w, v_split
from .manifolds import (
    FiberCase,
    FiberScalars,
    dilate,
    fiber_case,
    fiber_project,
    nehari_project,
    phi_prime_over_t,
    psi_eval,
)
from .solver import (
    FileInit,
    GaussianInit,
    GroundStateResult,
    RandomInit,
    SolverConfig,
    init_field,
    minimax_level,
    solve_ground_state,
)

__version__ = "0.1.0"
