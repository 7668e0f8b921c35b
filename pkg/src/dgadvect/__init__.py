"""Upwind discontinuous Galerkin solver for 2D linear advection on
triangles, with vertex-based slope limiters in a Taylor basis and
SSP Runge-Kutta time stepping."""
from .basis import ModalBasis, TaylorContext, eval_modal, eval_taylor, modal_values, num_local_dofs
from .discretization import Discretization, Problem
from .limiter import LimiterConfig, limit_disc
from .mesh import Mesh, build_topology, generate_criss_cross, read_mesh, refine_uniform, write_mesh
from .projection import dg_to_taylor, project_l2, taylor_to_dg
from .quadrature import quad_rule_1d, quad_rule_2d
from .solver import (
    Monitors,
    compute_eoc,
    convergence_problem,
    l2_error,
    record_monitors,
    rotation_problem,
    solve_stationary,
    solve_transient,
)
from .timestepping import NumericalFailure, ssp_coefficients

__version__ = "0.1.0"
