"""HJB 约化 ODE 包初始化。

导出效用、ρ 系数、解网格与后向求解器。
"""

from hybrid_merton.hjb_ode.grid import SolutionGrid, interpolate
from hybrid_merton.hjb_ode.solver import (
    DEFAULT_STEPS,
    RhoVector,
    analytic_grid,
    compute_rho,
    convergence_order,
    merton_coefficient,
    rhs,
    self_consistency_residual,
    solve_backward,
)
from hybrid_merton.hjb_ode.utility import UtilitySpec

__all__ = [
    "UtilitySpec",
    "RhoVector",
    "SolutionGrid",
    "DEFAULT_STEPS",
    "compute_rho",
    "rhs",
    "solve_backward",
    "interpolate",
    "merton_coefficient",
    "analytic_grid",
    "self_consistency_residual",
    "convergence_order",
]
