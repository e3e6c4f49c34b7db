"""策略包初始化。

导出闭式价值函数、最优策略与 HJB 检查。
"""

from hybrid_merton.policy.hjb_check import (
    HjbResidualReport,
    hamiltonian,
    hamiltonian_argmax_check,
    hamiltonian_excess,
    hjb_residual,
)
from hybrid_merton.policy.policy_map import (
    PolicyMap,
    ValueDerivatives,
    build_policy_map,
    certainty_equivalent,
    general_policy_from_value,
    optimal_consumption,
    optimal_portfolio,
    value,
    value_derivatives,
)

__all__ = [
    "PolicyMap",
    "ValueDerivatives",
    "build_policy_map",
    "value",
    "value_derivatives",
    "optimal_consumption",
    "optimal_portfolio",
    "general_policy_from_value",
    "certainty_equivalent",
    "HjbResidualReport",
    "hjb_residual",
    "hamiltonian",
    "hamiltonian_excess",
    "hamiltonian_argmax_check",
]
