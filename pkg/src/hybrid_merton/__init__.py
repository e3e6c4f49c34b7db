"""hybrid-merton: 带马尔可夫切换的不确定随机最优消费与投资组合求解器"""

__version__ = "0.1.0"
__author__ = "Michael Che"
__license__ = "Apache-2.0"

from hybrid_merton.core import HybridMertonError, NumericalError, ValidationError
from hybrid_merton.hjb_ode import SolutionGrid, UtilitySpec, solve_backward
from hybrid_merton.market import Generator, RegimeMarket, validate_generator
from hybrid_merton.policy import PolicyMap, build_policy_map

__all__ = [
    "__version__",
    "__author__",
    "__license__",
    "HybridMertonError",
    "ValidationError",
    "NumericalError",
    "Generator",
    "validate_generator",
    "RegimeMarket",
    "UtilitySpec",
    "SolutionGrid",
    "solve_backward",
    "PolicyMap",
    "build_policy_map",
]
