"""混合路径模拟包初始化。

导出体制链采样、α-路径、Euler 模拟、机会期望与乘法表验证。
"""

from hybrid_merton.hybridsim.canonical import (
    LIU_SCALE,
    alpha_slope,
    canonical_alpha_path,
    canonical_quantile,
    gauss_legendre_unit,
)
from hybrid_merton.hybridsim.expectation import (
    ChanceEstimate,
    Functional,
    chance_expectation,
    summarize,
)
from hybrid_merton.hybridsim.parallel import (
    DEFAULT_BLOCK_SIZE,
    block_rng,
    default_threads,
    run_blocks,
)
from hybrid_merton.hybridsim.regimes import (
    RegimePath,
    RegimePathBatch,
    RegimeStatistics,
    regime_statistics,
    sample_regime_path,
    sample_regime_paths,
)
from hybrid_merton.hybridsim.sde import (
    HybridPathBundle,
    HybridSDE,
    euler_step,
    simulate_block,
    simulate_paths,
    time_grid,
)
from hybrid_merton.hybridsim.variation import (
    VariationReport,
    ito_liu_remainder,
    variation_table_check,
)
from hybrid_merton.hybridsim.wealth import objective_functional, simulate_wealth, wealth_sde

__all__ = [
    "LIU_SCALE",
    "alpha_slope",
    "canonical_alpha_path",
    "canonical_quantile",
    "gauss_legendre_unit",
    "ChanceEstimate",
    "Functional",
    "chance_expectation",
    "summarize",
    "DEFAULT_BLOCK_SIZE",
    "block_rng",
    "default_threads",
    "run_blocks",
    "RegimePath",
    "RegimePathBatch",
    "RegimeStatistics",
    "regime_statistics",
    "sample_regime_path",
    "sample_regime_paths",
    "HybridPathBundle",
    "HybridSDE",
    "euler_step",
    "simulate_block",
    "simulate_paths",
    "time_grid",
    "VariationReport",
    "ito_liu_remainder",
    "variation_table_check",
    "objective_functional",
    "simulate_wealth",
    "wealth_sde",
]
