"""配置包初始化。

导出实验配置类型与加载器。
"""

from hybrid_merton.config.loader import ConfigLoader, config_loader
from hybrid_merton.config.schema import (
    ExperimentConfig,
    MarketBlock,
    OutputBlock,
    RegimeBlock,
    SimulationBlock,
    SolverBlock,
    UtilityBlock,
)

__all__ = [
    "ConfigLoader",
    "config_loader",
    "ExperimentConfig",
    "MarketBlock",
    "RegimeBlock",
    "UtilityBlock",
    "SolverBlock",
    "SimulationBlock",
    "OutputBlock",
]
