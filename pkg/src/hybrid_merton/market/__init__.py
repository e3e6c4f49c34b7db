"""市场包初始化。

导出生成元与体制切换市场相关类型。
"""

from hybrid_merton.market.generator import (
    Generator,
    check_regime,
    expected_occupation,
    stationary_distribution,
    transition_matrix,
    validate_generator,
)
from hybrid_merton.market.market import (
    MarketPriceOfRisk,
    RegimeCoefficients,
    RegimeMarket,
    gram_matrix,
    good_economy,
    market_price_of_risk,
    solve_volatility,
)

__all__ = [
    "Generator",
    "validate_generator",
    "check_regime",
    "stationary_distribution",
    "transition_matrix",
    "expected_occupation",
    "RegimeMarket",
    "RegimeCoefficients",
    "MarketPriceOfRisk",
    "market_price_of_risk",
    "gram_matrix",
    "solve_volatility",
    "good_economy",
]
