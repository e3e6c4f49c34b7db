"""pytest 配置和共享 fixtures"""

from pathlib import Path
from typing import Any

import numpy as np
import pytest
import yaml

from hybrid_merton.hjb_ode import UtilitySpec
from hybrid_merton.market import RegimeMarket, validate_generator
from hybrid_merton.policy import build_policy_map

TWO_REGIME_Q = [[-1.2, 1.2], [2.5, -2.5]]


# ============ 市场 fixtures ============
@pytest.fixture
def two_regime_generator():
    """两体制生成元 λ_1 = 1.2, λ_2 = 2.5"""
    return validate_generator(TWO_REGIME_Q)


@pytest.fixture
def two_regime_market(two_regime_generator) -> RegimeMarket:
    """两体制单资产市场，η = 0"""
    return RegimeMarket.from_scalars(
        two_regime_generator,
        r=[0.05, 0.01],
        alpha=[0.15, 0.25],
        sigma=[0.25, 0.6],
        eta=[0.0, 0.0],
        horizon=1.0,
    )


@pytest.fixture
def two_regime_market_eta(two_regime_generator) -> RegimeMarket:
    """两体制单资产市场，η = 0.05"""
    return RegimeMarket.from_scalars(
        two_regime_generator,
        r=[0.05, 0.01],
        alpha=[0.15, 0.25],
        sigma=[0.25, 0.6],
        eta=[0.05, 0.05],
        horizon=1.0,
    )


@pytest.fixture
def merton_market() -> RegimeMarket:
    """单体制（无切换）市场"""
    return RegimeMarket.from_scalars(
        validate_generator([[0.0]]),
        r=[0.05],
        alpha=[0.15],
        sigma=[0.25],
        eta=[0.0],
        horizon=1.0,
    )


# ============ 效用 fixtures ============
@pytest.fixture
def averse_utility() -> UtilitySpec:
    """风险厌恶型投资者 κ = 10, β = 0.07"""
    return UtilitySpec(kappa=10.0, beta=0.07)


@pytest.fixture
def tolerant_utility() -> UtilitySpec:
    """风险容忍型投资者 κ = 0.7, β = 0.8"""
    return UtilitySpec(kappa=0.7, beta=0.8)


# ============ 求解结果 fixtures ============
@pytest.fixture
def averse_policy(two_regime_market, averse_utility):
    return build_policy_map(two_regime_market, averse_utility, steps=2000)


@pytest.fixture
def tolerant_policy(two_regime_market, tolerant_utility):
    return build_policy_map(two_regime_market, tolerant_utility, steps=2000)


@pytest.fixture
def merton_policy(merton_market, averse_utility):
    return build_policy_map(merton_market, averse_utility, steps=400)


# ============ 配置 fixtures ============
@pytest.fixture
def config_data() -> dict[str, Any]:
    """小规模的两体制实验配置"""
    return {
        "name": "small",
        "description": "测试用小规模配置",
        "market": {
            "horizon": 1.0,
            "generator": [list(row) for row in TWO_REGIME_Q],
            "regimes": [
                {"r": 0.05, "alpha": 0.15, "sigma": 0.25, "eta": 0.0},
                {"r": 0.01, "alpha": 0.25, "sigma": 0.6, "eta": 0.0},
            ],
        },
        "utility": {"kappa": 10.0, "beta": 0.07},
        "solver": {"steps": 1000},
        "simulation": {
            "n_paths": 4000,
            "steps": 100,
            "alpha_nodes": 4,
            "seed": 7,
            "x0": 1.0,
            "i0": 1,
            "threads": 2,
        },
    }


@pytest.fixture
def write_config(tmp_path: Path):
    """把配置字典写成临时 YAML 文件，返回路径"""

    def _write(data: dict[str, Any], name: str = "experiment.yaml") -> Path:
        path = tmp_path / name
        path.write_text(yaml.safe_dump(data, allow_unicode=True, sort_keys=False))
        return path

    return _write


@pytest.fixture
def config_file(write_config, config_data) -> Path:
    return write_config(config_data)


@pytest.fixture
def invalid_yaml_file(tmp_path: Path) -> Path:
    """创建无效的 YAML 文件"""
    invalid_file = tmp_path / "invalid.yaml"
    invalid_file.write_text("market:\n  horizon: 1.0\n  generator: [[-1.2, 1.2]\n")
    return invalid_file


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
