"""验证检查注册表与内置套件单元测试"""

import copy
import math

import pytest

from hybrid_merton.cli.checks import CheckError, CheckRegistry, CheckResult, CheckStatus
from hybrid_merton.cli.suite import VerifyContext
from hybrid_merton.config import ExperimentConfig
from hybrid_merton.core.errors import ConfigError, NonFinite

BUILTIN_CHECKS = [
    "generator",
    "market_price_of_risk",
    "terminal_condition",
    "ode_consistency",
    "hjb_residual",
    "hamiltonian_argmax",
    "figure_shape",
    "chance_null",
    "variation_table",
    "ctmc_statistics",
    "monte_carlo_value",
]

DETERMINISTIC_CHECKS = BUILTIN_CHECKS[:7]


@pytest.fixture
def temporary_check():
    """注册临时检查，测试结束后注销"""
    names = []

    def _register(name, function):
        CheckRegistry.register(name, function, "临时检查")
        names.append(name)

    yield _register
    for name in names:
        CheckRegistry.unregister(name)


@pytest.fixture
def context(config_data) -> VerifyContext:
    return VerifyContext(ExperimentConfig.from_dict(config_data))


class TestCheckResult:
    """检查结果测试"""

    def test_compare_pass(self) -> None:
        result = CheckResult.compare("x", 1e-8, 1e-6, steps=10)
        assert result.passed
        assert result.status is CheckStatus.PASS
        assert result.details == {"steps": 10}

    def test_compare_fail(self) -> None:
        result = CheckResult.compare("x", 2.0, 1.0)
        assert not result.passed
        assert result.status is CheckStatus.FAIL

    def test_compare_boundary(self) -> None:
        """测试 metric = tolerance 时通过"""
        assert CheckResult.compare("x", 0.0, 0.0).passed

    def test_nan_fails(self) -> None:
        assert not CheckResult.compare("x", float("nan"), 1.0).passed

    def test_to_dict(self) -> None:
        data = CheckResult.compare("x", 0.5, 1.0, note="ok").to_dict()
        assert data == {
            "check": "x",
            "pass": True,
            "metric": 0.5,
            "tolerance": 1.0,
            "status": "pass",
            "details": {"note": "ok"},
        }


class TestCheckRegistry:
    """注册表测试"""

    def test_builtin_order(self) -> None:
        assert CheckRegistry.list_checks()[: len(BUILTIN_CHECKS)] == BUILTIN_CHECKS

    def test_duplicate(self, temporary_check) -> None:
        temporary_check("tmp_dup", lambda ctx: CheckResult.compare("tmp_dup", 0.0, 1.0))
        with pytest.raises(CheckError):
            CheckRegistry.register("tmp_dup", lambda ctx: None)

    def test_get_unknown(self) -> None:
        with pytest.raises(CheckError):
            CheckRegistry.get("no_such_check")

    def test_decorator(self) -> None:
        @CheckRegistry.check("tmp_decorated", "装饰器注册")
        def tmp(ctx):
            return CheckResult.compare("tmp_decorated", ctx, 1.0)

        try:
            assert CheckRegistry.has_check("tmp_decorated")
            assert CheckRegistry.get("tmp_decorated").description == "装饰器注册"
            (result,) = CheckRegistry.run(0.5, ["tmp_decorated"])
            assert result.passed
        finally:
            CheckRegistry.unregister("tmp_decorated")
        assert not CheckRegistry.has_check("tmp_decorated")

    def test_numerical_error_recorded(self, temporary_check) -> None:
        """测试单项数值错误记为 ERROR 而不中断"""

        def broken(ctx):
            raise NonFinite(0.5)

        temporary_check("tmp_broken", broken)
        temporary_check("tmp_ok", lambda ctx: CheckResult.compare("tmp_ok", 0.0, 1.0))
        broken_result, ok_result = CheckRegistry.run(None, ["tmp_broken", "tmp_ok"])
        assert broken_result.status is CheckStatus.ERROR
        assert not broken_result.passed
        assert math.isnan(broken_result.metric)
        assert "error" in broken_result.details
        assert ok_result.passed

    def test_validation_error_propagates(self, temporary_check) -> None:
        def invalid(ctx):
            raise ConfigError("坏配置")

        temporary_check("tmp_invalid", invalid)
        with pytest.raises(ConfigError):
            CheckRegistry.run(None, ["tmp_invalid"])


class TestBuiltinSuite:
    """内置检查测试"""

    def test_deterministic_checks_pass(self, context) -> None:
        results = CheckRegistry.run(context, DETERMINISTIC_CHECKS)
        failed = [r.check for r in results if not r.passed]
        assert failed == []

    def test_tolerant_investor(self, config_data) -> None:
        """测试 κ < 1 时形状检查改为不增、好经济居下"""
        data = copy.deepcopy(config_data)
        data["utility"] = {"kappa": 0.7, "beta": 0.8}
        ctx = VerifyContext(ExperimentConfig.from_dict(data))
        (result,) = CheckRegistry.run(ctx, ["figure_shape"])
        assert result.passed
        assert result.details["expected"] == "nonincreasing, good below"
        assert result.details["good_economy"] == 1

    def test_coarse_solver_flagged(self, config_data) -> None:
        """测试步数过少时网格自洽与 HJB 残差检查都不通过"""
        data = copy.deepcopy(config_data)
        data["solver"]["steps"] = 10
        ctx = VerifyContext(ExperimentConfig.from_dict(data))
        ode, hjb = CheckRegistry.run(ctx, ["ode_consistency", "hjb_residual"])
        assert not ode.passed
        assert ode.details["steps"] == 10
        assert not hjb.passed
        assert hjb.metric > hjb.tolerance

    def test_verification_sizes(self, context) -> None:
        """测试 HJB 网格为 50×20×S，argmax 检查 20 个点、每点 10⁴ 个样本"""
        hjb, argmax = CheckRegistry.run(context, ["hjb_residual", "hamiltonian_argmax"])
        assert hjb.details["grid"] == [50, 20, 2]
        assert hjb.tolerance == 1e-5
        assert argmax.details == {"points": 20, "trials": 10_000}

    def test_context_fails_early(self, config_data) -> None:
        """测试配置错误在任何检查之前抛出"""
        data = copy.deepcopy(config_data)
        data["market"]["generator"] = [[-1.2, 1.2], [2.5, -2.4]]
        config = ExperimentConfig.from_dict(data)
        with pytest.raises(ConfigError):
            VerifyContext(config)

    def test_uncertain_value_is_exploratory(self, config_data) -> None:
        """测试 η ≠ 0 时蒙特卡洛对比只做记录"""
        data = copy.deepcopy(config_data)
        for regime in data["market"]["regimes"]:
            regime["eta"] = 0.05
        data["simulation"].update(n_paths=300, steps=20, alpha_nodes=3)
        ctx = VerifyContext(ExperimentConfig.from_dict(data))
        (result,) = CheckRegistry.run(ctx, ["monte_carlo_value"])
        assert result.status is CheckStatus.EXPLORATORY
        assert result.passed
        assert "closed_form" in result.details

    def test_variation_table_sizes(self, context) -> None:
        """测试乘法表检查的网格不少于 100 步"""
        (result,) = CheckRegistry.run(context, ["variation_table"])
        assert [m["steps"] for m in result.details["meshes"]] == [100, 200]
        assert result.metric == pytest.approx(0.0, abs=1e-9)
