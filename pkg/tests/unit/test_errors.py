"""错误层次与退出码单元测试"""

import pytest

from hybrid_merton.core.errors import (
    ConfigError,
    HybridMertonError,
    NonPositiveA,
    NonZeroRowSum,
    NumericalError,
    RegimeIndexError,
    TooManyRejectedPaths,
    ValidationError,
    VerificationFailed,
)


class TestExitCodes:
    """退出码测试"""

    @pytest.mark.parametrize(
        ("error", "code"),
        [
            (ConfigError("坏配置"), 1),
            (NonZeroRowSum(0, 0.1), 1),
            (RegimeIndexError(3, 2), 1),
            (NonPositiveA(0.5, 1, -0.1), 2),
            (TooManyRejectedPaths(10, 1000, 1e-3), 2),
            (VerificationFailed(["ode_consistency"]), 3),
        ],
    )
    def test_exit_code(self, error: HybridMertonError, code: int) -> None:
        assert error.exit_code == code

    def test_hierarchy(self) -> None:
        assert issubclass(ConfigError, ValidationError)
        assert issubclass(NonPositiveA, NumericalError)
        assert issubclass(RegimeIndexError, IndexError)
        assert not issubclass(VerificationFailed, (ValidationError, NumericalError))


class TestConfigError:
    """配置错误格式测试"""

    def test_location_in_message(self) -> None:
        error = ConfigError("应为数值", path="exp.yaml", field="market.horizon", line=4)
        text = str(error)
        assert "exp.yaml" in text
        assert "market.horizon" in text
        assert "4" in text
        assert error.message == "应为数值"

    def test_bare_message(self) -> None:
        error = ConfigError("配置 'x' 未找到")
        assert error.path is None
        assert error.field is None
        assert "未找到" in str(error)

    def test_verification_lists_failed(self) -> None:
        error = VerificationFailed(["hjb_residual", "figure_shape"])
        assert error.failed == ["hjb_residual", "figure_shape"]
        assert "hjb_residual" in str(error)
