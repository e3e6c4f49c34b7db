"""市场系数单元测试"""

import numpy as np
import pytest

from hybrid_merton.core.errors import (
    DimensionMismatch,
    NonFiniteCoefficient,
    NotPositiveDefinite,
    RegimeIndexError,
)
from hybrid_merton.market import (
    RegimeMarket,
    gram_matrix,
    good_economy,
    market_price_of_risk,
    solve_volatility,
    validate_generator,
)


class TestRegimeMarket:
    """市场构造测试"""

    def test_dimensions(self, two_regime_market) -> None:
        assert two_regime_market.n_regimes == 2
        assert two_regime_market.n_assets == 1
        assert two_regime_market.n_canonical == 1
        assert two_regime_market.horizon == 1.0

    def test_uncertain_volatility_flag(self, two_regime_market, two_regime_market_eta) -> None:
        """测试 η 是否非零"""
        assert not two_regime_market.has_uncertain_volatility
        assert two_regime_market_eta.has_uncertain_volatility

    def test_coefficients_at(self, two_regime_market) -> None:
        """测试按体制取系数"""
        coef = two_regime_market.coefficients_at(0.3, 1)
        assert coef.r == 0.01
        np.testing.assert_array_equal(coef.alpha, [0.25])
        np.testing.assert_array_equal(coef.sigma, [[0.6]])

    def test_coefficients_bad_regime(self, two_regime_market) -> None:
        with pytest.raises(RegimeIndexError):
            two_regime_market.coefficients_at(0.0, 2)

    def test_arrays_read_only(self, two_regime_market) -> None:
        with pytest.raises(ValueError):
            two_regime_market.r[0] = 1.0

    def test_wrong_rate_length(self, two_regime_generator) -> None:
        """测试 r 的长度与体制数不符"""
        with pytest.raises(DimensionMismatch):
            RegimeMarket(
                generator=two_regime_generator,
                r=np.array([0.05]),
                alpha=np.array([[0.15], [0.25]]),
                sigma=np.array([[[0.25]], [[0.6]]]),
                eta=np.zeros((2, 1, 1)),
                horizon=1.0,
            )

    def test_wrong_sigma_shape(self, two_regime_generator) -> None:
        with pytest.raises(DimensionMismatch):
            RegimeMarket(
                generator=two_regime_generator,
                r=np.array([0.05, 0.01]),
                alpha=np.array([[0.15], [0.25]]),
                sigma=np.ones((2, 2, 2)),
                eta=np.zeros((2, 1, 1)),
                horizon=1.0,
            )

    def test_non_finite(self, two_regime_generator) -> None:
        with pytest.raises(NonFiniteCoefficient):
            RegimeMarket.from_scalars(
                two_regime_generator, [0.05, np.nan], [0.15, 0.25], [0.25, 0.6], [0.0, 0.0], 1.0
            )

    @pytest.mark.parametrize("horizon", [0.0, -1.0, np.inf])
    def test_bad_horizon(self, two_regime_generator, horizon) -> None:
        with pytest.raises(NonFiniteCoefficient):
            RegimeMarket.from_scalars(
                two_regime_generator, [0.05, 0.01], [0.15, 0.25], [0.25, 0.6], [0.0, 0.0], horizon
            )

    def test_zero_volatility_rejected(self, two_regime_generator) -> None:
        """测试 σ = 0 时 Λ 不正定"""
        with pytest.raises(NotPositiveDefinite) as exc:
            RegimeMarket.from_scalars(
                two_regime_generator, [0.05, 0.01], [0.15, 0.25], [0.25, 0.0], [0.0, 0.0], 1.0
            )
        assert exc.value.regime == 1


class TestMarketPriceOfRisk:
    """市场风险价格测试"""

    def test_scalar_theta(self, two_regime_market) -> None:
        """测试 θ = (α − r)/σ = 0.4"""
        mpr = market_price_of_risk(two_regime_market)
        np.testing.assert_allclose(mpr.theta[:, 0], [0.4, 0.4], rtol=1e-14)
        np.testing.assert_allclose(mpr.squared_norms(), [0.16, 0.16], rtol=1e-14)

    def test_multi_asset(self) -> None:
        """测试多资产时 σθ = α − r·1"""
        sigma = np.array([[[0.2, 0.0], [0.1, 0.3]], [[0.4, 0.05], [0.0, 0.5]]])
        alpha = np.array([[0.1, 0.12], [0.08, 0.2]])
        r = np.array([0.03, 0.02])
        mkt = RegimeMarket(
            generator=validate_generator([[-1.0, 1.0], [1.0, -1.0]]),
            r=r,
            alpha=alpha,
            sigma=sigma,
            eta=np.zeros((2, 2, 1)),
            horizon=2.0,
        )
        theta = market_price_of_risk(mkt).theta
        for i in range(2):
            np.testing.assert_allclose(sigma[i] @ theta[i], alpha[i] - r[i], atol=1e-14)

    def test_index(self, two_regime_market) -> None:
        mpr = market_price_of_risk(two_regime_market)
        np.testing.assert_allclose(mpr[1], [0.4])
        with pytest.raises(RegimeIndexError):
            mpr[3]


class TestHelpers:
    """辅助函数测试"""

    def test_gram_matrix(self, two_regime_market) -> None:
        np.testing.assert_allclose(gram_matrix(two_regime_market, 1), [[0.36]])

    def test_solve_volatility_transpose(self) -> None:
        """测试求解 σᵀy = b"""
        sigma = np.array([[[0.2, 0.0], [0.1, 0.3]]])
        mkt = RegimeMarket(
            generator=validate_generator([[0.0]]),
            r=np.array([0.0]),
            alpha=np.array([[0.1, 0.1]]),
            sigma=sigma,
            eta=np.zeros((1, 2, 1)),
            horizon=1.0,
        )
        rhs = np.array([1.0, 2.0])
        y = solve_volatility(mkt, 0, rhs, transpose=True)
        np.testing.assert_allclose(sigma[0].T @ y, rhs, atol=1e-13)

    def test_good_economy(self, two_regime_market) -> None:
        """测试利率更高的体制为好经济"""
        assert good_economy(two_regime_market) == 0

    def test_good_economy_tie_breaks_on_volatility(self) -> None:
        """测试利率相同时取波动更小的体制"""
        mkt = RegimeMarket.from_scalars(
            validate_generator([[-1.0, 1.0], [1.0, -1.0]]),
            r=[0.03, 0.03],
            alpha=[0.1, 0.1],
            sigma=[0.5, 0.2],
            eta=[0.0, 0.0],
            horizon=1.0,
        )
        assert good_economy(mkt) == 1
