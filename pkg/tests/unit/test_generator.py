"""生成元单元测试"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hybrid_merton.core.errors import (
    DimensionMismatch,
    NegativeOffDiagonal,
    NonFiniteCoefficient,
    NonZeroRowSum,
    Reducible,
    RegimeIndexError,
    ValidationError,
)
from hybrid_merton.market import (
    check_regime,
    expected_occupation,
    stationary_distribution,
    transition_matrix,
    validate_generator,
)


@st.composite
def generators(draw):
    """非对角元全为正的 S×S 生成元（必然不可约）"""
    size = draw(st.integers(min_value=2, max_value=4))
    off = draw(
        arrays(np.float64, (size, size), elements=st.floats(min_value=0.1, max_value=5.0))
    )
    np.fill_diagonal(off, 0.0)
    np.fill_diagonal(off, -off.sum(axis=1))
    return off


class TestValidateGenerator:
    """生成元校验测试"""

    def test_two_regime_generator(self, two_regime_generator) -> None:
        """测试两体制生成元"""
        assert two_regime_generator.n_regimes == 2
        np.testing.assert_array_equal(two_regime_generator.lambdas, [1.2, 2.5])

    def test_single_regime(self) -> None:
        """测试单体制生成元 [[0]]"""
        gen = validate_generator([[0.0]])
        assert gen.n_regimes == 1
        assert gen.rate(0) == 0.0
        np.testing.assert_array_equal(gen.jump_probabilities(0), [0.0])

    def test_nonzero_row_sum(self) -> None:
        """测试行和不为零"""
        with pytest.raises(NonZeroRowSum) as exc:
            validate_generator([[-1.2, 1.2], [2.5, -2.4]])
        assert exc.value.row == 1

    def test_negative_off_diagonal(self) -> None:
        """测试负的非对角元"""
        with pytest.raises(NegativeOffDiagonal) as exc:
            validate_generator([[1.0, -1.0], [2.5, -2.5]])
        assert (exc.value.row, exc.value.col) == (0, 1)

    def test_reducible(self) -> None:
        """测试吸收态导致可约"""
        with pytest.raises(Reducible) as exc:
            validate_generator([[-1.0, 1.0], [0.0, 0.0]])
        assert exc.value.n_classes == 2

    def test_non_square(self) -> None:
        """测试非方阵"""
        with pytest.raises(DimensionMismatch):
            validate_generator([[-1.0, 1.0, 0.0], [1.0, -1.0, 0.0]])

    def test_non_finite(self) -> None:
        """测试非有限元素"""
        with pytest.raises(NonFiniteCoefficient):
            validate_generator([[-np.inf, np.inf], [1.0, -1.0]])

    def test_errors_are_validation_errors(self) -> None:
        """测试校验错误的退出码"""
        with pytest.raises(ValidationError) as exc:
            validate_generator([[-1.0, 2.0], [1.0, -1.0]])
        assert exc.value.exit_code == 1

    def test_q_is_read_only(self, two_regime_generator) -> None:
        """测试 q 不可修改"""
        with pytest.raises(ValueError):
            two_regime_generator.q[0, 0] = 0.0

    def test_jump_probabilities(self) -> None:
        """测试跳跃目标分布 q_ij / λ_i"""
        gen = validate_generator([[-3.0, 1.0, 2.0], [1.0, -1.0, 0.0], [0.5, 0.5, -1.0]])
        np.testing.assert_allclose(gen.jump_probabilities(0), [0.0, 1 / 3, 2 / 3])
        np.testing.assert_allclose(gen.jump_probabilities(1), [1.0, 0.0, 0.0])

    @given(generators())
    @settings(max_examples=50, deadline=None)
    def test_random_generators_validate(self, q) -> None:
        """测试随机生成元都能通过校验"""
        gen = validate_generator(q)
        assert gen.n_regimes == q.shape[0]
        assert np.all(gen.lambdas > 0.0)


class TestCheckRegime:
    """体制编号校验测试"""

    def test_valid(self) -> None:
        assert check_regime(1, 2) == 1
        assert check_regime(np.int64(0), 2) == 0

    @pytest.mark.parametrize("bad", [2, -1, 0.0, True, "1", None])
    def test_invalid(self, bad) -> None:
        """测试越界、非整数和布尔值"""
        with pytest.raises(RegimeIndexError):
            check_regime(bad, 2)

    def test_is_index_error(self) -> None:
        """测试同时是 IndexError"""
        with pytest.raises(IndexError):
            check_regime(5, 2)


class TestStationaryDistribution:
    """平稳分布测试"""

    def test_two_regimes(self, two_regime_generator) -> None:
        """测试 π = (λ_2, λ_1) / (λ_1 + λ_2)"""
        pi = stationary_distribution(two_regime_generator)
        np.testing.assert_allclose(pi, [2.5 / 3.7, 1.2 / 3.7], rtol=1e-12)

    def test_single_regime(self) -> None:
        np.testing.assert_allclose(stationary_distribution(validate_generator([[0.0]])), [1.0])

    @given(generators())
    @settings(max_examples=50, deadline=None)
    def test_balance(self, q) -> None:
        """测试 πQ = 0 且 Σπ = 1"""
        pi = stationary_distribution(validate_generator(q))
        assert pi.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(pi > 0.0)
        np.testing.assert_allclose(pi @ q, 0.0, atol=1e-10)


class TestTransitionMatrix:
    """转移矩阵测试"""

    def test_two_regime_closed_form(self, two_regime_generator) -> None:
        """测试 P_11(t) = π_1 + π_2 e^{−(λ_1+λ_2)t}"""
        p = transition_matrix(two_regime_generator, 0.3)
        expected = 2.5 / 3.7 + 1.2 / 3.7 * np.exp(-3.7 * 0.3)
        assert p[0, 0] == pytest.approx(expected, rel=1e-12)

    @given(generators(), st.floats(min_value=0.01, max_value=5.0))
    @settings(max_examples=30, deadline=None)
    def test_rows_sum_to_one(self, q, dt) -> None:
        p = transition_matrix(validate_generator(q), dt)
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-10)
        assert np.all(p >= -1e-12)


class TestExpectedOccupation:
    """期望占用比例测试"""

    def test_two_regime_closed_form(self, two_regime_generator) -> None:
        """测试 (1/T)∫P_11 = π_1 + π_2 (1 − e^{−3.7T}) / (3.7T)"""
        occ = expected_occupation(two_regime_generator, 0, 1.0)
        expected = 2.5 / 3.7 + 1.2 / 3.7 * (1.0 - np.exp(-3.7)) / 3.7
        assert occ[0] == pytest.approx(expected, rel=1e-10)
        assert occ.sum() == pytest.approx(1.0, abs=1e-12)

    def test_long_horizon_tends_to_stationary(self, two_regime_generator) -> None:
        occ = expected_occupation(two_regime_generator, 1, 1000.0)
        np.testing.assert_allclose(occ, stationary_distribution(two_regime_generator), atol=1e-3)

    def test_non_positive_horizon(self, two_regime_generator) -> None:
        with pytest.raises(ValueError):
            expected_occupation(two_regime_generator, 0, 0.0)
