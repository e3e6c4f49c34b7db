"""HJB 方程残差与 Hamiltonian 最大化检查。"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from hybrid_merton.core.errors import NonFinite, NonPositiveWealth, OutOfRange
from hybrid_merton.market.generator import check_regime
from hybrid_merton.market.market import gram_matrix
from hybrid_merton.policy.policy_map import (
    PolicyMap,
    optimal_consumption,
    optimal_portfolio,
    value_derivatives,
)

logger = logging.getLogger(__name__)

ARGMAX_SLACK = 1e-9


@dataclass(frozen=True)
class HjbResidualReport:
    """HJB 残差报告。

    Attributes:
        max_abs_residual: 最大绝对残差
        max_rel_residual: 最大相对残差 |残差| / |V|
        worst_point: 相对残差最大处的 (t, x, i)
    """

    max_abs_residual: float
    max_rel_residual: float
    worst_point: tuple[float, float, int]

    def to_dict(self) -> dict:
        """转换为字典格式。"""
        t, x, i = self.worst_point
        return {
            "max_abs_residual": self.max_abs_residual,
            "max_rel_residual": self.max_rel_residual,
            "worst_point": {"t": t, "x": x, "regime": i + 1},
        }


def hjb_residual(pm: PolicyMap, t_grid: ArrayLike, x_grid: ArrayLike) -> HjbResidualReport:
    """在 (t, x, i) 网格上计算 HJB 方程残差。

    V_t − βV + r_i x V_x + (κ/(1−κ)) V_x^{(κ−1)/κ} − |θ_i|² V_x²/(2V_xx)
    − λ_i V + Σ_{j≠i} q_ij V(t,x,j)

    V_t 由网格中存储的 ODE 导数（Hermite 插值导数）给出，V_x、V_xx 解析计算。

    Raises:
        OutOfRange: t 不在 (0, T) 内部
        NonPositiveWealth: x ≤ 0
    """
    ts = np.asarray(t_grid, dtype=np.float64).reshape(-1)
    xs = np.asarray(x_grid, dtype=np.float64).reshape(-1)
    horizon = pm.horizon
    outside = (ts <= 0.0) | (ts >= horizon)
    if np.any(outside):
        raise OutOfRange(float(ts[outside][0]), horizon)
    if np.any(xs <= 0.0):
        raise NonPositiveWealth(float(xs[xs <= 0.0][0]))

    size = pm.mkt.n_regimes
    kappa = pm.util.kappa
    beta = pm.util.beta
    q = pm.mkt.generator.q
    theta_sq = pm.theta.squared_norms()

    tt, xx = np.meshgrid(ts, xs, indexing="ij")
    per_regime = [pm.derivatives(tt, xx, np.full(tt.shape, i)) for i in range(size)]

    best_abs = 0.0
    best_rel = -1.0
    worst = (float(ts[0]), float(xs[0]), 0)
    for i, d in enumerate(per_regime):
        coupling = sum(q[i, j] * per_regime[j].v for j in range(size) if j != i)
        residual = (
            d.v_t
            - beta * d.v
            + pm.mkt.r[i] * xx * d.v_x
            + kappa / (1.0 - kappa) * np.power(d.v_x, (kappa - 1.0) / kappa)
            - theta_sq[i] * d.v_x**2 / (2.0 * d.v_xx)
            - (-q[i, i]) * d.v
            + coupling
        )
        abs_res = np.abs(residual)
        rel_res = abs_res / np.abs(d.v)
        if not (np.all(np.isfinite(abs_res)) and np.all(np.isfinite(rel_res))):
            raise NonFinite(float(ts[0]))
        best_abs = max(best_abs, float(abs_res.max()))
        k = int(np.argmax(rel_res))
        if rel_res.flat[k] > best_rel:
            best_rel = float(rel_res.flat[k])
            worst = (float(tt.flat[k]), float(xx.flat[k]), i)

    logger.debug("HJB 残差: abs=%.3e, rel=%.3e, 最差点=%s", best_abs, best_rel, worst)
    return HjbResidualReport(
        max_abs_residual=best_abs, max_rel_residual=best_rel, worst_point=worst
    )


def hamiltonian(
    pm: PolicyMap, t: float, x: float, i: int, pi: ArrayLike, c: ArrayLike
) -> NDArray[np.float64]:
    """HJB 方程中取上确界的表达式 𝕃_i(π,c)V + U(c)，对 (π, c) 样本向量化。

    Args:
        pi: 形状 (..., m) 的投资比例
        c: 形状 (...) 的消费率（> 0）
    """
    i = check_regime(i, pm.mkt.n_regimes)
    d = value_derivatives(pm, t, x, i)
    pis = np.asarray(pi, dtype=np.float64)
    cs = np.asarray(c, dtype=np.float64)
    lam = gram_matrix(pm.mkt, i)
    sigma_theta = pm.mkt.sigma[i] @ pm.theta[i]
    quad = np.einsum("...k,kl,...l->...", pis, lam, pis)
    lin = pis @ sigma_theta
    return np.asarray(
        0.5 * x**2 * quad * d.v_xx
        + x * lin * d.v_x
        + pm.mkt.r[i] * x * d.v_x
        - cs * d.v_x
        - pm.util.beta * d.v
        + d.v_t
        + pm.util.utility(cs),
        dtype=np.float64,
    )


def hamiltonian_excess(
    pm: PolicyMap, t: float, x: float, i: int, trials: int, seed: Optional[int] = 0
) -> float:
    """随机扰动 (π, c) 后，样本值超出候选最优值的最大量。

    扰动：c = ĉ·exp(N(0, 0.5²))，π = π̂ + N(0, s²)，s = max(|π̂|∞, 0.1)。
    与候选值相同的常数项 (r x V_x − βV + V_t) 在差值中抵消，不参与计算。
    """
    if x <= 0.0:
        raise NonPositiveWealth(x)
    i = check_regime(i, pm.mkt.n_regimes)
    rng = np.random.default_rng(seed)
    d = value_derivatives(pm, t, x, i)
    c_hat = optimal_consumption(pm, t, x, i)
    pi_hat = optimal_portfolio(pm, t, i)
    scale = max(float(np.max(np.abs(pi_hat))), 0.1)

    cs = c_hat * np.exp(0.5 * rng.standard_normal(trials))
    pis = pi_hat + scale * rng.standard_normal((trials, pi_hat.size))

    lam = gram_matrix(pm.mkt, i)
    sigma_theta = pm.mkt.sigma[i] @ pm.theta[i]
    dpi = pis - pi_hat
    quad = np.einsum("nk,kl,nl->n", pis, lam, pis) - pi_hat @ lam @ pi_hat
    delta_pi = 0.5 * x**2 * d.v_xx * quad + x * d.v_x * (dpi @ sigma_theta)
    util = pm.util
    delta_c = (util.utility(cs) - util.utility(c_hat)) - (cs - c_hat) * d.v_x
    return float(np.max(delta_pi + delta_c))


def hamiltonian_argmax_check(
    pm: PolicyMap, t: float, x: float, i: int, trials: int, seed: Optional[int] = 0
) -> bool:
    """候选 (ĉ, π̂) 是否不低于所有随机样本（允许 1e-9 的绝对松弛）。"""
    excess = hamiltonian_excess(pm, t, x, i, trials, seed)
    logger.debug("Hamiltonian 检查 (t=%g, x=%g, i=%d): 最大超出 %.3e", t, x, i, excess)
    return excess <= ARGMAX_SLACK
