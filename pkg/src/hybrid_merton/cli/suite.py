"""内置验证套件。

每项检查接收 VerifyContext，返回 CheckResult；检查按注册顺序执行。
蒙特卡洛检查的规模取自配置的 simulation 块。
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from scipy.stats import chisquare

from hybrid_merton.cli.checks import CheckRegistry, CheckResult, CheckStatus
from hybrid_merton.config.schema import ExperimentConfig
from hybrid_merton.hjb_ode.solver import self_consistency_residual
from hybrid_merton.hjb_ode.utility import UtilitySpec
from hybrid_merton.hybridsim.expectation import chance_expectation
from hybrid_merton.hybridsim.parallel import block_rng
from hybrid_merton.hybridsim.regimes import regime_statistics, sample_regime_paths
from hybrid_merton.hybridsim.sde import HybridPathBundle, HybridSDE
from hybrid_merton.hybridsim.variation import variation_table_check
from hybrid_merton.hybridsim.wealth import simulate_wealth
from hybrid_merton.market.generator import expected_occupation
from hybrid_merton.market.market import RegimeMarket, good_economy
from hybrid_merton.policy.hjb_check import ARGMAX_SLACK, hamiltonian_excess, hjb_residual
from hybrid_merton.policy.policy_map import PolicyMap, build_policy_map, value

logger = logging.getLogger(__name__)

HJB_TOLERANCE = 1e-5
ODE_TOLERANCE = 1e-6
SHAPE_TOLERANCE = 1e-12
N_SIGMA = 3.0
CHI_SQUARE_LEVEL = 0.01
ARGMAX_TRIALS = 10_000
VARIATION_PATH_CAP = 1000

# HJB 残差的采样点，刻意避开均匀网格节点
HJB_T_FRACTIONS = np.linspace(0.013, 0.987, 50)
HJB_WEALTH = np.geomspace(0.1, 10.0, 20)

# argmax 检查的 (t/T, x) 采样点
ARGMAX_FRACTIONS = np.linspace(0.05, 0.95, 5)
ARGMAX_WEALTH = (0.5, 1.0, 2.0, 4.0)


@dataclass
class VerifyContext:
    """验证所需的已求解对象。

    构造时立即建立市场、效用与 PolicyMap，配置或求解错误在任何检查之前抛出。
    """

    config: ExperimentConfig

    def __post_init__(self) -> None:
        _ = self.policy_map

    @cached_property
    def market(self) -> RegimeMarket:
        return self.config.build_market()

    @cached_property
    def utility(self) -> UtilitySpec:
        return self.config.build_utility()

    @cached_property
    def policy_map(self) -> PolicyMap:
        return build_policy_map(self.market, self.utility, self.config.solver.steps)

    @property
    def threads(self) -> Optional[int]:
        return self.config.simulation.threads


def _max_abs(values: NDArray[np.float64]) -> float:
    return float(np.max(np.abs(values))) if values.size else 0.0


@CheckRegistry.check("generator", "生成元行和为零、非对角非负、不可约")
def check_generator(ctx: VerifyContext) -> CheckResult:
    q = ctx.market.generator.q
    scale = max(1.0, float(np.max(np.abs(q))))
    return CheckResult.compare(
        "generator",
        _max_abs(q.sum(axis=1)),
        1e-12 * scale,
        n_regimes=ctx.market.n_regimes,
        lambdas=ctx.market.lambdas.tolist(),
    )


@CheckRegistry.check("market_price_of_risk", "σ_i θ_i = α_i − r_i 1")
def check_market_price_of_risk(ctx: VerifyContext) -> CheckResult:
    mkt = ctx.market
    theta = ctx.policy_map.theta.theta
    mismatch = np.einsum("sij,sj->si", mkt.sigma, theta) - (mkt.alpha - mkt.r[:, None])
    return CheckResult.compare(
        "market_price_of_risk", _max_abs(mismatch), 1e-12, theta=theta.tolist()
    )


@CheckRegistry.check("terminal_condition", "A_i(T) = 1")
def check_terminal_condition(ctx: VerifyContext) -> CheckResult:
    terminal = ctx.policy_map.grid.values[-1]
    return CheckResult.compare("terminal_condition", _max_abs(terminal - 1.0), 0.0)


@CheckRegistry.check("ode_consistency", "解网格代回未归一化方程的中心差分残差")
def check_ode_consistency(ctx: VerifyContext) -> CheckResult:
    residual = self_consistency_residual(ctx.policy_map.grid, ctx.market, ctx.utility)
    return CheckResult.compare(
        "ode_consistency", residual, ODE_TOLERANCE, steps=ctx.config.solver.steps
    )


@CheckRegistry.check("hjb_residual", "闭式价值函数代入 HJB 方程的相对残差")
def check_hjb_residual(ctx: VerifyContext) -> CheckResult:
    report = hjb_residual(ctx.policy_map, HJB_T_FRACTIONS * ctx.market.horizon, HJB_WEALTH)
    return CheckResult.compare(
        "hjb_residual",
        report.max_rel_residual,
        HJB_TOLERANCE,
        grid=[HJB_T_FRACTIONS.size, HJB_WEALTH.size, ctx.market.n_regimes],
        **report.to_dict(),
    )


@CheckRegistry.check("hamiltonian_argmax", "随机 (π, c) 不优于 (π̂, ĉ)")
def check_hamiltonian_argmax(ctx: VerifyContext) -> CheckResult:
    pm = ctx.policy_map
    size = ctx.market.n_regimes
    worst = -np.inf
    points = 0
    # 体制沿 t 与 x 两个方向轮换
    for a, frac in enumerate(ARGMAX_FRACTIONS):
        for b, x in enumerate(ARGMAX_WEALTH):
            i = (a + b) % size
            excess = hamiltonian_excess(
                pm, float(frac) * pm.horizon, x, i, ARGMAX_TRIALS, seed=100 * a + b
            )
            worst = max(worst, excess)
            points += 1
    return CheckResult.compare(
        "hamiltonian_argmax",
        worst,
        ARGMAX_SLACK,
        points=points,
        trials=ARGMAX_TRIALS,
    )


@CheckRegistry.check("figure_shape", "消费财富比的单调性与体制排序")
def check_figure_shape(ctx: VerifyContext) -> CheckResult:
    """κ > 1：c/w 随 t 不减，好经济曲线居上；κ < 1：不增，好经济曲线居下。"""
    ratio = 1.0 / ctx.policy_map.grid.values
    direction = 1.0 if ctx.utility.kappa > 1.0 else -1.0
    monotone = float(np.max(np.clip(-direction * np.diff(ratio, axis=0), 0.0, None)))
    good = good_economy(ctx.market)
    gap = direction * (ratio[:, good][:, None] - ratio)
    ordering = float(np.max(np.clip(-gap, 0.0, None)))
    return CheckResult.compare(
        "figure_shape",
        max(monotone, ordering),
        SHAPE_TOLERANCE,
        good_economy=good + 1,
        expected="nondecreasing, good on top" if direction > 0 else "nonincreasing, good below",
        monotone_violation=monotone,
        ordering_violation=ordering,
    )


def _null_sde(mkt: RegimeMarket) -> HybridSDE:
    def zero_drift(t: NDArray, x: NDArray, i: NDArray) -> NDArray:
        return np.zeros_like(x)

    def zero_brownian(t: NDArray, x: NDArray, i: NDArray) -> NDArray:
        return np.zeros(x.shape + (mkt.n_assets,))

    def zero_canonical(t: NDArray, x: NDArray, i: NDArray) -> NDArray:
        return np.zeros(x.shape + (mkt.n_canonical,))

    return HybridSDE(
        drift=zero_drift,
        brownian_coeff=zero_brownian,
        canonical_coeff=zero_canonical,
        x0=np.zeros(1),
        n_brownian=mkt.n_assets,
        n_canonical=mkt.n_canonical,
    )


def _null_functional(bundle: HybridPathBundle) -> NDArray[np.float64]:
    """C_T^α + B_T^1。"""
    return np.asarray(
        bundle.canonical_terminal()[None, :] + bundle.brownian_terminal[:, :1], dtype=np.float64
    )


@CheckRegistry.check("chance_null", "E[C_T + B_T] = 0")
def check_chance_null(ctx: VerifyContext) -> CheckResult:
    sim = ctx.config.simulation
    estimate = chance_expectation(
        _null_functional,
        _null_sde(ctx.market),
        ctx.market.generator,
        sim.n_paths,
        sim.alpha_nodes,
        sim.seed,
        i0=ctx.config.initial_regime,
        horizon=ctx.market.horizon,
        steps=sim.steps,
        threads=ctx.threads,
    )
    return CheckResult.compare(
        "chance_null", abs(estimate.z_score(0.0)), N_SIGMA, **estimate.to_dict()
    )


@CheckRegistry.check("variation_table", "Itô-Liu 乘法表的经验验证")
def check_variation_table(ctx: VerifyContext) -> CheckResult:
    sim = ctx.config.simulation
    report = variation_table_check(
        grid_steps=max(sim.steps, 100),
        n_paths=min(sim.n_paths, VARIATION_PATH_CAP),
        rng_seed=sim.seed,
        threads=ctx.threads,
    )
    passed = report.passed()
    return CheckResult(
        check="variation_table",
        passed=passed,
        metric=abs(report.canonical_slope + 1.0),
        tolerance=0.1,
        status=CheckStatus.PASS if passed else CheckStatus.FAIL,
        details=report.to_dict(),
    )


@CheckRegistry.check("ctmc_statistics", "体制路径的停留时间、占用比例与跳跃目标")
def check_ctmc_statistics(ctx: VerifyContext) -> CheckResult:
    sim = ctx.config.simulation
    gen = ctx.market.generator
    horizon = ctx.market.horizon
    batch = sample_regime_paths(
        gen, ctx.config.initial_regime, horizon, sim.n_paths, block_rng(sim.seed, 0)
    )
    stats = regime_statistics(batch, gen.n_regimes)

    z_scores = []
    holding = stats.mean_holding()
    holding_err = stats.mean_holding_stderr()
    for i in range(gen.n_regimes):
        if stats.exits[i] > 0 and gen.rate(i) > 0.0:
            z_scores.append((holding[i] - 1.0 / gen.rate(i)) / holding_err[i])

    occupation, occupation_err = stats.occupation_fraction()
    expected = expected_occupation(gen, ctx.config.initial_regime, horizon)
    for i in range(gen.n_regimes):
        if occupation_err[i] > 0.0:
            z_scores.append((occupation[i] - expected[i]) / occupation_err[i])

    p_values = []
    for i in range(gen.n_regimes):
        targets = gen.jump_probabilities(i) > 0.0
        observed = stats.destinations[i, targets]
        if targets.sum() >= 2 and observed.sum() > 0:
            probs = gen.jump_probabilities(i)[targets]
            p_values.append(float(chisquare(observed, probs * observed.sum()).pvalue))

    metric = float(np.max(np.abs(z_scores))) if z_scores else 0.0
    passed = metric <= N_SIGMA and all(p >= CHI_SQUARE_LEVEL for p in p_values)
    return CheckResult(
        check="ctmc_statistics",
        passed=passed,
        metric=metric,
        tolerance=N_SIGMA,
        status=CheckStatus.PASS if passed else CheckStatus.FAIL,
        details={
            "mean_holding": holding.tolist(),
            "expected_holding": (1.0 / gen.lambdas).tolist(),
            "occupation": occupation.tolist(),
            "expected_occupation": expected.tolist(),
            "chi_square_p_values": p_values,
        },
    )


@CheckRegistry.check("monte_carlo_value", "最优策略下模拟目标值与闭式 V 比较")
def check_monte_carlo_value(ctx: VerifyContext) -> CheckResult:
    sim = ctx.config.simulation
    pm = ctx.policy_map
    i0 = ctx.config.initial_regime
    estimate = simulate_wealth(
        pm,
        sim.x0,
        i0,
        sim.n_paths,
        sim.alpha_nodes,
        sim.steps,
        sim.seed,
        threads=ctx.threads,
    )
    closed = value(pm, 0.0, sim.x0, i0)
    z = abs(estimate.z_score(closed))
    details = {**estimate.to_dict(), "closed_form": closed}
    if ctx.market.has_uncertain_volatility:
        logger.warning("η ≠ 0：闭式 V 仅作参考，z = %.2f 不参与判定", z)
        return CheckResult(
            check="monte_carlo_value",
            passed=True,
            metric=z,
            tolerance=N_SIGMA,
            status=CheckStatus.EXPLORATORY,
            details=details,
        )
    return CheckResult.compare("monte_carlo_value", z, N_SIGMA, **details)
