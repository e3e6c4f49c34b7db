"""命令行接口。

提供 hybrid-merton 的 CLI 命令。
"""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import Optional

import numpy as np
from rich.console import Console

from hybrid_merton import __version__
from hybrid_merton.cli import suite  # noqa: F401  注册内置检查
from hybrid_merton.cli.checks import CheckRegistry, CheckResult
from hybrid_merton.cli.output import solution_table, verify_table, write_csv, write_json
from hybrid_merton.config import ExperimentConfig, config_loader
from hybrid_merton.core.errors import ConfigError, HybridMertonError, VerificationFailed
from hybrid_merton.core.logging import configure_logging
from hybrid_merton.hjb_ode.solver import compute_rho
from hybrid_merton.hybridsim.wealth import simulate_wealth
from hybrid_merton.policy.policy_map import (
    PolicyMap,
    build_policy_map,
    certainty_equivalent,
    optimal_portfolio,
    value,
)

logger = logging.getLogger(__name__)


def create_parser() -> argparse.ArgumentParser:
    """创建参数解析器。

    Returns:
        解析器实例
    """
    parser = argparse.ArgumentParser(
        prog="hybrid-merton",
        description="带马尔可夫切换的不确定随机最优消费与投资组合求解器",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
示例:
  hybrid-merton solve --config figure1          # 求解 A_i(t)，写出 solution.csv
  hybrid-merton figures --config figure2        # 写出消费财富比与投资比例
  hybrid-merton simulate --config figure1_eta   # 蒙特卡洛估计目标值
  hybrid-merton verify --config figure1 -v      # 运行完整验证套件
  hybrid-merton list-configs                    # 列出可用配置
        """,
    )

    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {__version__}",
    )

    # 子命令共用参数
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-c",
        "--config",
        dest="config",
        required=True,
        help="配置名称或 YAML 文件路径",
    )
    common.add_argument(
        "-o",
        "--out",
        dest="out",
        default=None,
        help="输出目录 (默认: 配置 output.directory)",
    )
    common.add_argument(
        "--seed",
        dest="seed",
        type=int,
        default=None,
        help="随机种子 (默认: 配置 simulation.seed)",
    )
    common.add_argument(
        "--threads",
        dest="threads",
        type=int,
        default=None,
        help="蒙特卡洛工作线程数 (默认: 物理核数)",
    )
    common.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="输出日志（-v 信息，-vv 调试）",
    )

    subparsers = parser.add_subparsers(dest="command", help="子命令")

    subparsers.add_parser(
        "solve",
        parents=[common],
        help="求解体制系数 A_i(t)",
        description="后向积分 ODE 系统，写出 solution.csv 与 rho.csv",
    )
    subparsers.add_parser(
        "figures",
        parents=[common],
        help="输出消费财富比与投资比例",
        description="写出 consumption_ratio.csv 与 portfolio.csv",
    )
    subparsers.add_parser(
        "simulate",
        parents=[common],
        help="模拟最优策略下的目标值",
        description="闭环模拟财富方程，写出 simulation.json",
    )
    subparsers.add_parser(
        "verify",
        parents=[common],
        help="运行验证套件",
        description="运行全部验证检查，写出 verify.json；全部通过时退出码为 0",
    )

    list_parser = subparsers.add_parser(
        "list-configs",
        help="列出可用配置",
        description="列出搜索路径中的所有配置文件",
    )
    list_parser.add_argument("-v", "--verbose", action="count", default=0, help="输出日志")

    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """加载配置并应用命令行覆盖。

    Args:
        args: 解析后的命令行参数

    Returns:
        覆盖后的配置
    """
    config = config_loader.load(args.config)
    simulation = config.simulation
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError(f"种子必须非负，得到 {args.seed}", field="--seed")
        simulation = dataclasses.replace(simulation, seed=args.seed)
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError(f"线程数必须为正，得到 {args.threads}", field="--threads")
        simulation = dataclasses.replace(simulation, threads=args.threads)
    output = config.output
    if args.out is not None:
        output = dataclasses.replace(output, directory=args.out)
    return dataclasses.replace(config, simulation=simulation, output=output)


def _output_path(config: ExperimentConfig, name: str) -> Path:
    return Path(config.output.directory) / f"{config.output.prefix}{name}"


def _portfolios(pm: PolicyMap) -> np.ndarray:
    return np.stack([optimal_portfolio(pm, 0.0, i) for i in range(pm.mkt.n_regimes)])


def cmd_solve(config: ExperimentConfig, console: Console) -> int:
    """处理 solve 子命令。

    写出 solution.csv（t, A_1…A_S）与 rho.csv（regime, rho）。

    Args:
        config: 实验配置
        console: 输出终端

    Returns:
        退出码
    """
    mkt = config.build_market()
    util = config.build_utility()
    pm = build_policy_map(mkt, util, config.solver.steps)
    grid = pm.grid
    rho = compute_rho(mkt, util)

    size = mkt.n_regimes
    header = ["t"] + [f"A_{i + 1}" for i in range(size)]
    path = write_csv(
        _output_path(config, "solution.csv"), header, np.column_stack([grid.times, grid.values])
    )
    rho_path = write_csv(
        _output_path(config, "rho.csv"),
        ["regime", "rho"],
        np.column_stack([np.arange(1, size + 1), rho.rho]),
    )

    console.print(solution_table(rho.rho.tolist(), grid.values[0].tolist(), _portfolios(pm)))
    console.print(f"已写出 {path} 与 {rho_path}")
    return 0


def cmd_figures(config: ExperimentConfig, console: Console) -> int:
    """处理 figures 子命令。

    consumption_ratio.csv：t, c_over_w_1…c_over_w_S，其中 c/w = 1/A_i(t)；
    portfolio.csv：regime, pi_1…pi_m。
    """
    mkt = config.build_market()
    pm = build_policy_map(mkt, config.build_utility(), config.solver.steps)
    grid = pm.grid

    size = mkt.n_regimes
    header = ["t"] + [f"c_over_w_{i + 1}" for i in range(size)]
    ratio_path = write_csv(
        _output_path(config, "consumption_ratio.csv"),
        header,
        np.column_stack([grid.times, 1.0 / grid.values]),
    )
    portfolio = _portfolios(pm)
    portfolio_path = write_csv(
        _output_path(config, "portfolio.csv"),
        ["regime"] + [f"pi_{k + 1}" for k in range(mkt.n_assets)],
        np.column_stack([np.arange(1, size + 1), portfolio]),
    )
    console.print(f"已写出 {ratio_path} 与 {portfolio_path}")
    return 0


def cmd_simulate(config: ExperimentConfig, console: Console) -> int:
    """处理 simulate 子命令。

    η ≠ 0 时闭式 V 是否仍为目标值尚无定论，z 值只作记录。
    """
    mkt = config.build_market()
    pm = build_policy_map(mkt, config.build_utility(), config.solver.steps)
    sim = config.simulation
    i0 = config.initial_regime

    estimate = simulate_wealth(
        pm,
        sim.x0,
        i0,
        sim.n_paths,
        sim.alpha_nodes,
        sim.steps,
        sim.seed,
        threads=sim.threads,
    )
    closed = value(pm, 0.0, sim.x0, i0)
    z = estimate.z_score(closed)
    exploratory = mkt.has_uncertain_volatility
    if exploratory:
        logger.warning("η ≠ 0：模拟值与闭式 V 的偏差 z = %.2f 仅作记录", z)

    payload = {
        "config": config.name,
        "estimate": estimate.mean,
        "std_error": estimate.std_error,
        "n_random_paths": estimate.n_random_paths,
        "n_alpha_nodes": estimate.n_alpha_nodes,
        "rejected_paths": estimate.rejected,
        "closed_form_value": closed,
        "z_score": z,
        "certainty_equivalent": certainty_equivalent(pm, 0.0, sim.x0, i0),
        "exploratory": exploratory,
        "x0": sim.x0,
        "i0": sim.i0,
        "steps": sim.steps,
        "seed": sim.seed,
    }
    path = write_json(_output_path(config, "simulation.json"), payload)
    console.print(
        f"J ≈ {estimate.mean:.8g} ± {estimate.std_error:.2g}，闭式 V = {closed:.8g}，z = {z:.2f}"
    )
    console.print(f"已写出 {path}")
    return 0


def cmd_verify(config: ExperimentConfig, console: Console) -> int:
    """处理 verify 子命令。

    Raises:
        VerificationFailed: 至少一项检查未通过（verify.json 已写出）
    """
    results: list[CheckResult] = CheckRegistry.run(suite.VerifyContext(config))
    path = write_json(
        _output_path(config, "verify.json"), [result.to_dict() for result in results]
    )
    console.print(verify_table(results))
    console.print(f"已写出 {path}")

    failed = [result.check for result in results if not result.passed]
    if failed:
        raise VerificationFailed(failed)
    return 0


def cmd_list_configs(console: Console) -> int:
    """列出所有配置。"""
    available = config_loader.list_available()
    console.print("可用配置:")
    console.print("-" * 40)
    for name, desc in available:
        console.print(f"  {name:15} - {desc}", markup=False)
    console.print()
    console.print(f"总计: {len(available)} 个配置")
    return 0


def main(args: Optional[list[str]] = None) -> int:
    """主入口函数。

    Args:
        args: 命令行参数

    Returns:
        退出码
    """
    parser = create_parser()
    parsed_args = parser.parse_args(args)
    configure_logging(getattr(parsed_args, "verbose", 0))
    console = Console()

    if parsed_args.command is None:
        parser.print_help()
        return 0

    try:
        if parsed_args.command == "list-configs":
            return cmd_list_configs(console)

        config = load_config(parsed_args)
        if parsed_args.command == "solve":
            return cmd_solve(config, console)
        elif parsed_args.command == "figures":
            return cmd_figures(config, console)
        elif parsed_args.command == "simulate":
            return cmd_simulate(config, console)
        elif parsed_args.command == "verify":
            return cmd_verify(config, console)
        parser.print_help()
        return 1

    except KeyboardInterrupt:
        print("\n取消")
        return 130
    except HybridMertonError as e:
        print(f"错误: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"错误: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
