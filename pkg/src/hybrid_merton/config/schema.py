"""实验配置的数据结构、解析与序列化。

配置分为 market、utility、solver、simulation、output 五个块；
后三个块可以省略，缺省值见各块的字段默认值。
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import yaml

from hybrid_merton.core.errors import ConfigError, NotPositiveDefinite, ValidationError
from hybrid_merton.hjb_ode.utility import UtilitySpec
from hybrid_merton.market.generator import validate_generator
from hybrid_merton.market.market import RegimeMarket

Vector = tuple[float, ...]
Matrix = tuple[tuple[float, ...], ...]


# ============ 基本类型解析 ============
def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"应为数值，得到 {value!r}", field=where)
    return float(value)


def _integer(value: Any, where: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"应为整数，得到 {value!r}", field=where)
    if minimum is not None and value < minimum:
        raise ConfigError(f"应不小于 {minimum}，得到 {value}", field=where)
    return int(value)


def _vector(value: Any, where: str) -> Vector:
    if not isinstance(value, list):
        return (_number(value, where),)
    return tuple(_number(v, f"{where}[{k}]") for k, v in enumerate(value))


def _matrix(value: Any, where: str) -> Matrix:
    if not isinstance(value, list):
        return ((_number(value, where),),)
    if value and not isinstance(value[0], list):
        # 单行矩阵可写成向量
        return (_vector(value, where),)
    rows = tuple(_vector(row, f"{where}[{k}]") for k, row in enumerate(value))
    if len({len(row) for row in rows}) > 1:
        raise ConfigError("各行长度不一致", field=where)
    return rows


def _mapping(value: Any, where: str) -> dict[str, Any]:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"应为映射，得到 {type(value).__name__}", field=where)
    return value


def _reject_unknown(data: dict[str, Any], allowed: set[str], where: str) -> None:
    for key in data:
        if key not in allowed:
            prefix = f"{where}." if where else ""
            raise ConfigError("未知字段", field=f"{prefix}{key}")


def _listify(m: Matrix) -> list[list[float]]:
    return [list(row) for row in m]


# ============ 配置块 ============
@dataclass(frozen=True)
class RegimeBlock:
    """单个体制的市场系数。"""

    r: float
    alpha: Vector
    sigma: Matrix
    eta: Matrix

    @classmethod
    def from_dict(cls, data: Any, where: str) -> "RegimeBlock":
        data = _mapping(data, where)
        _reject_unknown(data, {"r", "alpha", "sigma", "eta"}, where)
        for key in ("r", "alpha", "sigma"):
            if key not in data:
                raise ConfigError("缺少必填字段", field=f"{where}.{key}")
        alpha = _vector(data["alpha"], f"{where}.alpha")
        if "eta" in data:
            eta = _matrix(data["eta"], f"{where}.eta")
        else:
            eta = tuple((0.0,) for _ in alpha)
        return cls(
            r=_number(data["r"], f"{where}.r"),
            alpha=alpha,
            sigma=_matrix(data["sigma"], f"{where}.sigma"),
            eta=eta,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "r": self.r,
            "alpha": list(self.alpha),
            "sigma": _listify(self.sigma),
            "eta": _listify(self.eta),
        }


@dataclass(frozen=True)
class MarketBlock:
    """市场块：期限、生成元与各体制系数。"""

    horizon: float
    generator: Matrix
    regimes: tuple[RegimeBlock, ...]

    @classmethod
    def from_dict(cls, data: Any) -> "MarketBlock":
        data = _mapping(data, "market")
        _reject_unknown(data, {"horizon", "generator", "regimes"}, "market")
        for key in ("generator", "regimes"):
            if key not in data:
                raise ConfigError("缺少必填字段", field=f"market.{key}")
        horizon = _number(data.get("horizon", 1.0), "market.horizon")
        if not horizon > 0.0:
            raise ConfigError(f"期限必须为正，得到 {horizon}", field="market.horizon")
        regimes = data["regimes"]
        if not isinstance(regimes, list) or not regimes:
            raise ConfigError("应为非空列表", field="market.regimes")
        return cls(
            horizon=horizon,
            generator=_matrix(data["generator"], "market.generator"),
            regimes=tuple(
                RegimeBlock.from_dict(item, f"market.regimes[{k}]")
                for k, item in enumerate(regimes)
            ),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "horizon": self.horizon,
            "generator": _listify(self.generator),
            "regimes": [regime.to_dict() for regime in self.regimes],
        }


@dataclass(frozen=True)
class UtilityBlock:
    kappa: float
    beta: float

    @classmethod
    def from_dict(cls, data: Any) -> "UtilityBlock":
        data = _mapping(data, "utility")
        _reject_unknown(data, {"kappa", "beta"}, "utility")
        for key in ("kappa", "beta"):
            if key not in data:
                raise ConfigError("缺少必填字段", field=f"utility.{key}")
        return cls(
            kappa=_number(data["kappa"], "utility.kappa"),
            beta=_number(data["beta"], "utility.beta"),
        )

    def to_dict(self) -> dict[str, Any]:
        return {"kappa": self.kappa, "beta": self.beta}


@dataclass(frozen=True)
class SolverBlock:
    steps: int = 2000

    @classmethod
    def from_dict(cls, data: Any) -> "SolverBlock":
        data = _mapping(data, "solver")
        _reject_unknown(data, {"steps"}, "solver")
        return cls(steps=_integer(data.get("steps", cls.steps), "solver.steps", minimum=10))

    def to_dict(self) -> dict[str, Any]:
        return {"steps": self.steps}


@dataclass(frozen=True)
class SimulationBlock:
    """蒙特卡洛参数。i0 从 1 计数。"""

    n_paths: int = 100_000
    steps: int = 1000
    alpha_nodes: int = 16
    seed: int = 20240101
    x0: float = 1.0
    i0: int = 1
    threads: Optional[int] = None

    @classmethod
    def from_dict(cls, data: Any) -> "SimulationBlock":
        data = _mapping(data, "simulation")
        _reject_unknown(
            data, {"n_paths", "steps", "alpha_nodes", "seed", "x0", "i0", "threads"}, "simulation"
        )
        x0 = _number(data.get("x0", cls.x0), "simulation.x0")
        if not x0 > 0.0:
            raise ConfigError(f"初始财富必须为正，得到 {x0}", field="simulation.x0")
        threads = data.get("threads")
        return cls(
            n_paths=_integer(data.get("n_paths", cls.n_paths), "simulation.n_paths", minimum=1),
            steps=_integer(data.get("steps", cls.steps), "simulation.steps", minimum=1),
            alpha_nodes=_integer(
                data.get("alpha_nodes", cls.alpha_nodes), "simulation.alpha_nodes", minimum=3
            ),
            seed=_integer(data.get("seed", cls.seed), "simulation.seed", minimum=0),
            x0=x0,
            i0=_integer(data.get("i0", cls.i0), "simulation.i0", minimum=1),
            threads=None if threads is None else _integer(threads, "simulation.threads", 1),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_paths": self.n_paths,
            "steps": self.steps,
            "alpha_nodes": self.alpha_nodes,
            "seed": self.seed,
            "x0": self.x0,
            "i0": self.i0,
            "threads": self.threads,
        }


@dataclass(frozen=True)
class OutputBlock:
    directory: str = "out"
    prefix: str = ""

    @classmethod
    def from_dict(cls, data: Any) -> "OutputBlock":
        data = _mapping(data, "output")
        _reject_unknown(data, {"directory", "prefix"}, "output")
        directory = data.get("directory", cls.directory)
        prefix = data.get("prefix", cls.prefix)
        if not isinstance(directory, str) or not directory:
            raise ConfigError("应为非空字符串", field="output.directory")
        if not isinstance(prefix, str):
            raise ConfigError("应为字符串", field="output.prefix")
        return cls(directory=directory, prefix=prefix)

    def to_dict(self) -> dict[str, Any]:
        return {"directory": self.directory, "prefix": self.prefix}


# ============ 实验配置 ============
@dataclass(frozen=True)
class ExperimentConfig:
    """一次实验的完整配置。

    Attributes:
        name: 配置名称
        description: 说明
        market: 市场块
        utility: 效用块
        solver: ODE 求解块
        simulation: 蒙特卡洛块
        output: 输出块
        source: 来源文件（不参与比较）
    """

    name: str
    description: str
    market: MarketBlock
    utility: UtilityBlock
    solver: SolverBlock = field(default_factory=SolverBlock)
    simulation: SimulationBlock = field(default_factory=SimulationBlock)
    output: OutputBlock = field(default_factory=OutputBlock)
    source: Optional[str] = field(default=None, compare=False)

    @classmethod
    def from_dict(
        cls, data: Any, source: Optional[str] = None, default_name: str = "unnamed"
    ) -> "ExperimentConfig":
        """由 YAML 解析出的字典构造配置。

        Raises:
            ConfigError: 字段缺失、类型错误或取值非法（附带字段路径）
        """
        try:
            data = _mapping(data, "")
            _reject_unknown(
                data,
                {"name", "description", "market", "utility", "solver", "simulation", "output"},
                "",
            )
            for key in ("market", "utility"):
                if key not in data:
                    raise ConfigError("缺少必填块", field=key)
            market = MarketBlock.from_dict(data["market"])
            simulation = SimulationBlock.from_dict(data.get("simulation"))
            if simulation.i0 > len(market.regimes):
                raise ConfigError(
                    f"初始体制 {simulation.i0} 超出体制数 {len(market.regimes)}",
                    field="simulation.i0",
                )
            return cls(
                name=str(data.get("name", default_name)),
                description=str(data.get("description", "")),
                market=market,
                utility=UtilityBlock.from_dict(data["utility"]),
                solver=SolverBlock.from_dict(data.get("solver")),
                simulation=simulation,
                output=OutputBlock.from_dict(data.get("output")),
                source=source,
            )
        except ConfigError as e:
            if e.path is None and source is not None:
                raise ConfigError(e.message, path=source, field=e.field, line=e.line) from e
            raise

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "description": self.description,
            "market": self.market.to_dict(),
            "utility": self.utility.to_dict(),
            "solver": self.solver.to_dict(),
            "simulation": self.simulation.to_dict(),
            "output": self.output.to_dict(),
        }

    def dump(self, path: Union[str, Path]) -> None:
        """写出可重新解析为相等配置的 YAML。"""
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(self.to_dict(), f, allow_unicode=True, sort_keys=False)

    @property
    def n_regimes(self) -> int:
        return len(self.market.regimes)

    @property
    def initial_regime(self) -> int:
        """内部（0 起计）初始体制。"""
        return self.simulation.i0 - 1

    def _fail(self, error: ValidationError, where: str) -> ConfigError:
        return ConfigError(str(error), path=self.source, field=where)

    def build_market(self) -> RegimeMarket:
        """构造并校验 RegimeMarket；领域校验错误带上对应字段。"""
        market = self.market
        try:
            gen = validate_generator(np.array(market.generator, dtype=np.float64))
        except ValidationError as e:
            raise self._fail(e, "market.generator") from e
        if gen.n_regimes != len(market.regimes):
            raise ConfigError(
                f"生成元为 {gen.n_regimes}×{gen.n_regimes}，但给出了 {len(market.regimes)} 个体制",
                path=self.source,
                field="market.regimes",
            )
        try:
            return RegimeMarket(
                generator=gen,
                r=np.array([reg.r for reg in market.regimes]),
                alpha=np.array([reg.alpha for reg in market.regimes]),
                sigma=np.array([reg.sigma for reg in market.regimes]),
                eta=np.array([reg.eta for reg in market.regimes]),
                horizon=market.horizon,
            )
        except NotPositiveDefinite as e:
            raise self._fail(e, f"market.regimes[{e.regime}].sigma") from e
        except (ValidationError, ValueError) as e:
            raise ConfigError(str(e), path=self.source, field="market.regimes") from e

    def build_utility(self) -> UtilitySpec:
        """构造并校验 UtilitySpec。"""
        try:
            return UtilitySpec(kappa=self.utility.kappa, beta=self.utility.beta)
        except ValidationError as e:
            raise self._fail(e, "utility") from e
