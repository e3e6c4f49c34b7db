"""配置加载器。

提供实验配置的查找、解析、缓存与列举。
"""

import logging
import re
from pathlib import Path
from typing import Any, Optional

import yaml

from hybrid_merton.config.schema import ExperimentConfig
from hybrid_merton.core.errors import ConfigError

logger = logging.getLogger(__name__)

_FIELD_PART = re.compile(r"([^.\[\]]+)|\[(\d+)\]")


def _locate(node: Optional[yaml.Node], dotted: str) -> Optional[int]:
    """在 YAML 节点树中查找字段路径对应的行号（1 起计）。"""
    line = None
    for name, index in _FIELD_PART.findall(dotted):
        if node is None:
            break
        line = node.start_mark.line + 1
        if name and isinstance(node, yaml.MappingNode):
            node = next((v for k, v in node.value if getattr(k, "value", None) == name), None)
        elif index and isinstance(node, yaml.SequenceNode):
            k = int(index)
            node = node.value[k] if k < len(node.value) else None
        else:
            node = None
    if node is not None:
        line = node.start_mark.line + 1
    return line


class ConfigLoader:
    """配置加载器。

    按名称或路径加载 YAML 实验配置。
    """

    def __init__(self, config_paths: Optional[list[Path]] = None) -> None:
        """初始化配置加载器。

        Args:
            config_paths: 配置文件搜索路径列表
        """
        self._config_paths = config_paths or self._get_default_paths()
        self._cache: dict[str, ExperimentConfig] = {}

    def _get_default_paths(self) -> list[Path]:
        """获取默认配置搜索路径。

        Returns:
            路径列表
        """
        package = Path(__file__).parent.parent
        return [
            Path.cwd() / "configs",  # 当前目录 configs
            Path.home() / ".hybrid-merton" / "configs",  # 用户配置目录
            package / "configs",  # wheel 内置配置
            package.parent.parent / "configs",  # 源码树 configs
        ]

    def _find_config_file(self, name: str) -> Optional[Path]:
        """查找配置文件。

        Args:
            name: 配置名称或文件路径

        Returns:
            配置文件路径
        """
        # 支持直接路径
        path = Path(name)
        if path.is_file():
            return path

        for base_path in self._config_paths:
            for suffix in (".yaml", ".yml"):
                config_file = base_path / f"{name}{suffix}"
                if config_file.is_file():
                    return config_file

        return None

    def load(self, name: str) -> ExperimentConfig:
        """加载配置。

        Args:
            name: 配置名称或路径

        Returns:
            解析后的配置

        Raises:
            ConfigError: 未找到、YAML 语法错误或字段非法
        """
        if name in self._cache:
            return self._cache[name]

        config_file = self._find_config_file(name)
        if config_file is None:
            raise ConfigError(f"配置 '{name}' 未找到")

        config = self.load_file(config_file)
        self._cache[name] = config
        return config

    def load_file(self, path: Path) -> ExperimentConfig:
        """从文件加载配置。

        Args:
            path: 配置文件路径

        Returns:
            解析后的配置
        """
        source = str(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"无法读取: {e}", path=source) from e

        try:
            node = yaml.compose(text)
            data: Any = yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            line = mark.line + 1 if mark is not None else None
            raise ConfigError(f"YAML 语法错误: {e}", path=source, line=line) from e

        try:
            config = ExperimentConfig.from_dict(data, source=source, default_name=path.stem)
        except ConfigError as e:
            if e.line is None and e.field:
                raise ConfigError(
                    e.message, path=source, field=e.field, line=_locate(node, e.field)
                ) from e
            raise
        logger.debug("已加载配置 %s (%s)", config.name, source)
        return config

    def list_available(self) -> list[tuple[str, str]]:
        """列出所有可用配置。

        Returns:
            (名称, 说明) 列表，按名称排序
        """
        found: dict[str, str] = {}
        for base_path in self._config_paths:
            if not base_path.is_dir():
                continue
            for f in sorted(base_path.glob("*.y*ml")):
                if f.stem in found:
                    continue
                try:
                    found[f.stem] = self.load_file(f).description
                except ConfigError as e:
                    found[f.stem] = f"（无效: {e.message}）"
        return sorted(found.items())

    def clear_cache(self) -> None:
        """清除缓存。"""
        self._cache.clear()


# 全局加载器实例
config_loader = ConfigLoader()
