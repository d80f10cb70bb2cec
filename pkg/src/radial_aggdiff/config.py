"""
配置管理模块

定义运行配置类 RunConfig 以及 YAML/JSON 配置文件的读写与校验。
"""

# 模块导入区
import json
import logging
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import yaml

from .density import uniform_grid
from .exceptions import ConfigError, ParameterError
from .models import ModelParams

OUTPUT_ENV = "RADIAL_AGGDIFF_OUTPUT"
MIN_CELLS = 16

# 配置文件中的分节与字段对应关系
SECTIONS = {
    'model': ('N', 'k', 'm', 'chi', 'M'),
    'grid': ('J', 'r_max'),
    'solver': ('max_iter', 'damping', 'extrapolate'),
    'simulation': ('t_max', 'stall_tol', 'cfl', 'potential_refresh', 'snapshot_every'),
    'scan': ('resolution',),
    'fuzz': ('trials', 'pushforward_samples'),
}
TOP_LEVEL = ('seed', 'output_dir', 'workers', 'log_level')


def default_tolerances() -> Dict[str, float]:
    """各项检验的默认阈值"""
    return {
        'steady': 1e-10,            # 稳态迭代的 L¹ 变化
        'characterization': 1e-5,   # 积分刻画残差（J/2J 外推后）
        'virial': 1e-5,
        'energy_identity': 1e-6,    # 直接能量与稳态能量闭式的相对差
        'el_variance': 1e-10,
        'fuzz_relative': 1e-6,
        'fuzz_absolute': 1e-8,
        'pushforward': 1e-5,
        'jensen': 1e-10,
        'scan': 1e-9,
        'identity': 1e-9,
        'derivative': 1e-6,
        'kernel': 1e-8,
        'mass': 1e-10,
        'evolve_distance': 1e-3,
    }


def default_output_dir() -> str:
    return os.environ.get(OUTPUT_ENV, "output")


@dataclass
class RunConfig:
    """运行配置类"""

    # 模型参数（m 为 None 时取 m_c）
    N: int = 3
    k: float = -1.5
    m: Optional[float] = None
    chi: int = 1
    M: float = 0.1

    # 径向网格
    J: int = 256
    r_max: float = 2.0

    tolerances: Dict[str, float] = field(default_factory=default_tolerances)

    # 稳态求解
    max_iter: int = 20000
    damping: float = 0.5
    extrapolate: bool = True    # 稳态检验在 J 与 2J 上做 Richardson 外推

    # 时间演化
    t_max: float = 20.0
    stall_tol: float = 1e-6
    cfl: float = 0.4
    potential_refresh: int = 1
    snapshot_every: int = 0

    # 凸性扫描
    resolution: int = 200

    # 不等式模糊测试
    trials: int = 200
    pushforward_samples: int = 3

    seed: int = 0
    output_dir: str = field(default_factory=default_output_dir)
    workers: int = 1
    log_level: str = "INFO"

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> 'RunConfig':
        """从分节字典构造配置，未知键抛出 ConfigError"""
        data = data or {}
        if not isinstance(data, dict):
            raise ConfigError("配置文件顶层必须是映射")
        values: Dict[str, Any] = {}
        tolerances = default_tolerances()
        for key, content in data.items():
            if key in SECTIONS:
                if not isinstance(content, dict):
                    raise ConfigError(f"配置分节 '{key}' 必须是映射")
                for name, value in content.items():
                    if name not in SECTIONS[key]:
                        raise ConfigError(f"未知配置项: {key}.{name}")
                    values[name] = value
            elif key == 'tolerances':
                if not isinstance(content, dict):
                    raise ConfigError("配置分节 'tolerances' 必须是映射")
                for name, value in content.items():
                    try:
                        tolerances[name] = float(value)
                    except (TypeError, ValueError):
                        raise ConfigError(f"容差 tolerances.{name} 不是数值: {value!r}")
            elif key in TOP_LEVEL:
                values[key] = content
            else:
                raise ConfigError(f"未知配置项: {key}")
        values['tolerances'] = tolerances
        try:
            return cls(**values)
        except TypeError as e:
            raise ConfigError(f"配置字段错误: {e}") from e

    @classmethod
    def from_yaml(cls, config_path: str) -> 'RunConfig':
        """从YAML文件加载配置"""
        config_file = Path(config_path)
        if not config_file.exists():
            raise ConfigError(f"配置文件不存在: {config_path}")
        with open(config_file, 'r', encoding='utf-8') as f:
            try:
                config_data = yaml.safe_load(f)
            except yaml.YAMLError as e:
                mark = getattr(e, 'problem_mark', None)
                where = f"第 {mark.line + 1} 行" if mark is not None else "未知位置"
                raise ConfigError(f"YAML 解析失败（{where}）: {config_path}") from e
        return cls.from_dict(config_data)

    @classmethod
    def from_json(cls, config_path: str) -> 'RunConfig':
        """从JSON文件加载配置"""
        config_file = Path(config_path)
        if not config_file.exists():
            raise ConfigError(f"配置文件不存在: {config_path}")
        with open(config_file, 'r', encoding='utf-8') as f:
            try:
                config_data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"JSON 解析失败（第 {e.lineno} 行）: {config_path}") from e
        return cls.from_dict(config_data)

    @classmethod
    def from_file(cls, config_path: str) -> 'RunConfig':
        """根据扩展名自动从文件加载配置（支持 YAML/JSON）"""
        ext = Path(config_path).suffix.lower()
        if ext in ['.yaml', '.yml']:
            return cls.from_yaml(config_path)
        elif ext == '.json':
            return cls.from_json(config_path)
        else:
            # 先尝试 YAML，再尝试 JSON
            try:
                return cls.from_yaml(config_path)
            except ConfigError:
                return cls.from_json(config_path)

    def to_dict(self) -> Dict[str, Any]:
        """分节形式的配置字典"""
        data: Dict[str, Any] = {
            section: {name: getattr(self, name) for name in names}
            for section, names in SECTIONS.items()
        }
        data['tolerances'] = dict(self.tolerances)
        for name in TOP_LEVEL:
            data[name] = getattr(self, name)
        return data

    def to_yaml(self, config_path: str):
        """保存配置到YAML文件"""
        with open(config_path, 'w', encoding='utf-8') as f:
            yaml.safe_dump(self.to_dict(), f, default_flow_style=False, allow_unicode=True,
                           sort_keys=False)

    def to_json(self, config_path: str):
        with open(config_path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, ensure_ascii=False)

    def with_overrides(self, **overrides) -> 'RunConfig':
        """用命令行参数覆盖配置，值为 None 的参数忽略"""
        known = {f.name for f in fields(self)}
        for name in overrides:
            if name not in known:
                raise ConfigError(f"未知配置项: {name}")
        changes = {name: value for name, value in overrides.items() if value is not None}
        return replace(self, **changes) if changes else self

    @property
    def params(self) -> ModelParams:
        """模型参数对象"""
        try:
            if self.m is None:
                return ModelParams.fair_competition(self.N, self.k, chi=self.chi, M=self.M)
            return ModelParams(self.N, self.k, self.m, chi=self.chi, M=self.M)
        except ParameterError as e:
            raise ConfigError(f"模型参数无效: {e}") from e

    @property
    def grid(self) -> np.ndarray:
        """均匀径向网格"""
        return uniform_grid(self.J, self.r_max)

    @property
    def output_path(self) -> Path:
        return Path(self.output_dir)

    def tolerance(self, name: str) -> float:
        if name not in self.tolerances:
            raise ConfigError(f"未配置容差: {name}")
        return self.tolerances[name]

    def validate(self):
        """验证配置的有效性，类型错误也报告为 ConfigError"""
        try:
            self._validate_fields()
        except TypeError as e:
            raise ConfigError(f"配置值类型错误: {e}") from e

    def _validate_fields(self):
        self.params  # 触发 ModelParams 校验
        if int(self.J) != self.J or self.J < MIN_CELLS:
            raise ConfigError(f"grid.J 必须是不小于 {MIN_CELLS} 的整数: {self.J}")
        if not self.r_max > 0:
            raise ConfigError(f"grid.r_max 必须为正: {self.r_max}")
        for name, value in self.tolerances.items():
            if not value > 0:
                raise ConfigError(f"容差 tolerances.{name} 必须为正: {value}")
        if self.max_iter < 1:
            raise ConfigError(f"solver.max_iter 必须为正: {self.max_iter}")
        if not 0 < self.damping <= 1:
            raise ConfigError(f"solver.damping 必须位于 (0, 1]: {self.damping}")
        if not isinstance(self.extrapolate, bool):
            raise ConfigError(f"solver.extrapolate 必须是布尔值: {self.extrapolate!r}")
        if self.t_max < 0:
            raise ConfigError(f"simulation.t_max 不能为负: {self.t_max}")
        if not self.stall_tol > 0:
            raise ConfigError(f"simulation.stall_tol 必须为正: {self.stall_tol}")
        if not 0 < self.cfl <= 1:
            raise ConfigError(f"simulation.cfl 必须位于 (0, 1]: {self.cfl}")
        if self.potential_refresh < 1:
            raise ConfigError(f"simulation.potential_refresh 必须为正: {self.potential_refresh}")
        if self.snapshot_every < 0:
            raise ConfigError(f"simulation.snapshot_every 不能为负: {self.snapshot_every}")
        if self.resolution < 16:
            raise ConfigError(f"scan.resolution 至少为 16: {self.resolution}")
        if self.trials < 1:
            raise ConfigError(f"fuzz.trials 必须为正: {self.trials}")
        if self.pushforward_samples < 0:
            raise ConfigError(f"fuzz.pushforward_samples 不能为负: {self.pushforward_samples}")
        if self.workers < 1:
            raise ConfigError(f"workers 必须为正: {self.workers}")
        if not self.output_dir:
            raise ConfigError("输出目录不能为空")
        if logging.getLevelName(str(self.log_level).upper()) not in (
                logging.DEBUG, logging.INFO, logging.WARNING, logging.ERROR, logging.CRITICAL):
            raise ConfigError(f"未知日志级别: {self.log_level}")
