"""
数据模型模块

包含模型参数、径向密度、能量分解、稳态、输运映射、扫描报告与模拟状态等核心数据结构。
"""

from .model_params import ModelParams
from .hypergeom_params import HypergeomParams
from .radial_density import RadialDensity
from .energy_breakdown import EnergyBreakdown
from .steady_state import SteadyState
from .transport_map import TransportMap
from .scan_report import ScanReport
from .sim_state import SimState
from .potential_profile import PotentialProfile

__all__ = [
    "ModelParams",
    "HypergeomParams",
    "RadialDensity",
    "EnergyBreakdown",
    "SteadyState",
    "TransportMap",
    "ScanReport",
    "SimState",
    "PotentialProfile",
]
