"""
模拟状态数据类

有限体积梯度流模拟的当前密度、时间、步长与能量历史。
"""

from dataclasses import dataclass, field
from typing import List, Tuple

from .radial_density import RadialDensity


@dataclass
class SimState:
    """梯度流模拟状态"""

    density: RadialDensity
    time: float = 0.0
    dt: float = 0.0
    energy_history: List[Tuple[float, float]] = field(default_factory=list)  # (t, F)
    steps: int = 0
    diagnostics: dict = field(default_factory=dict)

    @property
    def last_energy(self) -> float:
        return self.energy_history[-1][1] if self.energy_history else float('nan')

    def energy_increase(self) -> float:
        """能量历史中最大的相邻增量（非增时 <= 0）"""
        if len(self.energy_history) < 2:
            return 0.0
        values = [e for _, e in self.energy_history]
        return max(b - a for a, b in zip(values[:-1], values[1:]))

    def __str__(self) -> str:
        return f"SimState(t={self.time:.6g}, steps={self.steps}, F={self.last_energy:.10g})"
