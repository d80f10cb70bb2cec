"""
稳态数据类

稳态密度 ρ̄ 及其 Euler–Lagrange 常数、支撑半径与求解诊断信息。
"""

from dataclasses import dataclass, field

import numpy as np

from .radial_density import RadialDensity


@dataclass
class SteadyState:
    """径向稳态"""

    density: RadialDensity
    lagrange_constant: float     # Euler–Lagrange 水平 C
    support_radius: float
    iterations: int = 0
    residual: float = 0.0        # 最后一次迭代的 L¹ 变化
    diagnostics: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return bool(self.diagnostics.get('converged', True))

    @classmethod
    def from_density(cls, density: RadialDensity, params) -> 'SteadyState':
        """由用户给定的剖面构造稳态记录，C 取支撑上一阶变分的平均值"""
        from ..energy import first_variation

        support = density.values > 0
        xi = first_variation(density, params)
        level = float(np.mean(xi[support])) if np.any(support) else 0.0
        return cls(
            density=density,
            lagrange_constant=level,
            support_radius=density.support_radius,
            diagnostics={'source': 'user'},
        )

    def to_dict(self) -> dict:
        """JSON 友好的摘要（不含密度数组）"""
        summary = {
            'lagrange_constant': self.lagrange_constant,
            'support_radius': self.support_radius,
            'iterations': self.iterations,
            'residual': self.residual,
        }
        summary.update(self.diagnostics)
        return summary

    def __str__(self) -> str:
        return (f"SteadyState(C={self.lagrange_constant:.10g}, R={self.support_radius:.6g}, "
                f"iterations={self.iterations})")
