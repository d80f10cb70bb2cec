"""
凸性扫描报告数据类

(t, c) 网格上切线不等式 ϑ(t)/k >= α(c) + β(c)(1-t^N)^{k/N} 的残差与违例列表。
"""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

# 真正违例（而非舍入）的判定阈值
FALSIFICATION_THRESHOLD = -1e-4


@dataclass(eq=False)
class ScanReport:
    """凸性扫描报告"""

    N: int
    k: float
    t_grid: np.ndarray
    c_grid: np.ndarray
    residuals: np.ndarray                        # 形状 (len(t_grid), len(c_grid))
    tol: float
    excluded_band: Tuple[float, float]           # 被排除的 t 区间（靠近 1）
    violations: List[Tuple[float, float, float]] = field(default_factory=list)

    @property
    def min_residual(self) -> float:
        return float(np.min(self.residuals))

    @property
    def violation_count(self) -> int:
        return len(self.violations)

    @property
    def expected_to_hold(self) -> bool:
        """k <= 2-N 时不等式应当成立"""
        return self.k <= 2 - self.N + 1e-12

    @property
    def falsified(self) -> bool:
        """是否存在超过舍入量级的真正违例"""
        return self.min_residual < FALSIFICATION_THRESHOLD

    @property
    def consistent(self) -> bool:
        """扫描结果是否与理论一致：应成立时无违例"""
        return self.violation_count == 0 if self.expected_to_hold else True

    def to_summary(self) -> dict:
        worst = sorted(self.violations, key=lambda v: v[2])[:20]
        return {
            'N': self.N,
            'k': self.k,
            'resolution': [int(self.t_grid.size), int(self.c_grid.size)],
            'tol': self.tol,
            'excluded_band': list(self.excluded_band),
            'min_residual': self.min_residual,
            'violation_count': self.violation_count,
            'expected_to_hold': self.expected_to_hold,
            'falsified': self.falsified,
            'worst_violations': [list(v) for v in worst],
        }

    def __str__(self) -> str:
        return (f"ScanReport(N={self.N}, k={self.k:g}, violations={self.violation_count}, "
                f"min_residual={self.min_residual:.3e})")
