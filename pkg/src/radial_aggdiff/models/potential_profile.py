"""
势剖面数据类

网格节点上的平均场势 S_k(r_j) = (W_k ∗ ρ)(r_j)。
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from ..exceptions import ParameterError


@dataclass(eq=False)
class PotentialProfile:
    """节点处的势值"""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.shape != self.values.shape:
            raise ParameterError("势剖面的网格与取值长度必须一致")

    def sign_issues(self) -> List[str]:
        """k < 0 且质量为正时势处处为负"""
        positive = np.nonzero(self.values >= 0)[0]
        if positive.size:
            return [f"势在 r={self.grid[positive[0]]:g} 处非负: {self.values[positive[0]]:g}"]
        return []

    def as_table(self) -> np.ndarray:
        return np.column_stack([self.grid, self.values])
