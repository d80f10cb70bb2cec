"""
径向密度数据类

径向网格 r_0 = 0 < r_1 < ... < r_J 上的分片常数非负密度，第 j 个值对应单元
[r_j, r_{j+1}]，r_J 之外密度为零。
"""

from dataclasses import dataclass

import numpy as np

from ..exceptions import ParameterError


@dataclass(eq=False)
class RadialDensity:
    """径向密度（分片常数表示）"""

    grid: np.ndarray      # 节点半径，长度 J+1
    values: np.ndarray    # 单元密度，长度 J

    def __post_init__(self):
        """转换为只读浮点数组并校验"""
        grid = np.array(self.grid, dtype=float)
        values = np.array(self.values, dtype=float)

        if grid.ndim != 1 or grid.size < 2:
            raise ParameterError("网格必须是至少包含两个节点的一维数组")
        if grid[0] != 0.0:
            raise ParameterError(f"网格必须从 r=0 开始: r_0={grid[0]}")
        if np.any(np.diff(grid) <= 0):
            raise ParameterError("网格节点必须严格递增")
        if values.shape != (grid.size - 1,):
            raise ParameterError(
                f"密度值个数({values.size})必须等于单元数({grid.size - 1})"
            )
        if not np.all(np.isfinite(values)):
            raise ParameterError("密度值必须有限")
        if np.any(values < 0):
            raise ParameterError("密度值必须非负")

        grid.setflags(write=False)
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    @property
    def cell_count(self) -> int:
        return self.values.size

    @property
    def centers(self) -> np.ndarray:
        """单元中点"""
        return 0.5 * (self.grid[1:] + self.grid[:-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.grid)

    @property
    def r_max(self) -> float:
        return float(self.grid[-1])

    @property
    def support_radius(self) -> float:
        """最后一个正值单元的右端点，零密度时为 0"""
        positive = np.nonzero(self.values > 0)[0]
        if positive.size == 0:
            return 0.0
        return float(self.grid[positive[-1] + 1])

    @property
    def support_cells(self) -> int:
        return int(np.count_nonzero(self.values > 0))

    def is_nonincreasing(self) -> bool:
        """是否单调不增（对称递减重排的不动点）"""
        return bool(np.all(np.diff(self.values) <= 0))

    def value_at(self, r) -> np.ndarray:
        """在任意半径处取值（单元内为常数，r_J 之外为零）"""
        r = np.asarray(r, dtype=float)
        idx = np.searchsorted(self.grid, r, side='right') - 1
        inside = (idx >= 0) & (idx < self.cell_count)
        result = np.zeros_like(r)
        result[inside] = self.values[idx[inside]]
        return result

    def with_values(self, values) -> 'RadialDensity':
        return RadialDensity(self.grid, values)

    def dilate(self, lam: float, N: int) -> 'RadialDensity':
        """N 维中的保质量伸缩 ρ_λ(r) = λ^N ρ(λr)，网格同步缩放，结果精确"""
        if not lam > 0:
            raise ParameterError(f"伸缩因子必须为正: {lam}")
        return RadialDensity(self.grid / lam, self.values * lam ** N)

    def __str__(self) -> str:
        return (f"RadialDensity(cells={self.cell_count}, r_max={self.r_max:g}, "
                f"support={self.support_radius:g})")
