"""
径向输运映射数据类

单调映射 ψ′ 把源密度 ρ̄(a)a^{N-1}da 推前为目标密度 ρ(r)r^{N-1}dr。
在每个（加密后的）源单元内 φ 为常数，因此

    ψ′(a)^N = ψ′(a_l)^N + φ_l (a^N - a_l^N),   a ∈ [a_l, a_{l+1}]

推前关系 ρ(ψ′(a)) = ρ̄(a) / φ(a) 在离散层面精确成立。
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from ..exceptions import ParameterError
from .radial_density import RadialDensity


@dataclass(eq=False)
class TransportMap:
    """径向输运映射"""

    N: int
    source_grid: np.ndarray     # 源支撑上的节点 a_l，a_0 = 0
    psi_prime: np.ndarray       # 节点处的 ψ′(a_l)
    phi: np.ndarray             # 每个单元的雅可比因子 φ_l
    source_values: np.ndarray   # 每个单元的源密度 ρ̄_l

    def __post_init__(self):
        self.source_grid = np.asarray(self.source_grid, dtype=float)
        self.psi_prime = np.asarray(self.psi_prime, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        self.source_values = np.asarray(self.source_values, dtype=float)

        cells = self.source_grid.size - 1
        if cells < 1:
            raise ParameterError("输运映射至少需要一个单元")
        if self.psi_prime.shape != self.source_grid.shape:
            raise ParameterError("ψ′ 节点值个数必须与源网格一致")
        if self.phi.shape != (cells,) or self.source_values.shape != (cells,):
            raise ParameterError("φ 与源密度必须按单元给出")
        if self.source_grid[0] != 0.0 or np.any(np.diff(self.source_grid) <= 0):
            raise ParameterError("源网格必须从 0 开始且严格递增")

    @property
    def cell_count(self) -> int:
        return self.phi.size

    def monotonicity_issues(self) -> List[str]:
        """检查 ψ′ 严格递增与 φ > 0"""
        issues = []
        if np.any(np.diff(self.psi_prime) <= 0):
            issues.append("ψ′ 在源支撑上不是严格递增的")
        if np.any(self.phi <= 0):
            issues.append("雅可比因子 φ 存在非正值")
        return issues

    def _cell_index(self, a: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.source_grid, a, side='right') - 1
        return np.clip(idx, 0, self.cell_count - 1)

    def psi_prime_at(self, a) -> np.ndarray:
        """任意 a 处的 ψ′(a)，a 截断到源支撑内"""
        N = self.N
        a = np.clip(np.asarray(a, dtype=float), 0.0, self.source_grid[-1])
        idx = self._cell_index(a)
        base = self.psi_prime[idx] ** N + self.phi[idx] * (a ** N - self.source_grid[idx] ** N)
        return np.maximum(base, 0.0) ** (1.0 / N)

    def phi_at(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        return self.phi[self._cell_index(a)]

    def inverse_at(self, r) -> np.ndarray:
        """逆映射 (ψ′)^{-1}(r)"""
        N = self.N
        r = np.clip(np.asarray(r, dtype=float), 0.0, self.psi_prime[-1])
        idx = np.searchsorted(self.psi_prime, r, side='right') - 1
        idx = np.clip(idx, 0, self.cell_count - 1)
        base = self.source_grid[idx] ** N + (r ** N - self.psi_prime[idx] ** N) / self.phi[idx]
        return np.maximum(base, 0.0) ** (1.0 / N)

    def pushforward_density(self) -> RadialDensity:
        """推前后的目标密度（定义在像网格 ψ′(a_l) 上）"""
        return RadialDensity(self.psi_prime, self.source_values / self.phi)

    def __str__(self) -> str:
        return (f"TransportMap(N={self.N}, cells={self.cell_count}, "
                f"phi=[{self.phi.min():.4g}, {self.phi.max():.4g}])")
