"""
模型参数数据类

描述维数 N、核指数 k、扩散指数 m、约束开关 χ 与总质量 M，以及由它们导出的
区域信息（临界指数 m_c、上界 m*、牛顿情形等）。
"""

import math
from dataclasses import dataclass, replace

from ..exceptions import ParameterError

# 判定 k = 2-N 与 m = m_c 的容差
NEWTONIAN_TOL = 1e-12
REGIME_TOL = 1e-10


@dataclass(frozen=True)
class ModelParams:
    """模型参数"""

    N: int            # 空间维数
    k: float          # 核指数，W_k = |x|^k / k
    m: float          # 扩散指数
    chi: int = 0      # 约束势开关 χ ∈ {0, 1}
    M: float = 1.0    # 总质量

    def __post_init__(self):
        """参数校验"""
        if int(self.N) != self.N or self.N < 2:
            raise ParameterError(f"维数 N 必须是不小于 2 的整数: {self.N}")
        object.__setattr__(self, 'N', int(self.N))
        if not (-self.N < self.k < 0):
            raise ParameterError(f"核指数 k 必须位于 (-N, 0) 内: k={self.k}, N={self.N}")
        if not self.m > 1:
            raise ParameterError(f"扩散指数 m 必须大于 1: {self.m}")
        if self.chi not in (0, 1):
            raise ParameterError(f"约束开关 chi 只能取 0 或 1: {self.chi}")
        if not self.M > 0:
            raise ParameterError(f"总质量 M 必须为正: {self.M}")

    @classmethod
    def fair_competition(cls, N: int, k: float, chi: int = 0, M: float = 1.0) -> 'ModelParams':
        """构造 m = m_c 的公平竞争参数"""
        return cls(N=N, k=k, m=1.0 - k / N, chi=chi, M=M)

    @property
    def m_c(self) -> float:
        """临界扩散指数 m_c = 1 - k/N"""
        return 1.0 - self.k / self.N

    @property
    def m_star(self) -> float:
        """全局极小刻画的上界 m*，k >= 1-N 时为无穷"""
        if self.k < 1 - self.N:
            return (2 - self.k - self.N) / (1 - self.k - self.N)
        return math.inf

    @property
    def is_newtonian(self) -> bool:
        """是否为牛顿（调和）情形 k = 2-N"""
        return abs(self.k - (2 - self.N)) <= NEWTONIAN_TOL

    @property
    def is_fair_competition(self) -> bool:
        return abs(self.m - self.m_c) <= REGIME_TOL * max(1.0, self.m_c)

    @property
    def regime(self) -> str:
        """所处区域名称"""
        if self.is_fair_competition:
            return "fair-competition"
        if self.m > self.m_c:
            return "diffusion-dominated"
        return "attraction-dominated"

    @property
    def singularity_exponent(self) -> float:
        """核 Θ(r,η) 在对角线附近的局部指数 p = N-1+k"""
        return self.N - 1 + self.k

    @property
    def in_inequality_range(self) -> bool:
        """是否满足函数不等式的适用范围 -N < k <= 2-N"""
        return self.k < 2 - self.N or self.is_newtonian

    @property
    def sigma(self) -> float:
        """单位球面面积 σ_N"""
        from ..kernel import surface_area
        return surface_area(self.N)

    def with_changes(self, **changes) -> 'ModelParams':
        """返回修改部分字段后的新参数"""
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {'N': self.N, 'k': self.k, 'm': self.m, 'chi': self.chi, 'M': self.M}

    def __str__(self) -> str:
        return f"ModelParams(N={self.N}, k={self.k:g}, m={self.m:g}, chi={self.chi}, M={self.M:g})"
