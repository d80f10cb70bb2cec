"""
超几何参数数据类

Gauss 超几何函数 F(a,b;c;z) 的实参数与自变量。
"""

from dataclasses import dataclass, replace

from ..exceptions import DomainError, PoleError


def is_nonpositive_integer(x: float) -> bool:
    """判断 x 是否为 0, -1, -2, ..."""
    return x <= 0 and float(x).is_integer()


@dataclass(frozen=True)
class HypergeomParams:
    """超几何函数参数"""

    a: float
    b: float
    c: float
    z: float = 0.0

    def __post_init__(self):
        if is_nonpositive_integer(self.c):
            raise PoleError(f"参数 c 不能是非正整数: c={self.c}")
        if not (-1.0 < self.z <= 1.0):
            raise DomainError(f"自变量 z 必须位于 (-1, 1] 内: z={self.z}")

    @property
    def excess(self) -> float:
        """c - a - b，决定 z→1 时的行为"""
        return self.c - self.a - self.b

    def shifted(self, da: float = 0.0, db: float = 0.0, dc: float = 0.0) -> 'HypergeomParams':
        """参数平移后的新对象"""
        return replace(self, a=self.a + da, b=self.b + db, c=self.c + dc)

    def at(self, z: float) -> 'HypergeomParams':
        return replace(self, z=z)

    def __str__(self) -> str:
        return f"F({self.a:g}, {self.b:g}; {self.c:g}; {self.z:g})"
