"""
能量分解数据类

自由能 F[ρ] 的熵项、相互作用项与约束项及其总和。
"""

from dataclasses import dataclass, field
from typing import List


@dataclass
class EnergyBreakdown:
    """自由能分解"""

    entropy: float        # (1/(m-1)) ∫ρ^m
    interaction: float    # (1/2) ∬ W_k(x-y) ρ(x) ρ(y)
    confinement: float    # (χ/2) ∫|x|^2 ρ
    total: float = field(init=False)

    def __post_init__(self):
        self.entropy = float(self.entropy)
        self.interaction = float(self.interaction)
        self.confinement = float(self.confinement)
        self.total = self.entropy + self.interaction + self.confinement

    def sign_issues(self) -> List[str]:
        """检查各项符号（m>1 时熵非负，k<0 时相互作用非正，约束非负）"""
        issues = []
        if self.entropy < 0:
            issues.append(f"熵项为负: {self.entropy}")
        if self.interaction > 0:
            issues.append(f"相互作用项为正: {self.interaction}")
        if self.confinement < 0:
            issues.append(f"约束项为负: {self.confinement}")
        return issues

    def to_dict(self) -> dict:
        return {
            'entropy': self.entropy,
            'interaction': self.interaction,
            'confinement': self.confinement,
            'total': self.total,
        }

    def __str__(self) -> str:
        return (f"EnergyBreakdown(total={self.total:.12g}, entropy={self.entropy:.6g}, "
                f"interaction={self.interaction:.6g}, confinement={self.confinement:.6g})")
