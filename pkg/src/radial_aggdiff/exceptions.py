"""
异常定义模块

数值计算、配置解析与验证过程中使用的异常类型。每个异常同时继承对应的内置异常，
调用方既可以按具体类型捕获，也可以直接捕获 ValueError / RuntimeError。
"""


class RadialAggDiffError(Exception):
    """所有项目异常的基类"""


class ParameterError(RadialAggDiffError, ValueError):
    """参数不合法"""


class PoleError(ParameterError):
    """Gamma 函数在非正整数处的极点"""


class DomainError(ParameterError):
    """自变量超出定义域"""


class DivergenceError(RadialAggDiffError, ArithmeticError):
    """级数或极限发散（如 z=1 且 c <= a+b）"""


class ConvergenceError(RadialAggDiffError, RuntimeError):
    """迭代或级数在上限内未收敛"""


class KernelSingularityError(RadialAggDiffError, ArithmeticError):
    """核函数在对角线 r=η 或 s=1 处奇异"""


class RegimeError(ParameterError):
    """参数组合不属于允许的区域（扩散主导 / 公平竞争）"""


class CollapseError(RadialAggDiffError, RuntimeError):
    """稳态迭代中支撑集塌缩（吸引占优或超临界质量）"""


class MassMismatchError(ParameterError):
    """两个密度的质量不一致"""


class DegenerateSupportError(ParameterError):
    """密度支撑集退化（零质量或零长度）"""


class InstabilityError(RadialAggDiffError, RuntimeError):
    """时间推进出现负密度或步长被拒绝"""


class SimulationTimeout(RadialAggDiffError, RuntimeError):
    """演化在 t_max 内未达到平衡"""

    def __init__(self, message: str, diagnostics: dict = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(RadialAggDiffError, ValueError):
    """配置文件解析失败，消息中包含行号或键名"""


class VerificationError(RadialAggDiffError, AssertionError):
    """验证失败（例如在禁止区域发现不等式违例）"""
