"""
径向聚集-扩散 - 主包

奇异幂律吸引 W_k(x) = |x|^k/k 下聚集-扩散方程的径向数值实验：
超几何函数与角向核、势与自由能、稳态不动点迭代、径向输运下界、
切线凸性不等式与有限体积梯度流。
"""

# 顶部元信息
__version__ = "0.1.0"
__author__ = "Radial AggDiff Team"
__email__ = "team@radial-aggdiff.org"

from .main import ExperimentRunner
from .config import RunConfig
from .models import ModelParams, RadialDensity

__all__ = ["ExperimentRunner", "RunConfig", "ModelParams", "RadialDensity"]
