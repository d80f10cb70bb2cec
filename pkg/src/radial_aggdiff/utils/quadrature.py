"""
求积规则

[0,1] 上的 Gauss–Legendre、左端带代数权重的 Gauss–Jacobi，以及向端点几何加密的
复合规则。规则只依赖相对坐标，映射到 [a,b] 后在网格整体伸缩下按幂次精确缩放。
"""

from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy import special

Rule = Tuple[np.ndarray, np.ndarray]

# 默认阶数与加密层数
DEFAULT_ORDER = 8
DEFAULT_LEVELS = 20
GRADING_RATIO = 2.0


def _frozen(nodes: np.ndarray, weights: np.ndarray) -> Rule:
    nodes = np.ascontiguousarray(nodes, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=None)
def gauss_legendre(q: int = DEFAULT_ORDER) -> Rule:
    """[0,1] 上的 q 点 Gauss–Legendre 规则"""
    x, w = special.roots_legendre(q)
    return _frozen(0.5 * (x + 1.0), 0.5 * w)


@lru_cache(maxsize=None)
def gauss_jacobi_left(q: int, beta: float) -> Rule:
    """积分 ∫₀¹ h(x) dx 的规则，h(x) 在 0 附近形如 x^β·(光滑函数)

    权重已除去 x^β，调用方直接传入 h 的取值。
    """
    x, w = special.roots_jacobi(q, 0.0, beta)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 ** (beta + 1.0) * w * nodes ** (-beta)
    return _frozen(nodes, weights)


@lru_cache(maxsize=None)
def graded_rule(levels: int = DEFAULT_LEVELS, q: int = DEFAULT_ORDER,
                exponent: float = 0.0, ratio: float = GRADING_RATIO) -> Rule:
    """[0,1] 上向 0 几何加密的复合规则

    面板为 [ratio^{-l-1}, ratio^{-l}]，l = 0..levels-1，各用 Gauss–Legendre；
    最内层面板 [0, ratio^{-levels}] 在 exponent < 0 时使用 Gauss–Jacobi。

    Args:
        levels: 加密层数
        q: 每个面板的节点数
        exponent: 被积函数在 0 处的代数奇性指数
        ratio: 相邻面板长度之比
    """
    gl_x, gl_w = gauss_legendre(q)
    nodes, weights = [], []
    upper = 1.0
    for _ in range(levels):
        lower = upper / ratio
        h = upper - lower
        nodes.append(lower + h * gl_x)
        weights.append(h * gl_w)
        upper = lower
    inner_x, inner_w = gauss_jacobi_left(q, exponent) if exponent < 0 else (gl_x, gl_w)
    nodes.append(upper * inner_x)
    weights.append(upper * inner_w)
    return _frozen(np.concatenate(nodes[::-1]), np.concatenate(weights[::-1]))


def on_interval(rule: Rule, a: float, b: float, toward: str = 'left') -> Rule:
    """把 [0,1] 上的规则映射到 [a,b]，加密端朝向 toward（'left' 或 'right'）"""
    t, w = rule
    h = b - a
    if toward == 'left':
        return a + h * t, h * w
    if toward == 'right':
        return b - h * t, h * w
    raise ValueError(f"未知的加密方向: {toward}")
