"""
特殊函数模块

实参数的 Gamma 函数、Pochhammer 符号与 Gauss 超几何函数 F(a,b;c;z)，
以及核函数推导中用到的经典恒等式（导数公式、二次变换、相邻关系）的残差。

级数部分使用项递推
    t_{n+1} = t_n (a+n)(b+n) z / ((c+n)(n+1)),
积分表示
    H(a,b;c;z) = ∫₀¹ (1-zt)^{-a} (1-t)^{c-b-1} t^{b-1} dt = Γ(b)Γ(c-b)/Γ(c) · F(a,b;c;z)
交给 QUADPACK 的代数端点权重处理端点奇异性。
"""

import logging
import math
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np
from scipy import integrate, special

from .exceptions import (ConvergenceError, DivergenceError, DomainError,
                         ParameterError, PoleError)
from .models import HypergeomParams
from .models.hypergeom_params import is_nonpositive_integer

logger = logging.getLogger(__name__)

# Lanczos 近似（g = 9，11 个系数）
LANCZOS_G = 9.0
LANCZOS_COEFFICIENTS = (
    1.000000000000000174663, 5716.400188274341379136,
    -14815.30426768413909044, 14291.49277657478554025,
    -6348.160217641458813289, 1301.608286058321874105,
    -108.1767053514369634679, 2.605696505611755827729,
    -0.7423452510201416151527e-2, 0.5384136432509564062961e-7,
    -0.4023533141268236372067e-8,
)
SQRT_TWO_PI = math.sqrt(2.0 * math.pi)

# 级数控制
SERIES_EPS = np.finfo(float).eps
SERIES_MIN_TERMS = 8
SERIES_SMALL_STREAK = 3
MAX_TERMS = 100_000
RAISED_MAX_TERMS = 2_000_000
INTEGRAL_SWITCH = 0.9

# 积分表示的求积精度
QUAD_EPSREL = 1e-12
QUAD_LIMIT = 500

# 有限差分步长
DERIVATIVE_STEP = 1e-5


def _log_gamma_lanczos(x: float) -> float:
    """x >= 0.5 时的 ln Γ(x)"""
    total = LANCZOS_COEFFICIENTS[0]
    for i in range(len(LANCZOS_COEFFICIENTS) - 1, 0, -1):
        total += LANCZOS_COEFFICIENTS[i] / (x + i)
    shifted = x + LANCZOS_G + 0.5
    return (x + 0.5) * math.log(shifted) - shifted + math.log(SQRT_TWO_PI * total / x)


def gamma(x: float) -> float:
    """Gamma 函数 Γ(x)

    Args:
        x: 实数，不能是非正整数

    Returns:
        Γ(x)，|x| <= 50 时相对误差约 1e-13
    """
    x = float(x)
    if is_nonpositive_integer(x):
        raise PoleError(f"Gamma 函数在非正整数处有极点: x={x}")
    if x < 0.5:
        # 反射公式 Γ(x)Γ(1-x) = π / sin(πx)
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    return math.exp(_log_gamma_lanczos(x))


def rgamma(x: float) -> float:
    """1/Γ(x)，在极点处取 0"""
    if is_nonpositive_integer(float(x)):
        return 0.0
    return 1.0 / gamma(x)


def pochhammer(q: float, n: int) -> float:
    """Pochhammer 符号 (q)_n = q(q+1)...(q+n-1)，n = 0 时为 1"""
    if int(n) != n or n < 0:
        raise ParameterError(f"Pochhammer 符号的阶数必须是非负整数: n={n}")
    result = 1.0
    for i in range(int(n)):
        result *= q + i
    return result


def gauss_limit(a: float, b: float, c: float) -> float:
    """F(a,b;c;1) = Γ(c)Γ(c-a-b) / (Γ(c-a)Γ(c-b))，要求 c > a+b"""
    if c - a - b <= 0:
        raise DivergenceError(f"z=1 处级数发散: c-a-b={c - a - b:g} <= 0")
    return gamma(c) * gamma(c - a - b) * rgamma(c - a) * rgamma(c - b)


def _terminates(a: float, b: float) -> bool:
    return is_nonpositive_integer(a) or is_nonpositive_integer(b)


def _series(a: float, b: float, c: float, z: float, max_terms: int) -> float:
    """直接级数求和"""
    term = 1.0
    total = 1.0
    streak = 0
    for n in range(max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        total += term
        if abs(term) <= SERIES_EPS * abs(total):
            streak += 1
            if streak >= SERIES_SMALL_STREAK and n >= SERIES_MIN_TERMS:
                return total
        else:
            streak = 0
    raise ConvergenceError(
        f"超几何级数在 {max_terms} 项内未收敛: F({a:g}, {b:g}; {c:g}; {z:g})"
    )


def hyp2f1(p: HypergeomParams, max_terms: int = MAX_TERMS) -> float:
    """Gauss 超几何函数 F(a,b;c;z)

    |z| < 1 时按级数求和；z > 0.9 且 c > b > 0（或 c > a > 0）时改用积分表示；
    z = 1 时返回 Gauss 极限值。

    Args:
        p: 超几何参数
        max_terms: 级数项数上限

    Returns:
        F(a,b;c;z)
    """
    a, b, c, z = p.a, p.b, p.c, p.z
    if z == 1.0:
        return gauss_limit(a, b, c)
    if z > INTEGRAL_SWITCH and not _terminates(a, b):
        if c > b > 0:
            return hyp2f1_integral(p) * gamma(c) * rgamma(b) * rgamma(c - b)
        if c > a > 0:
            swapped = HypergeomParams(b, a, c, z)
            return hyp2f1_integral(swapped) * gamma(c) * rgamma(a) * rgamma(c - a)
        logger.debug(f"{p} 无法使用积分表示，提高级数上限")
        return _series(a, b, c, z, max(max_terms, RAISED_MAX_TERMS))
    return _series(a, b, c, z, max_terms)


def hyp2f1_integral(p: HypergeomParams) -> float:
    """积分表示 H(a,b;c;z) = ∫₀¹ (1-zt)^{-a} (1-t)^{c-b-1} t^{b-1} dt

    端点奇异因子 t^{b-1}(1-t)^{c-b-1} 作为 QUADPACK 的代数权重处理。
    """
    a, b, c, z = p.a, p.b, p.c, p.z
    if not (c > b > 0):
        raise ParameterError(f"积分表示要求 c > b > 0: b={b:g}, c={c:g}")
    if not z < 1.0:
        raise DomainError(f"积分表示要求 z < 1: z={z:g}")

    value, abserr = integrate.quad(
        lambda t: (1.0 - z * t) ** (-a),
        0.0, 1.0,
        weight='alg', wvar=(b - 1.0, c - b - 1.0),
        epsabs=0.0, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT,
    )
    logger.debug(f"H({a:g},{b:g};{c:g};{z:g}) = {value:.16g} ± {abserr:.2e}")
    return value


def hyp2f1_array(a: float, b: float, c: float, z) -> np.ndarray:
    """数组版本的 F(a,b;c;z)，供核函数在网格上批量求值

    z 必须位于 (-1, 1]；z = 1 处按 Gauss 极限处理，发散时抛出 DivergenceError。
    """
    if is_nonpositive_integer(c):
        raise PoleError(f"参数 c 不能是非正整数: c={c}")
    z = np.asarray(z, dtype=float)
    if np.any(z <= -1.0) or np.any(z > 1.0):
        raise DomainError("自变量 z 必须位于 (-1, 1] 内")
    at_one = z == 1.0
    if not np.any(at_one):
        return special.hyp2f1(a, b, c, z)
    result = np.empty_like(z)
    result[~at_one] = special.hyp2f1(a, b, c, z[~at_one])
    result[at_one] = gauss_limit(a, b, c)
    return result


@dataclass
class IdentityResiduals:
    """恒等式残差（不适用的恒等式为 None）"""

    derivative: Optional[float]
    quadratic_transformation: Optional[float]
    contiguous_lower_a: Optional[float]
    contiguous_lower_c: Optional[float]

    @property
    def max_residual(self) -> float:
        values = [v for v in asdict(self).values() if v is not None]
        return max(values) if values else 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def _derivative_residual(p: HypergeomParams, step: float) -> float:
    a, b, c, z = p.a, p.b, p.c, p.z
    h = min(step, 0.5 * (1.0 - abs(z)))
    finite_difference = (hyp2f1(p.at(z + h)) - hyp2f1(p.at(z - h))) / (2.0 * h)
    exact = a * b / c * hyp2f1(p.shifted(1.0, 1.0, 1.0))
    return abs(finite_difference - exact)


def _quadratic_residual(p: HypergeomParams) -> Optional[float]:
    """F(a,b;2b;z) = (½+½√(1-z))^{-2a} F(a, a-b+½; b+½; ((1-√(1-z))/(1+√(1-z)))²)"""
    a, b, z = p.a, p.b, p.z
    if is_nonpositive_integer(2.0 * b) or is_nonpositive_integer(b + 0.5):
        return None
    root = math.sqrt(1.0 - z)
    w = ((1.0 - root) / (1.0 + root)) ** 2
    lhs = hyp2f1(HypergeomParams(a, b, 2.0 * b, z))
    rhs = (0.5 + 0.5 * root) ** (-2.0 * a) * hyp2f1(HypergeomParams(a, a - b + 0.5, b + 0.5, w))
    return abs(lhs - rhs)


def _contiguous_lower_a(p: HypergeomParams) -> float:
    """(c-a-b)F(a,b;c;z) - (c-a)F(a-1,b;c;z) + b(1-z)F(a,b+1;c;z) = 0"""
    a, b, c, z = p.a, p.b, p.c, p.z
    value = ((c - a - b) * hyp2f1(p)
             - (c - a) * hyp2f1(p.shifted(da=-1.0))
             + b * (1.0 - z) * hyp2f1(p.shifted(db=1.0)))
    return abs(value)


def _contiguous_lower_c(p: HypergeomParams) -> Optional[float]:
    """(c-a-1)F(a,b;c;z) + aF(a+1,b;c;z) - (c-1)F(a,b;c-1;z) = 0"""
    a, c = p.a, p.c
    if is_nonpositive_integer(c - 1.0):
        return None
    value = ((c - a - 1.0) * hyp2f1(p)
             + a * hyp2f1(p.shifted(da=1.0))
             - (c - 1.0) * hyp2f1(p.shifted(dc=-1.0)))
    return abs(value)


def identity_residuals(p: HypergeomParams, step: float = DERIVATIVE_STEP) -> IdentityResiduals:
    """计算各恒等式的残差 |lhs - rhs|

    Args:
        p: 超几何参数，要求 -1 < z < 1
        step: 中心差分步长

    Returns:
        IdentityResiduals 记录
    """
    if not (-1.0 < p.z < 1.0):
        raise DomainError(f"恒等式检验要求 -1 < z < 1: z={p.z}")
    return IdentityResiduals(
        derivative=_derivative_residual(p, step),
        quadratic_transformation=_quadratic_residual(p),
        contiguous_lower_a=_contiguous_lower_a(p),
        contiguous_lower_c=_contiguous_lower_c(p),
    )
