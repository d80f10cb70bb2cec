"""
径向相互作用核

对径向密度，幂律核 |x-y|^k 在单位球面上的角向平均化为

    Θ(r, η) = max(r,η)^k · ϑ(min(r,η)/max(r,η)),
    ϑ(s)    = d_N · F(-k/2, 1-(k+N)/2; N/2; s²).

本模块给出 σ_N、d_N、ϑ、ϑ′、Θ 以及几种独立的求值途径（角向求积、二次变换形式、
N = 2 的积分形式），供上层模块交叉验证。
"""

import logging
import math
from typing import Tuple

import numpy as np
from scipy import integrate

from .exceptions import DivergenceError, DomainError, KernelSingularityError, ParameterError
from .models import HypergeomParams, ModelParams
from .specfun import gamma, hyp2f1, hyp2f1_array, hyp2f1_integral

logger = logging.getLogger(__name__)

ANGLE_EPSREL = 1e-12
ANGLE_LIMIT = 400


def surface_area(N: int) -> float:
    """单位球面面积 σ_N = 2π^{N/2} / Γ(N/2)"""
    if N < 1:
        raise ParameterError(f"维数必须不小于 1: N={N}")
    return 2.0 * math.pi ** (N / 2.0) / gamma(N / 2.0)


def d_constant(N: int) -> float:
    """ϑ(0) = d_N = 2^{N-2} σ_{N-1} Γ((N-1)/2)² / Γ(N-1)"""
    if N < 2:
        raise ParameterError(f"维数必须不小于 2: N={N}")
    return 2.0 ** (N - 2) * surface_area(N - 1) * gamma((N - 1) / 2.0) ** 2 / gamma(N - 1.0)


def hypergeometric_parameters(params: ModelParams) -> Tuple[float, float, float]:
    """ϑ 中的超几何参数 (a, b, c) = (-k/2, 1-(k+N)/2, N/2)"""
    N, k = params.N, params.k
    return -k / 2.0, 1.0 - (k + N) / 2.0, N / 2.0


def _as_output(values: np.ndarray, scalar: bool):
    return float(values) if scalar else values


def theta(params: ModelParams, s):
    """角向核 ϑ_{k,N}(s)，s ∈ [0, 1]

    s = 1 仅当 k > 1-N（极限有限）时允许，否则抛出 KernelSingularityError。
    接受标量或 numpy 数组。
    """
    scalar = np.ndim(s) == 0
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(s > 1):
        raise DomainError("ϑ 的自变量必须位于 [0, 1] 内")
    a, b, c = hypergeometric_parameters(params)
    try:
        values = d_constant(params.N) * hyp2f1_array(a, b, c, s * s)
    except DivergenceError as e:
        raise KernelSingularityError(
            f"ϑ 在 s=1 处发散（k={params.k:g} <= 1-N={1 - params.N}）"
        ) from e
    return _as_output(values, scalar)


def theta_prime(params: ModelParams, s):
    """ϑ′(s) = d_N · 2s · (ab/c) · F(a+1, b+1; c+1; s²)"""
    scalar = np.ndim(s) == 0
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(s > 1):
        raise DomainError("ϑ′ 的自变量必须位于 [0, 1] 内")
    a, b, c = hypergeometric_parameters(params)
    try:
        series = hyp2f1_array(a + 1.0, b + 1.0, c + 1.0, s * s)
    except DivergenceError as e:
        raise KernelSingularityError(f"ϑ′ 在 s=1 处发散（k={params.k:g}）") from e
    values = d_constant(params.N) * 2.0 * s * (a * b / c) * series
    return _as_output(values, scalar)


def big_theta(params: ModelParams, r, eta):
    """双变量核 Θ(r, η) = max^k · ϑ(min/max)，对角线 r = η 处抛出 KernelSingularityError"""
    scalar = np.ndim(r) == 0 and np.ndim(eta) == 0
    r, eta = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(eta, dtype=float))
    if np.any(r < 0) or np.any(eta < 0):
        raise DomainError("半径必须非负")
    if np.any(r == eta):
        raise KernelSingularityError("核 Θ 在对角线 r = η 上奇异")
    big = np.maximum(r, eta)
    small = np.minimum(r, eta)
    values = big ** params.k * np.asarray(theta(params, small / big))
    return _as_output(values, scalar)


def theta_by_angle(params: ModelParams, s: float) -> float:
    """角向求积得到的 ϑ(s)

    σ_{N-1} ∫₀^π (1+s²-2s cosθ)^{k/2} sin^{N-2}θ dθ，代换 t = cos²(θ/2) 后为
    σ_{N-1} 2^{N-2} ∫₀¹ ((1+s)²-4st)^{k/2} (t(1-t))^{(N-3)/2} dt。
    """
    N, k = params.N, params.k
    if not 0 <= s < 1:
        raise DomainError(f"角向求积要求 0 <= s < 1: s={s}")
    half = (N - 3) / 2.0
    value, abserr = integrate.quad(
        lambda t: ((1.0 + s) ** 2 - 4.0 * s * t) ** (k / 2.0),
        0.0, 1.0,
        weight='alg', wvar=(half, half),
        epsabs=0.0, epsrel=ANGLE_EPSREL, limit=ANGLE_LIMIT,
    )
    logger.debug(f"角向求积 ϑ({s:g}) = {value:.16g}，误差估计 {abserr:.2e}")
    return surface_area(N - 1) * 2.0 ** (N - 2) * value


def big_theta_by_angle(params: ModelParams, r: float, eta: float) -> float:
    """角向求积得到的 Θ(r, η)"""
    if r == eta:
        raise KernelSingularityError("核 Θ 在对角线 r = η 上奇异")
    big, small = max(r, eta), min(r, eta)
    return big ** params.k * theta_by_angle(params, small / big)


def theta_quadratic(params: ModelParams, u: float) -> float:
    """二次变换形式 2^{N-2} σ_{N-1} (1+u)^k H(-k/2, (N-1)/2; N-1; 4u/(1+u)²)

    使用标量级数求值，与 theta 的向量化路径相互独立。
    """
    N, k = params.N, params.k
    if not 0 <= u < 1:
        raise DomainError(f"二次变换形式要求 0 <= u < 1: u={u}")
    z = 4.0 * u / (1.0 + u) ** 2
    beta = gamma((N - 1) / 2.0) ** 2 / gamma(N - 1.0)
    series = hyp2f1(HypergeomParams(-k / 2.0, (N - 1) / 2.0, N - 1.0, z))
    return 2.0 ** (N - 2) * surface_area(N - 1) * (1.0 + u) ** k * beta * series


def planar_gamma_constant(k: float) -> float:
    """Γ_k = 2π / (Γ(-k/2) Γ(1+k/2))"""
    return 2.0 * math.pi / (gamma(-k / 2.0) * gamma(1.0 + k / 2.0))


def theta_planar_integral(params: ModelParams, t: float) -> float:
    """N = 2 时的积分形式 Γ_k H(-k/2, -k/2; 1; t²)"""
    if params.N != 2:
        raise ParameterError(f"积分形式仅适用于 N = 2: N={params.N}")
    if not 0 <= t < 1:
        raise DomainError(f"要求 0 <= t < 1: t={t}")
    k = params.k
    return planar_gamma_constant(k) * hyp2f1_integral(HypergeomParams(-k / 2.0, -k / 2.0, 1.0, t * t))
