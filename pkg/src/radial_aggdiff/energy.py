"""
自由能

径向坐标下的自由能

    F[ρ] = (1/(m-1)) ∫ρ^m + (1/2)∬ W_k(x-y)ρ(x)ρ(y) + (χ/2)∫|x|²ρ

相互作用项取单边 ω 形式 σ_N ∫ ω(r)ρ(r)r^{N-1}dr（由 InteractionOperator 装配），
对称形式 potential.symmetric_interaction 作为交叉验证。
稳态的能量闭式与维里恒等式残差也在这里。
"""

import logging
from typing import Optional, Union

import numpy as np

from .density import entropy_integral, second_moment, shell_volumes
from .exceptions import ParameterError
from .kernel import surface_area
from .models import EnergyBreakdown, ModelParams, RadialDensity, SteadyState
from .potential import InteractionOperator, interaction_operator

logger = logging.getLogger(__name__)

DensityLike = Union[RadialDensity, SteadyState]


def _density_of(rho: DensityLike) -> RadialDensity:
    return rho.density if isinstance(rho, SteadyState) else rho


def evaluate(rho: DensityLike, params: ModelParams,
             operator: Optional[InteractionOperator] = None) -> EnergyBreakdown:
    """计算自由能分解

    Args:
        rho: 径向密度（或稳态）
        params: 模型参数
        operator: 预先装配的相互作用矩阵，省略时按 (N, k, 网格) 取缓存

    Returns:
        EnergyBreakdown

    Raises:
        ParameterError: ρ^m 的积分不是有限值
    """
    rho = _density_of(rho)
    sigma = surface_area(params.N)

    entropy_sum = entropy_integral(rho, params.m, params.N)
    if not np.isfinite(entropy_sum):
        raise ParameterError(f"熵项不可积: ∫ρ^m = {entropy_sum}")
    entropy = sigma * entropy_sum / (params.m - 1.0)

    if operator is None:
        operator = interaction_operator(params, rho.grid)
    interaction = operator.interaction_energy(rho.values)

    confinement = 0.5 * params.chi * second_moment(rho, params) if params.chi else 0.0
    return EnergyBreakdown(entropy, interaction, confinement)


def dilation_energy(rho: RadialDensity, params: ModelParams, lam: float) -> EnergyBreakdown:
    """伸缩密度 ρ_λ = λ^N ρ(λ·) 的能量"""
    return evaluate(rho.dilate(lam, params.N), params)


def confinement_potential(grid: np.ndarray, N: int) -> np.ndarray:
    """单元平均的 r²/2"""
    return 0.5 * shell_volumes(grid, N, power=2) / shell_volumes(grid, N)


def first_variation(rho: RadialDensity, params: ModelParams,
                    operator: Optional[InteractionOperator] = None) -> np.ndarray:
    """离散一阶变分 (m/(m-1))ρ^{m-1} + S̃ + χ⟨r²/2⟩，按单元给出"""
    if operator is None:
        operator = interaction_operator(params, rho.grid)
    m = params.m
    xi = m / (m - 1.0) * rho.values ** (m - 1.0) + operator.cell_potential(rho.values)
    if params.chi:
        xi = xi + params.chi * confinement_potential(rho.grid, params.N)
    return xi


def _moment_sum(rho: RadialDensity, N: int) -> float:
    """∫a² dā = Σ ρ_j ∫ a^{N+1} da（不含 σ_N）"""
    return float(np.dot(rho.values, shell_volumes(rho.grid, N, power=2)))


def stationary_energy_identity(rho_bar: DensityLike, params: ModelParams) -> float:
    """稳态能量的闭式

    F[ρ̄] = Nσ_N[(1/(N(m-1)) + 1/k)∫ρ̄^m a^{N-1}da + (χ/N)(1/2 - 1/k)∫a²dā]

    牛顿情形 k = 2-N 也是同一公式。只对（近似）稳态有意义。
    """
    rho_bar = _density_of(rho_bar)
    N, k, m = params.N, params.k, params.m
    entropy_sum = entropy_integral(rho_bar, m, N)
    moment = _moment_sum(rho_bar, N)
    bracket = (1.0 / (N * (m - 1.0)) + 1.0 / k) * entropy_sum
    bracket += params.chi / N * (0.5 - 1.0 / k) * moment
    return N * surface_area(N) * bracket


def virial_defect(rho_bar: DensityLike, params: ModelParams,
                  operator: Optional[InteractionOperator] = None) -> float:
    """维里恒等式的带符号相对偏差

    (∫ρ̄^m a^{N-1}da - (1/N)(∬_{s<b} b^k ϑ(s/b) ds̄ db̄ + χ∫b² db̄)) / ∫ρ̄^m a^{N-1}da
    """
    rho_bar = _density_of(rho_bar)
    N = params.N
    if operator is None:
        operator = interaction_operator(params, rho_bar.grid)
    entropy_sum = entropy_integral(rho_bar, params.m, N)
    if entropy_sum <= 0:
        return 0.0
    # ρᵀLρ 中已含 1/k
    pair = params.k * float(rho_bar.values.dot(operator.lower.dot(rho_bar.values)))
    rhs = (pair + params.chi * _moment_sum(rho_bar, N)) / N
    return (entropy_sum - rhs) / entropy_sum


def virial_identity_residual(rho_bar: DensityLike, params: ModelParams,
                             operator: Optional[InteractionOperator] = None) -> float:
    """维里恒等式的相对残差 |virial_defect|"""
    residual = abs(virial_defect(rho_bar, params, operator))
    logger.debug(f"维里残差 {residual:.3e}")
    return residual


def energy_identity_defect(rho_bar: DensityLike, params: ModelParams,
                           operator: Optional[InteractionOperator] = None) -> float:
    """直接能量与稳态闭式之差，除以 |闭式|（带符号）"""
    closed_form = stationary_energy_identity(rho_bar, params)
    if closed_form == 0:
        return 0.0
    direct = evaluate(rho_bar, params, operator).total
    return (direct - closed_form) / abs(closed_form)
