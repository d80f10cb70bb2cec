"""
径向输运映射

单调映射 ψ′ 把源测度 ρ̄(a)a^{N-1}da 推前为目标测度 ρ(r)r^{N-1}dr：

    M_ρ(ψ′(a)) = M_ρ̄(a).

源网格按目标节点的原像加密后，每个加密单元内源密度与目标密度都是常数，
φ = d(ψ′^N)/d(a^N) 在单元内为常数并且等于两者之比，推前关系在离散层面精确成立。

这里还给出用 ψ′、φ 写出的自由能、三个 Jensen 型下界的间隙，以及从推前能量一直
降到稳态能量闭式的下界链。
"""

import logging
from dataclasses import asdict, dataclass
from typing import Callable, Dict, Tuple

import numpy as np

from .density import cumulative_mass, mass, shell_volumes
from .energy import stationary_energy_identity
from .exceptions import (DegenerateSupportError, KernelSingularityError,
                         MassMismatchError, ParameterError)
from .kernel import surface_area
from .models import EnergyBreakdown, ModelParams, RadialDensity, SteadyState, TransportMap
from .potential import InteractionOperator

logger = logging.getLogger(__name__)

MASS_MATCH_TOL = 1e-10
NODE_MERGE_TOL = 1e-10
# 成对 Jensen 间隙只在 b < a(1 - DIAGONAL_GAP) 上采样
DIAGONAL_GAP = 1e-6
MAX_PAIR_NODES = 200


def _positive_support(rho: RadialDensity, label: str) -> int:
    """支撑单元数，支撑内出现零值时抛出 DegenerateSupportError"""
    positive = np.nonzero(rho.values > 0)[0]
    if positive.size == 0:
        raise DegenerateSupportError(f"{label}密度的支撑长度为零")
    end = int(positive[-1]) + 1
    if positive.size != end:
        raise DegenerateSupportError(f"{label}密度在支撑内部存在零值单元")
    return end


def _invert_cumulative(rho: RadialDensity, params: ModelParams, end: int,
                       node_mass: np.ndarray, q: np.ndarray) -> np.ndarray:
    """在 ρ 的前 end 个单元上解 M_ρ(r) = q"""
    N = params.N
    sigma = surface_area(N)
    idx = np.clip(np.searchsorted(node_mass, q, side='right') - 1, 0, end - 1)
    left = rho.grid[idx]
    base = left ** N + N * (q - node_mass[idx]) / (sigma * rho.values[idx])
    return np.maximum(base, 0.0) ** (1.0 / N)


def build_map(source: RadialDensity, target: RadialDensity, params: ModelParams) -> TransportMap:
    """由累积质量反演构造 ψ′

    Args:
        source: 源密度 ρ̄
        target: 目标密度 ρ
        params: 模型参数（提供 N）

    Returns:
        定义在源支撑（加密网格）上的 TransportMap

    Raises:
        MassMismatchError: 两个密度质量的相对差超过 1e-10
        DegenerateSupportError: 支撑长度为零或支撑内有零值单元
    """
    N = params.N
    source_mass = mass(source, params)
    target_mass = mass(target, params)
    if abs(source_mass - target_mass) > MASS_MATCH_TOL * max(source_mass, target_mass):
        raise MassMismatchError(f"源与目标质量不一致: {source_mass:.16g} vs {target_mass:.16g}")

    source_end = _positive_support(source, "源")
    target_end = _positive_support(target, "目标")

    source_nodes = source.grid[:source_end + 1]
    target_nodes = target.grid[:target_end + 1]
    source_node_mass = cumulative_mass(source, params, source_nodes)
    target_node_mass = cumulative_mass(target, params, target_nodes)

    # 目标内部节点的原像
    interior = target_node_mass[1:-1]
    interior = interior[(interior > 0) & (interior < source_node_mass[-1])]
    preimages = _invert_cumulative(source, params, source_end, source_node_mass, interior)

    nodes = np.unique(np.concatenate((source_nodes, preimages)))
    keep = np.concatenate(([True], np.diff(nodes) > NODE_MERGE_TOL * nodes[-1]))
    nodes = nodes[keep]
    nodes[-1] = source_nodes[-1]

    psi_prime = _invert_cumulative(target, params, target_end, target_node_mass,
                                   cumulative_mass(source, params, nodes))
    psi_prime[0] = 0.0
    psi_prime[-1] = target_nodes[-1]

    phi = np.diff(psi_prime ** N) / np.diff(nodes ** N)
    midpoints = 0.5 * (nodes[1:] + nodes[:-1])
    source_values = source.value_at(midpoints)

    transport = TransportMap(N, nodes, psi_prime, phi, source_values)
    logger.debug(f"构造输运映射: {transport}")
    return transport


def transport_weight(transport: TransportMap, params: ModelParams) -> Callable[[np.ndarray], np.ndarray]:
    """权重 g = φ^{k/N}，供加权恒等式使用"""
    exponent = params.k / params.N

    def weight(a):
        return transport.phi_at(a) ** exponent

    return weight


def _check_source(transport: TransportMap, source_ss: SteadyState):
    midpoints = 0.5 * (transport.source_grid[1:] + transport.source_grid[:-1])
    expected = source_ss.density.value_at(midpoints)
    if not np.allclose(expected, transport.source_values, rtol=1e-12, atol=0.0):
        raise ParameterError("输运映射不是由该稳态构造的")


def pushforward_energy(transport: TransportMap, source_ss: SteadyState,
                       params: ModelParams) -> EnergyBreakdown:
    """用 ψ′、φ 与 ρ̄ 写出的 F[ρ]

    熵项 (1/(m-1))∫φ^{1-m}ρ̄^m a^{N-1}da，相互作用项
    (1/k)∬_{b<a} ψ′(a)^k ϑ(ψ′(b)/ψ′(a)) db̄ dā（映射后的单元矩阵），
    约束项 (χ/2)∫ψ′(a)² dā，均带 σ_N。
    """
    issues = transport.monotonicity_issues()
    if issues:
        raise KernelSingularityError("输运映射不单调: " + "; ".join(issues))
    _check_source(transport, source_ss)

    N, m = params.N, params.m
    sigma = surface_area(N)
    grid = transport.source_grid
    volumes = shell_volumes(grid, N)
    rho_bar = transport.source_values
    phi = transport.phi

    entropy = sigma / (m - 1.0) * float(np.dot(phi ** (1.0 - m) * rho_bar ** m, volumes))

    operator = InteractionOperator(params, grid, radius_map=transport.psi_prime_at)
    interaction = operator.interaction_energy(rho_bar)

    confinement = 0.0
    if params.chi:
        psi = transport.psi_prime
        moment = np.diff(psi ** (N + 2)) / ((N + 2) * phi)
        confinement = 0.5 * params.chi * sigma * float(np.dot(rho_bar, moment))
    return EnergyBreakdown(entropy, interaction, confinement)


@dataclass
class JensenGaps:
    """三个 Jensen 下界在采样节点上的最小间隙

    interaction_origin / interaction_pair / confinement 是相对间隙：
    前两者为 (上界 - 值)/值，约束项为 (值 - 下界)/值，值取 ψ′ 一侧（恒为正）。
    absolute_* 是未归一化的 min(上界 - 值)（约束项为 min(值 - 下界)）。
    两组都应 >= 0，伸缩映射上取等号。
    """

    interaction_origin: float
    interaction_pair: float
    confinement: float
    samples: int
    absolute_origin: float = 0.0
    absolute_pair: float = 0.0
    absolute_confinement: float = 0.0

    @property
    def min_gap(self) -> float:
        return min(self.interaction_origin, self.interaction_pair, self.confinement)

    @property
    def min_absolute_gap(self) -> float:
        return min(self.absolute_origin, self.absolute_pair, self.absolute_confinement)

    def to_dict(self) -> dict:
        result = asdict(self)
        result['min_gap'] = self.min_gap
        result['min_absolute_gap'] = self.min_absolute_gap
        return result


def _phi_moment(transport: TransportMap, q: float) -> np.ndarray:
    """节点处的 Φ_q(a) = ∫₀^a φ^{q/N} s^{N-1} ds"""
    N = transport.N
    cells = transport.phi ** (q / N) * shell_volumes(transport.source_grid, N)
    return np.concatenate(([0.0], np.cumsum(cells)))


def jensen_gap(transport: TransportMap, params: ModelParams) -> JensenGaps:
    """在映射节点上采样三个 Jensen 不等式的间隙（相对与绝对）

    (ψ′(a))^k <= N a^{k-N} Φ_k(a)
    (ψ′(a)^N - ψ′(b)^N)^{k/N} <= N (a^N - b^N)^{k/N-1} (Φ_k(a) - Φ_k(b)),  b < a
    (ψ′(a))² >= N a^{2-N} Φ_2(a)
    """
    N, k = params.N, params.k
    a = transport.source_grid[1:]
    psi = transport.psi_prime[1:]
    phi_k = _phi_moment(transport, k)[1:]
    phi_2 = _phi_moment(transport, 2.0)[1:]

    origin_value = psi ** k
    origin = N * a ** (k - N) * phi_k - origin_value

    conf_value = psi ** 2
    confinement = conf_value - N * a ** (2 - N) * phi_2

    idx = np.unique(np.linspace(0, a.size - 1, min(a.size, MAX_PAIR_NODES)).astype(int))
    aa, bb = np.meshgrid(a[idx], a[idx], indexing='ij')
    pa, pb = np.meshgrid(psi[idx], psi[idx], indexing='ij')
    ka, kb = np.meshgrid(phi_k[idx], phi_k[idx], indexing='ij')
    mask = bb < aa * (1.0 - DIAGONAL_GAP)
    if np.any(mask):
        pair_value = (pa[mask] ** N - pb[mask] ** N) ** (k / N)
        bound = N * (aa[mask] ** N - bb[mask] ** N) ** (k / N - 1.0) * (ka[mask] - kb[mask])
        difference = bound - pair_value
        pair = float(np.min(difference / pair_value))
        pair_absolute = float(np.min(difference))
    else:
        pair = pair_absolute = 0.0

    gaps = JensenGaps(
        interaction_origin=float(np.min(origin / origin_value)),
        interaction_pair=pair,
        confinement=float(np.min(confinement / conf_value)),
        samples=int(a.size + np.count_nonzero(mask)),
        absolute_origin=float(np.min(origin)),
        absolute_pair=pair_absolute,
        absolute_confinement=float(np.min(confinement)),
    )
    logger.debug(f"Jensen 间隙: {gaps.to_dict()}")
    return gaps


def z_bound_gaps(params: ModelParams, z) -> Tuple[np.ndarray, np.ndarray]:
    """逐点下界的间隙，z > 0

    熵:   z^{1-m}/(m-1) - z^{1-m_c}/(m_c-1) - (1/(m-1) - 1/(m_c-1))，m = m_c 时恒为 0
    约束: z^{2/N}/2 - z^{k/N}/k - (1/2 - 1/k)

    两者在 z = 1 处为零，其余处非负（约束项严格为正）。
    """
    N, k, m = params.N, params.k, params.m
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ParameterError("z 必须为正")
    m_c = params.m_c
    if params.is_fair_competition:
        entropy = np.zeros_like(z)
    else:
        entropy = (z ** (1.0 - m) / (m - 1.0) - z ** (1.0 - m_c) / (m_c - 1.0)
                   - (1.0 / (m - 1.0) - 1.0 / (m_c - 1.0)))
    confinement = z ** (2.0 / N) / 2.0 - z ** (k / N) / k - (0.5 - 1.0 / k)
    return entropy, confinement


def energy_lower_bound(transport: TransportMap, source_ss: SteadyState,
                       params: ModelParams) -> Dict[str, float]:
    """从 F[ρ] 到 F[ρ̄] 的下界链

    pushforward:  F[ρ]（推前形式）
    jensen_bound: 切线不等式、Jensen 与稳态加权恒等式之后的下界
                  σ_N ∫(φ^{1-m}/(m-1) - φ^{1-m_c}/(m_c-1)) ρ̄^m a^{N-1}da
                  + Nσ_N χ ∫ ρ̄(a) a C(a) da，C(a) = ∫₀^a (φ^{2/N}/2 - φ^{k/N}/k) s^{N-1} ds
    z_bound:      逐点 z 下界之后的值，即稳态能量闭式

    理论上 pushforward >= jensen_bound >= z_bound。
    """
    N, k, m = params.N, params.k, params.m
    sigma = surface_area(N)
    grid = transport.source_grid
    volumes = shell_volumes(grid, N)
    rho_bar = transport.source_values
    phi = transport.phi

    pushforward = pushforward_energy(transport, source_ss, params).total

    if params.is_fair_competition:
        entropy_weight = np.zeros_like(phi)
    else:
        m_c = params.m_c
        entropy_weight = phi ** (1.0 - m) / (m - 1.0) - phi ** (1.0 - m_c) / (m_c - 1.0)
    bound = sigma * float(np.dot(entropy_weight * rho_bar ** m, volumes))

    if params.chi:
        c = phi ** (2.0 / N) / 2.0 - phi ** (k / N) / k
        prefix = np.concatenate(([0.0], np.cumsum(c * volumes)))[:-1]
        left, right = grid[:-1], grid[1:]
        cell = ((prefix - c * left ** N / N) * (right ** 2 - left ** 2) / 2.0
                + c * (right ** (N + 2) - left ** (N + 2)) / (N * (N + 2)))
        bound += N * sigma * params.chi * float(np.dot(rho_bar, cell))

    return {
        'pushforward': pushforward,
        'jensen_bound': bound,
        'z_bound': stationary_energy_identity(source_ss.density, params),
    }
