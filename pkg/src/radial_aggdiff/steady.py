"""
径向稳态

稳态满足 ∇ρ̄^m = -ρ̄∇S̄_k - χxρ̄，在支撑上等价于

    (m/(m-1))ρ̄^{m-1} + W_k∗ρ̄ + χr²/2 = C.

SteadyStateSolver 用带阻尼的 Euler–Lagrange 不动点迭代求解，Lagrange 常数 C 由
质量方程的有界求根确定。积分形式的刻画与加权恒等式只用来检验结果。
"""

import logging
import math
import time
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import optimize

from .density import bisect_cells, cumulative_mass, mass, shell_volumes
from .energy import (confinement_potential, energy_identity_defect, first_variation, virial_defect,
                     virial_identity_residual)
from .exceptions import (CollapseError, ConvergenceError, DegenerateSupportError,
                         ParameterError, RegimeError)
from .kernel import surface_area
from .models import ModelParams, RadialDensity, SteadyState
from .potential import convolve, interaction_operator, potential_derivative
from .utils import gauss_legendre, graded_rule, on_interval

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 20000
DEFAULT_DAMPING = 0.5
MIN_DAMPING = 1.0 / 64.0
MASS_TOL = 1e-12
MIN_SUPPORT_CELLS = 2

# 加权恒等式中每个单元的 Gauss–Legendre 阶数
WEIGHT_ORDER = 8

# 积分刻画中每半个单元的加密层数与阶数
CHAR_LEVELS = 3
CHAR_ORDER = 4


class SteadyStateSolver:
    """Euler–Lagrange 不动点求解器

    ρ^{n+1} = [((m-1)/m)(C_n - S̃[ρ^n] - χ⟨r²/2⟩)]_+^{1/(m-1)}，
    C_n 使质量等于 M；更新 ρ ← (1-τ)ρ + τρ^{n+1}，L¹ 变化增大时 τ 减半。
    """

    def __init__(self, params: ModelParams, tol: float = DEFAULT_TOL,
                 max_iter: int = DEFAULT_MAX_ITER, damping: float = DEFAULT_DAMPING):
        self.logger = logging.getLogger(__name__)
        self.params = params
        self.tol = tol
        self.max_iter = max_iter
        self.damping = damping
        self._check_regime()

        if not tol > 0:
            raise ParameterError(f"收敛容差必须为正: {tol}")
        if not 0 < damping <= 1:
            raise ParameterError(f"阻尼系数必须位于 (0, 1]: {damping}")

        self.stats = {
            'solves': 0,
            'total_iterations': 0,
            'damping_reductions': 0,
            'solve_time': 0.0,
        }

    def _check_regime(self):
        p = self.params
        if p.regime == "fair-competition":
            return
        if p.regime == "diffusion-dominated" and p.chi == 0:
            return
        raise RegimeError(
            f"参数不在可求解区域: regime={p.regime}, chi={p.chi}"
            f"（需要 m > m_c 且 χ=0，或 m = m_c）"
        )

    def _profile(self, level: float, potential: np.ndarray) -> np.ndarray:
        m = self.params.m
        base = np.maximum((m - 1.0) / m * (level - potential), 0.0)
        return base ** (1.0 / (m - 1.0))

    def _lagrange_constant(self, potential: np.ndarray, volumes: np.ndarray, sigma: float) -> float:
        """求 C 使 σ_N Σ ρ_C vol = M"""
        target = self.params.M

        def excess(level):
            return sigma * float(np.dot(self._profile(level, potential), volumes)) - target

        lower = float(np.min(potential))
        spread = max(float(np.max(potential)) - lower, 1.0)
        upper = lower + spread
        while excess(upper) < 0:
            spread *= 2.0
            upper = lower + spread
            if not math.isfinite(upper):
                raise ConvergenceError("无法为 Lagrange 常数找到包围区间")
        return optimize.brentq(excess, lower, upper, xtol=1e-15 * max(1.0, abs(upper)), rtol=1e-15)

    def solve(self, init: RadialDensity) -> SteadyState:
        """从初值迭代到稳态

        Args:
            init: 初始密度（质量必须为正，会被缩放到 M）

        Returns:
            SteadyState，诊断信息中包含 m*、区域、EL 方差与质量误差

        Raises:
            DegenerateSupportError: 初值质量为零
            CollapseError: 支撑塌缩到少于 2 个单元
            ConvergenceError: max_iter 次迭代后仍未收敛
        """
        params = self.params
        start = time.time()
        grid = init.grid
        volumes = shell_volumes(grid, params.N)
        sigma = surface_area(params.N)

        initial_mass = mass(init, params)
        if not initial_mass > 0:
            raise DegenerateSupportError("初值质量为零，无法求稳态")
        rho = init.values * (params.M / initial_mass)

        operator = interaction_operator(params, grid)
        confinement = params.chi * confinement_potential(grid, params.N) if params.chi else 0.0

        tau = self.damping
        previous_change = math.inf
        change = math.inf
        for iteration in range(1, self.max_iter + 1):
            potential = operator.cell_potential(rho) + confinement
            level = self._lagrange_constant(potential, volumes, sigma)
            fresh = self._profile(level, potential)
            fresh *= params.M / (sigma * float(np.dot(fresh, volumes)))

            if np.count_nonzero(fresh > 0) < MIN_SUPPORT_CELLS:
                raise CollapseError(
                    f"第 {iteration} 次迭代支撑塌缩到 {np.count_nonzero(fresh > 0)} 个单元"
                    f"（吸引占优或质量超临界）"
                )

            change = sigma * float(np.dot(np.abs(fresh - rho), volumes)) / params.M
            if change > previous_change and tau > MIN_DAMPING:
                tau = max(0.5 * tau, MIN_DAMPING)
                self.stats['damping_reductions'] += 1
                self.logger.debug(f"第 {iteration} 次迭代 L¹ 变化增大，阻尼降为 {tau:g}")
            previous_change = change

            if change <= self.tol:
                rho = fresh
                break
            rho = (1.0 - tau) * rho + tau * fresh
        else:
            raise ConvergenceError(
                f"稳态迭代 {self.max_iter} 次未收敛，最后 L¹ 变化 {change:.3e}"
            )

        density = RadialDensity(grid, rho)
        state = SteadyState(
            density=density,
            lagrange_constant=level,
            support_radius=density.support_radius,
            iterations=iteration,
            residual=change,
        )
        state.diagnostics = self._diagnostics(state, tau)

        elapsed = time.time() - start
        self.stats['solves'] += 1
        self.stats['total_iterations'] += iteration
        self.stats['solve_time'] += elapsed
        self.logger.info(
            f"稳态收敛: {iteration} 次迭代, C={level:.10g}, R={state.support_radius:.6g}, "
            f"用时 {elapsed:.2f}s"
        )
        return state

    def solve_pair(self, init: RadialDensity) -> Tuple[SteadyState, SteadyState]:
        """在 J 个单元与对分后的 2J 个单元上各求一次稳态，细网格从粗网格的解出发"""
        coarse = self.solve(init)
        fine = self.solve(bisect_cells(coarse.density))
        return coarse, fine

    def _diagnostics(self, state: SteadyState, tau: float) -> dict:
        params = self.params
        density = state.density
        touches = bool(density.values[-1] > 0)
        if touches:
            self.logger.warning("稳态支撑到达网格外边界，请增大 r_max")
        if params.m >= params.m_star:
            self.logger.warning(f"m={params.m:g} 不小于 m*={params.m_star:g}，全局极小刻画不保证成立")
        return {
            'converged': True,
            'regime': params.regime,
            'm_c': params.m_c,
            'm_star': params.m_star if math.isfinite(params.m_star) else None,
            'support_cells': density.support_cells,
            'support_touches_boundary': touches,
            'final_damping': tau,
            'el_variance': el_level_variance(state, params),
            'mass_error': abs(mass(density, params) - params.M),
        }

    def get_statistics(self) -> dict:
        return dict(self.stats)


def solve(params: ModelParams, init: RadialDensity, tol: float = DEFAULT_TOL,
          max_iter: int = DEFAULT_MAX_ITER, damping: float = DEFAULT_DAMPING) -> SteadyState:
    """求稳态（SteadyStateSolver 的函数式入口）"""
    return SteadyStateSolver(params, tol=tol, max_iter=max_iter, damping=damping).solve(init)


def el_level_variance(ss: SteadyState, params: ModelParams) -> float:
    """支撑上一阶变分的方差"""
    density = ss.density
    support = density.values > 0
    if not np.any(support):
        return 0.0
    xi = first_variation(density, params)
    return float(np.var(xi[support]))


def _newtonian_drift(density: RadialDensity, params: ModelParams, a: np.ndarray,
                     b: np.ndarray, cells: np.ndarray) -> np.ndarray:
    """∫_a^b M(s) s^{1-N} ds，a, b 位于单元 cells 内"""
    N = params.N
    sigma = surface_area(N)
    rho = density.values[cells]
    left = density.grid[cells]
    inside = cumulative_mass(density, params, left)
    coefficient = inside - sigma * rho * left ** N / N
    safe_a = np.where(a > 0, a, 1.0)
    power_part = (b ** (2 - N) - safe_a ** (2 - N)) / (2 - N)
    # 第 0 个单元系数为零，a = 0 处的发散项不参与
    power_term = np.where(coefficient != 0, coefficient * power_part, 0.0)
    return power_term + sigma * rho / N * (b ** 2 - a ** 2) / 2.0


def _half_cell_drift(density: RadialDensity, params: ModelParams, end: int):
    """每个支撑单元左右两半上的 ∫ S̄′(s) ds

    S̄′ 在单元端点（密度跳跃处）有 |s - r_j|^{N-1+k} 型尖点，两半各自向端点加密。
    """
    grid = density.grid
    a, b = grid[:end], grid[1:end + 1]
    centers = density.centers[:end]
    t, w = graded_rule(CHAR_LEVELS, CHAR_ORDER)
    left_nodes = a[:, None] + (centers - a)[:, None] * t
    right_nodes = b[:, None] - (b - centers)[:, None] * t
    nodes = np.concatenate((left_nodes, right_nodes)).ravel()
    slopes = potential_derivative(density, params, nodes).reshape(2 * end, t.size)
    left = (centers - a) * slopes[:end].dot(w)
    right = (b - centers) * slopes[end:].dot(w)
    return left, right


def characterization_rhs(ss: SteadyState, params: ModelParams) -> np.ndarray:
    """积分刻画的右端 ∫_r^∞ ρ̄(s)(S̄′(s) + χs) ds，在单元中点处求值

    S̄′ 由核导数的分裂形式直接给出（potential_derivative），牛顿情形用
    M_ρ̄(s)s^{1-N} 的闭式积分。
    """
    density = ss.density
    grid = density.grid
    J = density.cell_count
    end = max(density.support_cells, 1)
    rho = density.values[:end]
    centers = density.centers[:end]
    cells = np.arange(end)

    if params.is_newtonian:
        whole = rho * _newtonian_drift(density, params, grid[:end], grid[1:end + 1], cells)
        partial = rho * _newtonian_drift(density, params, centers, grid[1:end + 1], cells)
    else:
        left, right = _half_cell_drift(density, params, end)
        whole = rho * (left + right)
        partial = rho * right

    if params.chi:
        whole = whole + params.chi * rho * (grid[1:end + 1] ** 2 - grid[:end] ** 2) / 2.0
        partial = partial + params.chi * rho * (grid[1:end + 1] ** 2 - centers ** 2) / 2.0

    # 严格位于当前单元右侧的贡献
    tail = np.concatenate((np.cumsum(whole[::-1])[::-1][1:], [0.0]))
    rhs = np.zeros(J)
    rhs[:end] = tail + partial
    return rhs


def characterization_defect(ss: SteadyState, params: ModelParams,
                            scale: Optional[float] = None) -> np.ndarray:
    """单元中点处的 (ρ̄_i^m - RHS(c_i)) / scale，scale 默认 sup ρ̄^m"""
    lhs = ss.density.values ** params.m
    if scale is None:
        scale = float(np.max(lhs))
    if scale <= 0:
        return np.zeros(lhs.size)
    return (lhs - characterization_rhs(ss, params)) / scale


def characterization_residual(ss: SteadyState, params: ModelParams) -> float:
    """sup_i |ρ̄_i^m - RHS(c_i)| / sup ρ̄^m"""
    residual = float(np.max(np.abs(characterization_defect(ss, params))))
    logger.debug(f"刻画残差 {residual:.3e}")
    return residual


def richardson(coarse, fine, order: int = 2):
    """网格加密一倍的 Richardson 外推 fine + (fine - coarse)/(2^order - 1)"""
    return fine + (fine - coarse) / (2.0 ** order - 1.0)


def self_consistency(coarse: SteadyState, fine: SteadyState, params: ModelParams) -> dict:
    """J 与 2J 两层稳态上的自洽性检验及其外推值

    fine 的网格必须由 coarse 的网格对分得到。刻画偏差在粗网格中点处比较：
    细网格两个子单元中点上的偏差取平均。维里与能量闭式偏差是标量，直接外推。

    Returns:
        每个检验名下的 {'coarse', 'fine', 'extrapolated'}（均为非负）
    """
    coarse_grid = coarse.density.grid
    fine_grid = fine.density.grid
    if fine_grid.size != 2 * coarse_grid.size - 1 or not np.allclose(fine_grid[::2], coarse_grid):
        raise ParameterError("细网格必须由粗网格逐单元对分得到")

    scale = float(np.max(fine.density.values ** params.m))
    coarse_defect = characterization_defect(coarse, params, scale)
    fine_defect = characterization_defect(fine, params, scale)
    fine_at_centers = 0.5 * (fine_defect[0::2] + fine_defect[1::2])
    extrapolated = richardson(coarse_defect, fine_at_centers)

    checks = {
        'characterization': {
            'coarse': float(np.max(np.abs(coarse_defect))),
            'fine': float(np.max(np.abs(fine_defect))),
            'extrapolated': float(np.max(np.abs(extrapolated))),
        },
    }
    for name, defect in (('virial', virial_defect), ('energy_identity', energy_identity_defect)):
        low = defect(coarse, params)
        high = defect(fine, params)
        checks[name] = {
            'coarse': abs(low),
            'fine': abs(high),
            'extrapolated': abs(richardson(low, high)),
        }
    logger.debug(f"自洽性检验: {checks}")
    return checks


def _cumulative_weight(g: Callable, grid: np.ndarray, N: int, points: np.ndarray,
                       cells: np.ndarray, node_values: np.ndarray) -> np.ndarray:
    """G(b) = ∫₀^b g(a) a^{N-1} da 在给定点处的值"""
    x, w = gauss_legendre(WEIGHT_ORDER)
    left = grid[cells]
    span = points - left
    inner = left[:, None] + span[:, None] * x[None, :]
    integrand = np.asarray(g(inner), dtype=float) * inner ** (N - 1)
    return node_values[cells] + span * integrand.dot(w)


def g_weighted_identity_residual(ss: SteadyState, g: Optional[Callable], params: ModelParams) -> float:
    """加权恒等式 ∫gρ̄^m a^{N-1} = ∫ρ̄(b)(S̄′(b)+χb)G(b) db 的相对残差

    g 为 None 时取单位权重 g ≡ 1，结果与 virial_identity_residual 相同。
    其余情形对 ∫G S̄′ 分部积分：[G S̄] - ∫ g b^{N-1} S̄ db，再按单元做 Gauss–Legendre 求积。

    Args:
        ss: 稳态
        g: 权重函数（接受 numpy 数组），在支撑上有界
        params: 模型参数

    Returns:
        残差除以 ∫|g|ρ̄^m a^{N-1}da
    """
    if g is None:
        return virial_identity_residual(ss.density, params)

    density = ss.density
    N = params.N
    grid = density.grid
    end = max(density.support_cells, 1)
    rho = density.values[:end]
    rule = gauss_legendre(WEIGHT_ORDER)

    # 节点处的 G
    node_values = np.zeros(end + 1)
    cell_weights = np.zeros(end)
    cell_abs_weights = np.zeros(end)
    for j in range(end):
        xs, ws = on_interval(rule, grid[j], grid[j + 1])
        gv = np.asarray(g(xs), dtype=float) * xs ** (N - 1)
        cell_weights[j] = float(np.dot(ws, gv))
        cell_abs_weights[j] = float(np.dot(ws, np.abs(gv)))
        node_values[j + 1] = node_values[j] + cell_weights[j]

    lhs = float(np.dot(cell_weights, rho ** params.m))
    scale = float(np.dot(cell_abs_weights, rho ** params.m))
    if scale <= 0:
        return 0.0

    at_nodes = convolve(density, params, grid[:end + 1])
    rhs = 0.0
    for j in range(end):
        xs, ws = on_interval(rule, grid[j], grid[j + 1])
        boundary = node_values[j + 1] * at_nodes[j + 1] - node_values[j] * at_nodes[j]
        bulk = float(np.dot(ws, np.asarray(g(xs), dtype=float) * xs ** (N - 1)
                            * convolve(density, params, xs)))
        drift = boundary - bulk
        if params.chi:
            big_g = _cumulative_weight(g, grid, N, xs, np.full(xs.size, j), node_values)
            drift += params.chi * float(np.dot(ws, big_g * xs))
        rhs += rho[j] * drift

    residual = abs(lhs - rhs) / scale
    logger.debug(f"加权恒等式残差 {residual:.3e}")
    return residual


def newtonian_profile(params: ModelParams, grid: np.ndarray) -> RadialDensity:
    """N=3, k=-1, m=2, χ=0 的闭式稳态 ρ̄(r) = (M/2π) sin(√(2π) r)/r，r < √(π/2)

    返回精确的单元平均。
    """
    if not (params.N == 3 and params.is_newtonian and abs(params.m - 2.0) < 1e-12 and params.chi == 0):
        raise ParameterError(f"闭式稳态只适用于 N=3, k=-1, m=2, χ=0: {params}")
    grid = np.asarray(grid, dtype=float)
    amplitude = params.M / (2.0 * math.pi)
    frequency = math.sqrt(2.0 * math.pi)
    radius = math.pi / frequency
    if grid[-1] < radius:
        raise ParameterError(f"网格半径 {grid[-1]:g} 小于稳态支撑半径 {radius:g}")

    def antiderivative(r):
        # ∫ r sin(ωr) dr
        return np.sin(frequency * r) / frequency ** 2 - r * np.cos(frequency * r) / frequency

    a = np.minimum(grid[:-1], radius)
    b = np.minimum(grid[1:], radius)
    cell_mass = amplitude * (antiderivative(b) - antiderivative(a))
    return RadialDensity(grid, np.maximum(cell_mass, 0.0) / shell_volumes(grid, 3))
