"""
平均场势

径向密度的势 S_k = W_k ∗ ρ 按分裂公式

    k·S_k(r) = r^k ∫₀^r ϑ(η/r) ρ η^{N-1} dη + ∫_r^∞ η^k ϑ(r/η) ρ η^{N-1} dη

计算。η = r 附近的可积奇性 |r-η|^{N-1+k} 用向奇点几何加密（比例 2）的复合规则处理，
最内层面板使用 Gauss–Jacobi 规则；远离奇点的单元使用 Gauss–Legendre。
牛顿情形 k = 2-N 使用壳定理的闭式。

InteractionOperator 把单元间的积分装配成矩阵，供能量、稳态迭代与时间推进复用。
"""

import logging
import threading
import time
from collections import OrderedDict
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .density import cumulative_mass, shell_volumes
from .exceptions import KernelSingularityError, ParameterError
from .kernel import big_theta_by_angle, surface_area, theta, theta_prime
from .models import ModelParams, PotentialProfile, RadialDensity
from .utils import gauss_legendre, graded_rule, on_interval

logger = logging.getLogger(__name__)

RadiusMap = Callable[[np.ndarray], np.ndarray]

# ϑ 的自变量截断
S_CAP = 1.0 - 1e-9

# 内层积分的求积参数
FAR_ORDER = 8
NEAR_ORDER = 8
NEAR_LEVELS = 22

# 外层（单元 i 上）积分的求积参数
OUTER_ORDER = 4
OUTER_LEVELS = 10

# 对称形式能量的单元求积参数
SYMMETRIC_ORDER = 4
SYMMETRIC_LEVELS = 6

# 势导数：远离 s 的单元的 Gauss–Legendre 阶数，s 两侧配对求积的加密层数
DERIVATIVE_FAR_ORDER = 6
PAIR_LEVELS = 12

# 角向求积参照值的精度
ORACLE_EPSREL = 1e-10

MAX_CACHED_OPERATORS = 16


def _kernel(params: ModelParams, x, eta, radius_map: Optional[RadiusMap] = None) -> np.ndarray:
    """Θ(R(x), R(η))，R 为可选的半径映射"""
    x = np.asarray(x, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if radius_map is not None:
        x = radius_map(x)
        eta = radius_map(eta)
    big = np.maximum(x, eta)
    small = np.minimum(x, eta)
    s = np.minimum(small / big, S_CAP)
    return big ** params.k * theta(params, s)


def _segment_rule(a: float, b: float, x: float, exponent: float):
    """[a,b] 上的求积规则，x 为核奇点（不在开区间 (a,b) 内）"""
    width = b - a
    if x <= a:
        distance, toward = a - x, 'left'
    else:
        distance, toward = x - b, 'right'
    if distance >= width:
        return on_interval(gauss_legendre(FAR_ORDER), a, b)
    rule = graded_rule(NEAR_LEVELS, NEAR_ORDER, exponent if distance == 0 else 0.0)
    return on_interval(rule, a, b, toward=toward)


def _segment_integral(params: ModelParams, x: float, a: float, b: float,
                      radius_map: Optional[RadiusMap] = None) -> float:
    """∫_a^b Θ(x, η) η^{N-1} dη，x ∉ (a, b)"""
    if b <= a:
        return 0.0
    nodes, weights = _segment_rule(a, b, x, params.singularity_exponent)
    values = _kernel(params, x, nodes, radius_map) * nodes ** (params.N - 1)
    return float(np.dot(weights, values))


def cell_integrals(params: ModelParams, x: float, grid: np.ndarray,
                   radius_map: Optional[RadiusMap] = None) -> np.ndarray:
    """每个单元 j 上的 ∫_{cell j} Θ(x, η) η^{N-1} dη

    远离 x 的单元一次性向量化求值，靠近或包含 x 的单元逐个加密。
    """
    grid = np.asarray(grid, dtype=float)
    a, b = grid[:-1], grid[1:]
    width = b - a
    result = np.empty(a.size)
    distance = np.maximum(a - x, 0.0) + np.maximum(x - b, 0.0)
    far = distance >= width

    if np.any(far):
        gx, gw = gauss_legendre(FAR_ORDER)
        nodes = a[far, None] + width[far, None] * gx
        values = _kernel(params, x, nodes, radius_map) * nodes ** (params.N - 1)
        result[far] = values.dot(gw) * width[far]

    for j in np.nonzero(~far)[0]:
        if a[j] < x < b[j]:
            result[j] = (_segment_integral(params, x, a[j], x, radius_map)
                         + _segment_integral(params, x, x, b[j], radius_map))
        else:
            result[j] = _segment_integral(params, x, a[j], b[j], radius_map)
    return result


def _support_prefix(rho: RadialDensity) -> int:
    """最后一个正值单元之后的单元下标"""
    positive = np.nonzero(rho.values > 0)[0]
    return int(positive[-1]) + 1 if positive.size else 0


def _newtonian_convolve(rho: RadialDensity, params: ModelParams, r: np.ndarray) -> np.ndarray:
    """k·S(r) = r^{2-N} M_ρ(r) + σ_N ∫_r^∞ η ρ dη"""
    N = params.N
    inside = np.asarray(cumulative_mass(rho, params, r), dtype=float)
    safe_r = np.where(r > 0, r, 1.0)
    near_term = np.where(r > 0, safe_r ** (2 - N) * inside, 0.0)

    # ∫_r^∞ η ρ dη
    cell_first = rho.values * shell_volumes(rho.grid, 2)
    suffix = np.concatenate((np.cumsum(cell_first[::-1])[::-1], [0.0]))
    r_clipped = np.minimum(r, rho.r_max)
    idx = np.clip(np.searchsorted(rho.grid, r_clipped, side='right') - 1, 0, rho.cell_count - 1)
    partial = rho.values[idx] * (rho.grid[idx + 1] ** 2 - r_clipped ** 2) / 2.0
    far_term = surface_area(N) * (suffix[idx + 1] + partial)
    return (near_term + far_term) / params.k


def convolve(rho: RadialDensity, params: ModelParams, r):
    """W_k ∗ ρ 在 |x| = r 处的值，接受标量或数组"""
    scalar = np.ndim(r) == 0
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0):
        raise ParameterError("半径必须非负")

    if params.is_newtonian:
        values = _newtonian_convolve(rho, params, r)
    else:
        end = _support_prefix(rho)
        grid = rho.grid[:end + 1]
        weights = rho.values[:end]
        values = np.array([
            float(np.dot(weights, cell_integrals(params, x, grid))) if end else 0.0
            for x in r
        ]) / params.k
    return float(values[0]) if scalar else values


def _derivative_kernel(params: ModelParams, s: float, t: np.ndarray) -> np.ndarray:
    """S′(s) = ∫ K(s,t) ρ(t) t^{N-1} dt 的核

    t < s: K = s^{k-1}ϑ(t/s) - s^{k-2} t ϑ′(t/s)/k
    t > s: K = t^{k-1}ϑ′(s/t)/k
    """
    k = params.k
    t = np.asarray(t, dtype=float)
    values = np.empty(t.shape)
    inner = t < s
    if np.any(inner):
        ti = t[inner]
        x = np.minimum(ti / s, S_CAP)
        values[inner] = (s ** (k - 1.0) * np.asarray(theta(params, x))
                         - s ** (k - 2.0) * ti * np.asarray(theta_prime(params, x)) / k)
    if not np.all(inner):
        to = t[~inner]
        x = np.minimum(s / to, S_CAP)
        values[~inner] = to ** (k - 1.0) * np.asarray(theta_prime(params, x)) / k
    return values


def _derivative_segment(params: ModelParams, s: float, a: float, b: float) -> float:
    """∫_a^b K(s,t) t^{N-1} dt，s ∉ (a, b)"""
    if b <= a:
        return 0.0
    if (a == s or b == s) and params.k <= 1 - params.N:
        raise KernelSingularityError(
            f"k={params.k:g} <= 1-N 时 S′ 在密度跳跃处发散（s={s:g} 位于单元端点）"
        )
    nodes, weights = _segment_rule(a, b, s, params.singularity_exponent - 1.0)
    values = _derivative_kernel(params, s, nodes) * nodes ** (params.N - 1)
    return float(np.dot(weights, values))


def _straddling_derivative(params: ModelParams, s: float, a: float, b: float) -> float:
    """a < s < b 时的 ∫_a^b K(s,t) t^{N-1} dt

    [s-δ, s+δ] 上把 t = s∓u 两点配对求积，两侧 ϑ′ 的奇性反对称地相消，
    k <= 1-N 时积分按主值理解。其余部分向 s 加密。
    """
    N = params.N
    delta = min(s - a, b - s)
    rule = graded_rule(PAIR_LEVELS, NEAR_ORDER, min(params.singularity_exponent, 0.0))
    u, w = on_interval(rule, 0.0, delta)
    below, above = s - u, s + u
    paired = (_derivative_kernel(params, s, below) * below ** (N - 1)
              + _derivative_kernel(params, s, above) * above ** (N - 1))
    total = float(np.dot(w, paired))
    total += _derivative_segment(params, s, a, s - delta)
    total += _derivative_segment(params, s, s + delta, b)
    return total


def derivative_cell_integrals(params: ModelParams, s: float, grid: np.ndarray) -> np.ndarray:
    """每个单元 j 上的 ∫_{cell j} K(s,t) t^{N-1} dt"""
    grid = np.asarray(grid, dtype=float)
    a, b = grid[:-1], grid[1:]
    width = b - a
    result = np.empty(a.size)
    distance = np.maximum(a - s, 0.0) + np.maximum(s - b, 0.0)
    far = distance >= width

    if np.any(far):
        gx, gw = gauss_legendre(DERIVATIVE_FAR_ORDER)
        nodes = a[far, None] + width[far, None] * gx
        values = _derivative_kernel(params, s, nodes) * nodes ** (params.N - 1)
        result[far] = values.dot(gw) * width[far]

    for j in np.nonzero(~far)[0]:
        if a[j] < s < b[j]:
            result[j] = _straddling_derivative(params, s, a[j], b[j])
        else:
            result[j] = _derivative_segment(params, s, a[j], b[j])
    return result


def potential_derivative(rho: RadialDensity, params: ModelParams, r):
    """S_k′(r)，接受标量或数组

    对分裂公式两段分别求导，r^{N-1}ρ(r)ϑ(1) 的边界项相消。
    牛顿情形为壳定理 S′(r) = r^{1-N} M_ρ(r)。r = 0 处按对称性取 0。

    Raises:
        KernelSingularityError: k <= 1-N 且 r 恰为支撑内的网格节点
    """
    scalar = np.ndim(r) == 0
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0):
        raise ParameterError("半径必须非负")

    if params.is_newtonian:
        safe_r = np.where(r > 0, r, 1.0)
        masses = np.asarray(cumulative_mass(rho, params, r), dtype=float)
        values = np.where(r > 0, masses * safe_r ** (1 - params.N), 0.0)
    else:
        end = _support_prefix(rho)
        grid = rho.grid[:end + 1]
        weights = rho.values[:end]
        values = np.array([
            float(np.dot(weights, derivative_cell_integrals(params, x, grid))) if end and x > 0 else 0.0
            for x in r
        ])
    return float(values[0]) if scalar else values


def omega(rho: RadialDensity, params: ModelParams, r):
    """单边权重 ω(r) = (1/k) ∫₀^r Θ(r, s) ρ(s) s^{N-1} ds"""
    scalar = np.ndim(r) == 0
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0):
        raise ParameterError("半径必须非负")

    if params.is_newtonian:
        safe_r = np.where(r > 0, r, 1.0)
        masses = np.asarray(cumulative_mass(rho, params, r), dtype=float)
        values = np.where(r > 0, masses * safe_r ** (2 - params.N), 0.0) / params.k
    else:
        values = np.empty(r.size)
        for n, x in enumerate(r):
            x_in = min(x, rho.r_max)
            idx = min(int(np.searchsorted(rho.grid, x_in, side='right')) - 1, rho.cell_count - 1)
            whole = cell_integrals(params, x, rho.grid[:idx + 1]) if idx > 0 else np.zeros(0)
            total = float(np.dot(rho.values[:idx], whole))
            total += rho.values[idx] * _segment_integral(params, x, rho.grid[idx], x_in)
            values[n] = total / params.k
    return float(values[0]) if scalar else values


def potential_profile(rho: RadialDensity, params: ModelParams) -> PotentialProfile:
    """网格节点上的势 S_k(r_j)"""
    return PotentialProfile(rho.grid.copy(), convolve(rho, params, rho.grid))


def convolve_by_angle(rho: RadialDensity, params: ModelParams, r: float) -> float:
    """角向表示的嵌套自适应求积（参照值，仅用于交叉验证）"""
    N, k = params.N, params.k

    def integrand(eta):
        return big_theta_by_angle(params, r, eta) * eta ** (N - 1)

    total = 0.0
    for j in range(_support_prefix(rho)):
        a, b = rho.grid[j], rho.grid[j + 1]
        pieces = [(a, r), (r, b)] if a < r < b else [(a, b)]
        for lo, hi in pieces:
            value, _ = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=ORACLE_EPSREL, limit=200)
            total += rho.values[j] * value
    return total / k


def symmetric_interaction(rho: RadialDensity, params: ModelParams) -> float:
    """对称形式 (σ_N/2) ∫ S_k(r) ρ(r) r^{N-1} dr，势逐点计算"""
    N = params.N
    rule = graded_rule(SYMMETRIC_LEVELS, SYMMETRIC_ORDER)
    total = 0.0
    for j in range(_support_prefix(rho)):
        a, b = rho.grid[j], rho.grid[j + 1]
        mid = 0.5 * (a + b)
        for toward, (lo, hi) in (('left', (a, mid)), ('right', (mid, b))):
            nodes, weights = on_interval(rule, lo, hi, toward=toward)
            values = convolve(rho, params, nodes) * nodes ** (N - 1)
            total += rho.values[j] * float(np.dot(weights, values))
    return 0.5 * surface_area(N) * total


class InteractionOperator:
    """单元相互作用矩阵

    L_ij = (1/k) ∫_{cell i} r^{N-1} ∫_{cell j ∩ [0,r]} Θ(R(r), R(η)) η^{N-1} dη dr，
    B = L + Lᵀ。单元平均势为 diag(1/vol)·Bρ，相互作用能为 σ_N ρᵀLρ。
    """

    def __init__(self, params: ModelParams, grid: np.ndarray,
                 radius_map: Optional[RadiusMap] = None):
        self.logger = logging.getLogger(__name__)
        self.params = params
        self.grid = np.array(grid, dtype=float)
        self.grid.setflags(write=False)
        self.radius_map = radius_map
        self.volumes = shell_volumes(self.grid, params.N)
        self.sigma = surface_area(params.N)

        start = time.time()
        if radius_map is None and params.is_newtonian:
            self.lower = self._assemble_newtonian()
        else:
            self.lower = self._assemble_quadrature()
        self.symmetric = self.lower + self.lower.T
        self.build_time = time.time() - start
        self.logger.debug(
            f"装配相互作用矩阵: J={self.cell_count}, k={params.k:g}, 用时 {self.build_time:.2f}s"
        )

    @property
    def cell_count(self) -> int:
        return self.grid.size - 1

    def _assemble_newtonian(self) -> np.ndarray:
        """Θ = σ_N max(r,η)^{2-N} 时的闭式矩阵"""
        N, k = self.params.N, self.params.k
        r = self.grid
        quadratic = (r[1:] ** 2 - r[:-1] ** 2) / 2.0
        lower = np.tril(np.outer(quadratic, self.volumes), k=-1)
        diagonal = ((r[1:] ** (N + 2) - r[:-1] ** (N + 2)) / (N + 2)
                    - r[:-1] ** N * quadratic) / N
        lower[np.diag_indices_from(lower)] = diagonal
        return self.sigma * lower / k

    def _assemble_quadrature(self) -> np.ndarray:
        N, k = self.params.N, self.params.k
        grid = self.grid
        J = self.cell_count
        outer = graded_rule(OUTER_LEVELS, OUTER_ORDER)
        lower = np.zeros((J, J))
        for i in range(J):
            xs, ws = on_interval(outer, grid[i], grid[i + 1], toward='left')
            for x, wx in zip(xs, ws):
                weight = wx * x ** (N - 1)
                if i > 0:
                    lower[i, :i] += weight * cell_integrals(self.params, x, grid[:i + 1], self.radius_map)
                lower[i, i] += weight * _segment_integral(self.params, x, grid[i], x, self.radius_map)
        return lower / k

    def cell_potential(self, values: np.ndarray) -> np.ndarray:
        """单元平均势 S̃ = diag(1/vol)·Bρ"""
        return self.symmetric.dot(values) / self.volumes

    def interaction_energy(self, values: np.ndarray) -> float:
        """σ_N ρᵀLρ"""
        values = np.asarray(values, dtype=float)
        return self.sigma * float(values.dot(self.lower.dot(values)))

    def get_statistics(self) -> dict:
        return {
            'cells': self.cell_count,
            'newtonian_closed_form': self.radius_map is None and self.params.is_newtonian,
            'mapped': self.radius_map is not None,
            'build_time': self.build_time,
        }


_operator_cache: "OrderedDict[tuple, InteractionOperator]" = OrderedDict()
_operator_lock = threading.Lock()


def interaction_operator(params: ModelParams, grid: np.ndarray) -> InteractionOperator:
    """按 (N, k, 网格) 缓存的相互作用矩阵"""
    grid = np.ascontiguousarray(grid, dtype=float)
    key = (params.N, float(params.k), grid.tobytes())
    with _operator_lock:
        operator = _operator_cache.get(key)
        if operator is not None:
            _operator_cache.move_to_end(key)
            return operator

    operator = InteractionOperator(params, grid)
    with _operator_lock:
        _operator_cache[key] = operator
        while len(_operator_cache) > MAX_CACHED_OPERATORS:
            _operator_cache.popitem(last=False)
    return operator
