"""
径向密度运算

分片常数密度的质量、累积质量、矩、Y_M^* 成员检查、初始数据构造与 CSV 读写。
所有积分都是关于 r^{N-1}dr 的多项式单元和，因此是精确的。
"""

import logging
from pathlib import Path
from typing import List, Union

import numpy as np

from .exceptions import DegenerateSupportError, ParameterError
from .kernel import surface_area
from .models import ModelParams, RadialDensity

logger = logging.getLogger(__name__)

# 质量一致性的默认相对容差
MASS_TOL = 1e-12

CSV_HEADER = "r,rho"


def uniform_grid(J: int, r_max: float) -> np.ndarray:
    """J 个等宽单元的网格 0 = r_0 < ... < r_J = r_max"""
    if J < 1:
        raise ParameterError(f"单元数必须为正: J={J}")
    if not r_max > 0:
        raise ParameterError(f"网格半径必须为正: r_max={r_max}")
    return np.linspace(0.0, r_max, J + 1)


def shell_volumes(grid: np.ndarray, N: int, power: int = 0) -> np.ndarray:
    """每个单元上 ∫ r^{N-1+power} dr = (r_{j+1}^{N+p} - r_j^{N+p}) / (N+p)"""
    n = N + power
    grid = np.asarray(grid, dtype=float)
    return (grid[1:] ** n - grid[:-1] ** n) / n


def mass(rho: RadialDensity, params: ModelParams) -> float:
    """总质量 σ_N Σ ρ_j (r_{j+1}^N - r_j^N) / N"""
    return surface_area(params.N) * float(np.dot(rho.values, shell_volumes(rho.grid, params.N)))


def cumulative_mass(rho: RadialDensity, params: ModelParams, r):
    """累积质量 M_ρ(r) = σ_N ∫₀^r ρ(s) s^{N-1} ds，接受标量或数组"""
    N = params.N
    scalar = np.ndim(r) == 0
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ParameterError("半径必须非负")

    cell_mass = rho.values * shell_volumes(rho.grid, N)
    prefix = np.concatenate(([0.0], np.cumsum(cell_mass)))
    r_clipped = np.minimum(r, rho.r_max)
    idx = np.clip(np.searchsorted(rho.grid, r_clipped, side='right') - 1, 0, rho.cell_count - 1)
    partial = rho.values[idx] * (r_clipped ** N - rho.grid[idx] ** N) / N
    result = surface_area(N) * (prefix[idx] + partial)
    return float(result) if scalar else result


def second_moment(rho: RadialDensity, params: ModelParams) -> float:
    """二阶矩 σ_N ∫ r² ρ r^{N-1} dr"""
    N = params.N
    return surface_area(N) * float(np.dot(rho.values, shell_volumes(rho.grid, N, power=2)))


def entropy_integral(rho: RadialDensity, m: float, N: int) -> float:
    """∫ ρ^m r^{N-1} dr（不含 σ_N）"""
    return float(np.dot(rho.values ** m, shell_volumes(rho.grid, N)))


def normalized(values: np.ndarray, grid: np.ndarray, params: ModelParams) -> RadialDensity:
    """缩放到质量 M"""
    values = np.asarray(values, dtype=float)
    current = surface_area(params.N) * float(np.dot(values, shell_volumes(grid, params.N)))
    if not current > 0:
        raise DegenerateSupportError("密度质量为零，无法归一化")
    return RadialDensity(grid, values * (params.M / current))


def uniform_ball(params: ModelParams, R: float, grid: np.ndarray) -> RadialDensity:
    """半径 R（取到中点落在 [0,R] 内的单元）、质量 M 的常数密度"""
    grid = np.asarray(grid, dtype=float)
    centers = 0.5 * (grid[1:] + grid[:-1])
    return normalized(np.where(centers < R, 1.0, 0.0), grid, params)


def triangular_profile(params: ModelParams, R: float, grid: np.ndarray) -> RadialDensity:
    """线性递减到 R 处为零的初始数据"""
    grid = np.asarray(grid, dtype=float)
    centers = 0.5 * (grid[1:] + grid[:-1])
    return normalized(np.maximum(1.0 - centers / R, 0.0), grid, params)


def bisect_cells(rho: RadialDensity) -> RadialDensity:
    """每个单元对分，得到 2J 个单元上的同一分片常数密度（质量不变）"""
    grid = rho.grid
    fine = np.empty(2 * grid.size - 1)
    fine[0::2] = grid
    fine[1::2] = 0.5 * (grid[1:] + grid[:-1])
    return RadialDensity(fine, np.repeat(rho.values, 2))


def random_decreasing(seed: int, params: ModelParams, J: int, r_max: float = 1.0,
                      grid: np.ndarray = None) -> RadialDensity:
    """随机生成 Y_M^* 中的密度

    指数分布增量的逆序累加和给出单调不增的剖面，随机截断支撑后归一化到质量 M。
    同一 seed 产生完全相同的结果。

    Args:
        seed: 随机种子
        params: 模型参数（提供 N 与 M）
        J: 单元数，至少 4
        r_max: 网格半径（grid 为 None 时使用）
        grid: 指定网格，长度必须为 J+1

    Returns:
        单调不增、质量为 M 的 RadialDensity
    """
    if J < 4:
        raise ParameterError(f"随机密度至少需要 4 个单元: J={J}")
    grid = uniform_grid(J, r_max) if grid is None else np.asarray(grid, dtype=float)
    if grid.size != J + 1:
        raise ParameterError(f"网格长度({grid.size})必须为 J+1={J + 1}")

    rng = np.random.default_rng(seed)
    increments = rng.exponential(size=J)
    support = int(rng.integers(max(2, J // 4), J + 1))
    values = np.zeros(J)
    values[:support] = np.cumsum(increments[:support][::-1])[::-1]
    return normalized(values, grid, params)


def membership_issues(rho: RadialDensity, params: ModelParams, tol: float = MASS_TOL) -> List[str]:
    """检查 ρ 是否属于 Y_M^*（非负、单调不增、质量为 M）"""
    issues = []
    if np.any(rho.values < 0):
        issues.append("存在负密度值")
    if not rho.is_nonincreasing():
        drops = np.nonzero(np.diff(rho.values) > 0)[0]
        issues.append(f"密度不是单调不增的（首个上升出现在单元 {int(drops[0])}）")
    total = mass(rho, params)
    if abs(total - params.M) > tol * params.M:
        issues.append(f"质量 {total:.16g} 与 M={params.M:.16g} 不一致")
    return issues


def l1_distance(rho_a: RadialDensity, rho_b: RadialDensity, params: ModelParams) -> float:
    """同一网格上两个密度的 L¹ 距离 σ_N ∫|ρ_a - ρ_b| r^{N-1} dr"""
    if not np.array_equal(rho_a.grid, rho_b.grid):
        raise ParameterError("L¹ 距离要求两个密度定义在同一网格上")
    diff = np.abs(rho_a.values - rho_b.values)
    return surface_area(params.N) * float(np.dot(diff, shell_volumes(rho_a.grid, params.N)))


def write_density_csv(rho: RadialDensity, path: Union[str, Path]) -> Path:
    """写出 `r,rho` CSV，每个节点一行，最后一个节点的密度为 0"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = np.column_stack([rho.grid, np.append(rho.values, 0.0)])
    np.savetxt(path, table, fmt='%.17g', delimiter=',', header=CSV_HEADER, comments='')
    logger.debug(f"写出密度 {path}（{rho.cell_count} 个单元）")
    return path


def read_density_csv(path: Union[str, Path]) -> RadialDensity:
    """读取 `r,rho` CSV"""
    path = Path(path)
    if not path.exists():
        raise ParameterError(f"密度文件不存在: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        header = f.readline().strip().replace(' ', '')
    if header != CSV_HEADER:
        raise ParameterError(f"密度文件表头应为 '{CSV_HEADER}': {path}")
    try:
        table = np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)
    except ValueError as e:
        raise ParameterError(f"无法解析密度文件 {path}: {e}") from e
    if table.shape[1] != 2 or table.shape[0] < 2:
        raise ParameterError(f"密度文件至少需要两行两列数据: {path}")
    return RadialDensity(table[:, 0], table[:-1, 1])
