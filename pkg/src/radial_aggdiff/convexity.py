"""
角向核的凸性不等式

对 k ∈ (-N, 2-N]，ϑ(t)/k 位于每条切线曲线 α(c) + β(c)(1-t^N)^{k/N} 之上：

    ϑ(t)/k >= α(c) + β(c)(1-t^N)^{k/N},   (t, c) ∈ (0,1)²

α、β 由 t = c 处的零阶与一阶匹配确定。本模块给出格点扫描、N >= 3 时的相对凸性
判据与级数系数检查、精确的 N 次不等式，以及 N = 2 的凸组合分解。
"""

import logging
from typing import List, Sequence, Tuple

import numpy as np

from .exceptions import DomainError, ParameterError
from .kernel import d_constant, hypergeometric_parameters, theta, theta_prime
from .models import HypergeomParams, ModelParams, ScanReport
from .specfun import hyp2f1

logger = logging.getLogger(__name__)

MIN_RESOLUTION = 16
DEFAULT_TOL = 1e-9
FIGURE_CS = (0.2, 0.4, 0.6, 0.8)
FIGURE_POINTS = 200


def _check_unit_interval(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0) or np.any(x >= 1):
        raise DomainError(f"{name} 必须位于 (0, 1) 内")
    return x


def alpha_beta(params: ModelParams, c):
    """切线系数 (α(c), β(c))

    α(c) = ϑ(c)/k + (1/k²) c^{1-N} (1-c^N) ϑ′(c)
    β(c) = -(1/k²) c^{1-N} (1-c^N)^{1-k/N} ϑ′(c)
    """
    N, k = params.N, params.k
    scalar = np.ndim(c) == 0
    c = _check_unit_interval(c, "c")
    value = np.asarray(theta(params, c))
    slope = np.asarray(theta_prime(params, c))
    scale = c ** (1 - N) * slope / (k * k)
    alpha = value / k + scale * (1.0 - c ** N)
    beta = -scale * (1.0 - c ** N) ** (1.0 - k / N)
    if scalar:
        return float(alpha), float(beta)
    return alpha, beta


def tangent_curve(params: ModelParams, c: float, t) -> np.ndarray:
    """α(c) + β(c)(1-t^N)^{k/N}"""
    N, k = params.N, params.k
    alpha, beta = alpha_beta(params, c)
    t = np.asarray(t, dtype=float)
    return alpha + beta * (1.0 - t ** N) ** (k / N)


def scan(params: ModelParams, resolution: int = 200, tol: float = DEFAULT_TOL) -> ScanReport:
    """在 (t, c) 格点上扫描不等式残差

    格点为 i/(resolution+1)，t > 1 - 1/(4·resolution) 的带被排除（右端趋于 -∞）。

    Args:
        params: 模型参数（只用 N、k）
        resolution: 每个方向的格点数，至少 16
        tol: 违例阈值，残差 < -tol 记为违例

    Returns:
        ScanReport
    """
    if resolution < MIN_RESOLUTION:
        raise ParameterError(f"扫描分辨率至少为 {MIN_RESOLUTION}: {resolution}")
    N, k = params.N, params.k
    lattice = np.arange(1, resolution + 1) / (resolution + 1.0)
    cutoff = 1.0 - 1.0 / (4.0 * resolution)
    t_grid = lattice[lattice <= cutoff]
    c_grid = lattice

    if params.is_newtonian:
        logger.info("k = 2-N: ϑ 为常数，所有切线与曲线重合，残差恒为 0")

    alpha, beta = alpha_beta(params, c_grid)
    curve = np.asarray(theta(params, t_grid)) / k
    residuals = curve[:, None] - alpha[None, :] - np.outer((1.0 - t_grid ** N) ** (k / N), beta)

    bad_t, bad_c = np.nonzero(residuals < -tol)
    violations = [(float(t_grid[i]), float(c_grid[j]), float(residuals[i, j]))
                  for i, j in zip(bad_t, bad_c)]
    report = ScanReport(
        N=N, k=k,
        t_grid=t_grid, c_grid=c_grid,
        residuals=residuals,
        tol=tol,
        excluded_band=(cutoff, 1.0),
        violations=violations,
    )
    logger.info(f"凸性扫描完成: {report}")
    return report


def _check_relative_range(params: ModelParams):
    if params.N < 3 or not params.k < 2 - params.N:
        raise ParameterError(
            f"相对凸性判据要求 N >= 3 且 k < 2-N: N={params.N}, k={params.k:g}"
        )


def g_derivatives(params: ModelParams, z: float) -> Tuple[float, float]:
    """g(z) = (d_N/k) F(ā, b̄; c̄; z) 的一阶与二阶导数（导数公式连用两次）"""
    _check_relative_range(params)
    z = float(_check_unit_interval(z, "z"))
    a, b, c = hypergeometric_parameters(params)
    scale = d_constant(params.N) / params.k
    first = scale * a * b / c * hyp2f1(HypergeomParams(a + 1.0, b + 1.0, c + 1.0, z))
    second = (scale * a * (a + 1.0) * b * (b + 1.0) / (c * (c + 1.0))
              * hyp2f1(HypergeomParams(a + 2.0, b + 2.0, c + 2.0, z)))
    return first, second


def relative_convexity_residual(params: ModelParams, z: float) -> float:
    """(1-z) g″(z) - (1 - k/N) g′(z)，应当 >= 0"""
    first, second = g_derivatives(params, z)
    return (1.0 - z) * second - (1.0 - params.k / params.N) * first


def relative_convexity_limit(params: ModelParams) -> float:
    """z → 0 时的残差 g″(0) - (1 - k/N) g′(0)，取级数前两项"""
    _check_relative_range(params)
    a, b, c = hypergeometric_parameters(params)
    scale = d_constant(params.N) / params.k
    first = scale * a * b / c
    second = scale * a * (a + 1.0) * b * (b + 1.0) / (c * (c + 1.0))
    return second - (1.0 - params.k / params.N) * first


def series_coefficient_check(params: ModelParams, n_max: int) -> bool:
    """逐项比较级数系数

    对 0 <= n <= n_max 检查 (ā+1+n)(b̄+1+n) <= (1-k/N+n)(c̄+1+n)，并检查
    ā+b̄-c̄+k/N = (N+k)(1-N)/N < 0 与 (ā+1)(b̄+1)-(c̄+1)(1-k/N) = (N+k)(k/4+1/N-1) < 0。
    """
    _check_relative_range(params)
    N, k = params.N, params.k
    a, b, c = hypergeometric_parameters(params)
    n = np.arange(n_max + 1, dtype=float)
    termwise = bool(np.all((a + 1.0 + n) * (b + 1.0 + n) <= (1.0 - k / N + n) * (c + 1.0 + n)))
    linear = a + b - c + k / N
    constant = (a + 1.0) * (b + 1.0) - (c + 1.0) * (1.0 - k / N)
    logger.debug(f"系数检查: linear={linear:.6g}, constant={constant:.6g}, termwise={termwise}")
    return termwise and linear < 0 and constant < 0


def sharp_n_inequality(N: int, t):
    """N/(1-t^N) - 2/(1-t²) - (N-2)/2，t ∈ (0,1)，恒非负"""
    if N < 2:
        raise ParameterError(f"维数必须不小于 2: N={N}")
    scalar = np.ndim(t) == 0
    t = _check_unit_interval(t, "t")
    values = N / (1.0 - t ** N) - 2.0 / (1.0 - t * t) - (N - 2) / 2.0
    return float(values) if scalar else values


def sharp_n_polynomial(N: int, t):
    """u(t) = N(1-t²) - 2(1-t^N) - ((N-2)/2)(1-t²)(1-t^N)，u(0) = (N-2)/2"""
    t = np.asarray(t, dtype=float)
    return N * (1.0 - t * t) - 2.0 * (1.0 - t ** N) - (N - 2) / 2.0 * (1.0 - t * t) * (1.0 - t ** N)


def sharp_n_polynomial_derivative(N: int, t):
    t = np.asarray(t, dtype=float)
    inner = -2.0 * t * (1.0 - t ** N) - N * t ** (N - 1) * (1.0 - t * t)
    return -2.0 * N * t + 2.0 * N * t ** (N - 1) - (N - 2) / 2.0 * inner


def decoupling_residual(k: float, u, t, c):
    """N = 2 时 (·)^{k/2} 凸性给出的分解残差，恒非负，t = c 时为零

    α_u = (1-u)/(1-c²u)，
    α_u[(1-u)/α_u]^{k/2} + (1-α_u)[(1-t²)u/(1-α_u)]^{k/2} - [1-u+(1-t²)u]^{k/2}
    """
    if not -2 < k < 0:
        raise ParameterError(f"N = 2 时 k 必须位于 (-2, 0): {k}")
    u = _check_unit_interval(u, "u")
    t = _check_unit_interval(t, "t")
    c = _check_unit_interval(c, "c")
    u, t, c = np.broadcast_arrays(u, t, c)
    weight = (1.0 - u) / (1.0 - c * c * u)
    near = (1.0 - u) / weight
    far = (1.0 - t * t) * u / (1.0 - weight)
    power = k / 2.0
    return weight * near ** power + (1.0 - weight) * far ** power - (1.0 - t * t * u) ** power


def figure_rows(params: ModelParams, cs: Sequence[float] = FIGURE_CS,
                points: int = FIGURE_POINTS) -> Tuple[List[str], np.ndarray]:
    """曲线 ϑ/k 与若干切线曲线的表格

    Returns:
        (表头, 数据)，表头为 t, theta_over_k, tangent_c0.2, ...
    """
    t = np.arange(1, points + 1) / (points + 1.0)
    header = ['t', 'theta_over_k'] + [f'tangent_c{c:g}' for c in cs]
    columns = [t, np.asarray(theta(params, t)) / params.k]
    columns += [tangent_curve(params, c, t) for c in cs]
    return header, np.column_stack(columns)
