"""
径向有限体积梯度流

    ∂_t(r^{N-1}ρ) = ∂_r(r^{N-1} ρ ∂_r ξ),   ξ = (m/(m-1))ρ^{m-1} + W_k∗ρ + χr²/2

单元面上的速度 u = -Δξ/Δc 取迎风密度，两端无通量，更新是守恒的。
离散稳态（ξ 在支撑上为常数）是该格式的不动点。
"""

import logging
import math
import time
from typing import List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from .density import l1_distance, mass, shell_volumes
from .energy import confinement_potential, evaluate
from .exceptions import InstabilityError, ParameterError, SimulationTimeout
from .models import ModelParams, RadialDensity, SimState
from .potential import interaction_operator

logger = logging.getLogger(__name__)

DEFAULT_CFL = 0.4
NEGATIVITY_TOL = 1e-12
ENERGY_SLACK = 1e-8
DEFAULT_MAX_STEPS = 5_000_000


class RadialSimulator:
    """显式迎风有限体积模拟器

    Args:
        params: 模型参数
        cfl: 扩散 CFL 与正性约束的安全系数
        potential_refresh: 每隔多少步重新计算一次势，1 表示每步都算
        snapshot_every: 每隔多少步保存一次快照，0 表示不保存
        max_dt: 步长上限（可选）
    """

    def __init__(self, params: ModelParams, cfl: float = DEFAULT_CFL, potential_refresh: int = 1,
                 snapshot_every: int = 0, max_dt: Optional[float] = None,
                 show_progress: bool = False):
        self.logger = logging.getLogger(__name__)
        if not 0 < cfl <= 1:
            raise ParameterError(f"CFL 系数必须位于 (0, 1]: {cfl}")
        if potential_refresh < 1:
            raise ParameterError(f"势刷新间隔必须为正整数: {potential_refresh}")
        self.params = params
        self.cfl = cfl
        self.potential_refresh = int(potential_refresh)
        self.snapshot_every = int(snapshot_every)
        self.max_dt = max_dt
        self.show_progress = show_progress

        self.snapshots: List[Tuple[float, np.ndarray]] = []
        self._grid_key: Optional[bytes] = None
        self._potential: Optional[np.ndarray] = None
        self.stats = {
            'steps': 0,
            'energy_increases': 0,
            'max_energy_increase': 0.0,
            'potential_evaluations': 0,
            'run_time': 0.0,
        }

    def _prepare(self, grid: np.ndarray):
        key = grid.tobytes()
        if key == self._grid_key:
            return
        params = self.params
        self._grid_key = key
        self.operator = interaction_operator(params, grid)
        self.volumes = shell_volumes(grid, params.N)
        self.centers = 0.5 * (grid[1:] + grid[:-1])
        self.face_area = grid[1:-1] ** (params.N - 1)
        self.confinement = (params.chi * confinement_potential(grid, params.N)
                            if params.chi else np.zeros(grid.size - 1))
        self._potential = None

    def _interaction_potential(self, values: np.ndarray, steps: int) -> np.ndarray:
        if self._potential is None or steps % self.potential_refresh == 0:
            self._potential = self.operator.cell_potential(values)
            self.stats['potential_evaluations'] += 1
        return self._potential

    def _face_velocity(self, values: np.ndarray, steps: int) -> np.ndarray:
        """内部单元面上的速度 u = -(ξ_{i+1} - ξ_i)/(c_{i+1} - c_i)"""
        m = self.params.m
        xi = (m / (m - 1.0) * values ** (m - 1.0)
              + self._interaction_potential(values, steps) + self.confinement)
        return -np.diff(xi) / np.diff(self.centers)

    def stable_dt(self, values: np.ndarray, velocity: np.ndarray, grid: np.ndarray) -> float:
        """扩散 CFL（含原点单元的因子 N）与正性约束中较小者"""
        params = self.params
        peak = float(np.max(values))
        dt = math.inf
        if peak > 0:
            diffusion = params.m * peak ** (params.m - 1.0)
            dt = self.cfl * float(np.min(np.diff(grid))) ** 2 / (params.N * diffusion)

        outward = self.face_area * np.maximum(velocity, 0.0)
        inward = self.face_area * np.maximum(-velocity, 0.0)
        outflow = np.zeros(values.size)
        outflow[:-1] += outward
        outflow[1:] += inward
        rate = float(np.max(outflow / self.volumes))
        if rate > 0:
            dt = min(dt, self.cfl / rate)
        if self.max_dt is not None:
            dt = min(dt, self.max_dt)
        return dt

    def step(self, state: SimState, dt: Optional[float] = None,
             dt_cap: Optional[float] = None) -> SimState:
        """一步守恒更新

        返回新状态，输入状态（包括其能量历史）保持不变。

        Args:
            state: 当前状态
            dt: 指定步长，省略时按稳定性规则自适应选取
            dt_cap: 自适应步长的上限（例如到 t_max 的剩余时间）

        Raises:
            InstabilityError: 出现低于 -1e-12 的密度，或指定步长超过稳定上限
        """
        return self._advance(state, dt, dt_cap, list(state.energy_history))

    def _advance(self, state: SimState, dt: Optional[float], dt_cap: Optional[float],
                 history: List[Tuple[float, float]]) -> SimState:
        """推进一步并把能量追加到 history（调用方持有该列表）"""
        density = state.density
        grid = density.grid
        self._prepare(grid)
        values = density.values

        velocity = self._face_velocity(values, state.steps)
        limit = self.stable_dt(values, velocity, grid)
        if dt is None:
            dt = limit if dt_cap is None else min(limit, dt_cap)
        elif dt > limit * (1.0 + 1e-12):
            raise InstabilityError(f"步长 {dt:.3e} 超过稳定上限 {limit:.3e}")
        if not math.isfinite(dt) or dt <= 0:
            raise InstabilityError(f"无法选取有效步长: dt={dt}")

        # 迎风通量
        flux = np.where(velocity > 0, velocity * values[:-1], velocity * values[1:])
        transfer = np.zeros(values.size + 1)
        transfer[1:-1] = self.face_area * flux
        fresh = values - dt * np.diff(transfer) / self.volumes

        if np.min(fresh) < -NEGATIVITY_TOL:
            raise InstabilityError(
                f"t={state.time:.6g} 处出现负密度 {np.min(fresh):.3e}（dt={dt:.3e}）"
            )
        fresh = np.maximum(fresh, 0.0)

        new_density = RadialDensity(grid, fresh)
        energy = evaluate(new_density, self.params, self.operator).total
        previous = state.last_energy
        if state.energy_history and energy > previous + ENERGY_SLACK * abs(previous):
            self.stats['energy_increases'] += 1
            self.stats['max_energy_increase'] = max(self.stats['max_energy_increase'],
                                                    energy - previous)
            self.logger.debug(f"t={state.time:.6g} 能量上升 {energy - previous:.3e}")

        steps = state.steps + 1
        time_now = state.time + dt
        history.append((time_now, energy))
        self.stats['steps'] += 1
        if self.snapshot_every and steps % self.snapshot_every == 0:
            self.snapshots.append((time_now, fresh.copy()))

        return SimState(
            density=new_density,
            time=time_now,
            dt=dt,
            energy_history=history,
            steps=steps,
            diagnostics=state.diagnostics,
        )

    def initial_state(self, init: RadialDensity) -> SimState:
        self._prepare(init.grid)
        energy = evaluate(init, self.params, self.operator).total
        if self.snapshot_every:
            self.snapshots.append((0.0, init.values.copy()))
        return SimState(density=init, energy_history=[(0.0, energy)])

    def run(self, init: RadialDensity, t_max: float, stall_tol: float,
            reference: Optional[RadialDensity] = None,
            max_steps: int = DEFAULT_MAX_STEPS) -> SimState:
        """演化到相对 L¹ 变化率低于 stall_tol

        Args:
            init: 初始密度
            t_max: 最长演化时间，0 时直接返回初值
            stall_tol: 停止阈值（每单位时间的相对 L¹ 变化）
            reference: 参照稳态，给出时在诊断信息中记录终态到它的 L¹ 距离
            max_steps: 步数上限

        Raises:
            SimulationTimeout: 在 t_max 或 max_steps 内未达到平衡
        """
        if t_max < 0:
            raise ParameterError(f"t_max 不能为负: {t_max}")
        state = self.initial_state(init)
        if t_max == 0:
            return state
        history = list(state.energy_history)

        params = self.params
        start = time.time()
        rate = math.inf
        with tqdm(total=t_max, desc="演化", unit="t", disable=not self.show_progress) as progress:
            while True:
                previous = state.density
                state = self._advance(state, None, t_max - state.time, history)
                progress.update(state.dt)

                rate = l1_distance(state.density, previous, params) / (params.M * state.dt)
                if rate < stall_tol:
                    break
                if state.time >= t_max * (1.0 - 1e-14) or state.steps >= max_steps:
                    diagnostics = self._run_diagnostics(state, rate, reference)
                    raise SimulationTimeout(
                        f"演化到 t={state.time:.6g}（{state.steps} 步）仍未平衡，"
                        f"L¹ 变化率 {rate:.3e} >= {stall_tol:.3e}",
                        diagnostics=diagnostics,
                    )

        self.stats['run_time'] += time.time() - start
        state.diagnostics = self._run_diagnostics(state, rate, reference)
        self.logger.info(
            f"演化结束: t={state.time:.6g}, {state.steps} 步, F={state.last_energy:.10g}"
        )
        return state

    def _run_diagnostics(self, state: SimState, rate: float,
                         reference: Optional[RadialDensity]) -> dict:
        params = self.params
        diagnostics = {
            'time': state.time,
            'steps': state.steps,
            'final_rate': rate,
            'final_energy': state.last_energy,
            'mass_error': abs(mass(state.density, params) - params.M),
            'max_energy_increase': state.energy_increase(),
        }
        if reference is not None:
            diagnostics['l1_to_reference'] = l1_distance(state.density, reference, params)
        return diagnostics

    def get_statistics(self) -> dict:
        stats = dict(self.stats)
        stats['snapshots'] = len(self.snapshots)
        return stats


def step(state: SimState, params: ModelParams, dt: Optional[float] = None) -> SimState:
    """单步推进（RadialSimulator.step 的函数式入口）"""
    return RadialSimulator(params).step(state, dt)


def run_to_equilibrium(init: RadialDensity, params: ModelParams, t_max: float,
                       stall_tol: float, reference: Optional[RadialDensity] = None,
                       **options) -> SimState:
    """演化到平衡，options 传给 RadialSimulator"""
    return RadialSimulator(params, **options).run(init, t_max, stall_tol, reference=reference)
