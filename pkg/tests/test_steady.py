#!/usr/bin/env python3
"""
稳态求解器测试

测试 Euler–Lagrange 不动点迭代、区域检查、积分刻画、加权恒等式与牛顿闭式稳态。
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# 添加src目录到Python路径
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from radial_aggdiff.density import l1_distance, mass, triangular_profile, uniform_ball, uniform_grid
from radial_aggdiff.energy import (energy_identity_defect, evaluate, stationary_energy_identity,
                                   virial_defect, virial_identity_residual)
from radial_aggdiff.exceptions import (ConvergenceError, DegenerateSupportError, ParameterError,
                                       RegimeError)
from radial_aggdiff.models import ModelParams, RadialDensity, SteadyState
from radial_aggdiff.potential import convolve
from radial_aggdiff.steady import (SteadyStateSolver, characterization_defect,
                                   characterization_residual, characterization_rhs,
                                   el_level_variance, g_weighted_identity_residual,
                                   newtonian_profile, richardson, self_consistency, solve)

# J = 64 上 O(h²) 网格误差的阈值
GRID_TOL = 1e-3


@pytest.fixture(scope="module")
def fair():
    return ModelParams.fair_competition(3, -1.5, chi=1, M=0.1)


@pytest.fixture(scope="module")
def fair_state(fair):
    """公平竞争情形 (3, -1.5, m_c, χ=1, M=0.1) 的稳态"""
    init = uniform_ball(fair, 1.0, uniform_grid(64, 2.0))
    return solve(fair, init)


@pytest.fixture(scope="module")
def harmonic():
    """N=3, k=-1, m=2, χ=0, M=1（扩散占优的牛顿情形）"""
    return ModelParams(3, -1.0, 2.0, chi=0, M=1.0)


@pytest.fixture(scope="module")
def harmonic_state(harmonic):
    init = uniform_ball(harmonic, 1.0, uniform_grid(64, 2.0))
    return solve(harmonic, init)


def test_fair_competition_converges(fair, fair_state):
    """稳态收敛，质量守恒，支撑在网格内部"""
    diagnostics = fair_state.diagnostics
    print(f"📊 {fair_state}: {diagnostics}")
    assert fair_state.converged
    assert fair_state.residual <= 1e-10
    assert diagnostics['regime'] == "fair-competition"
    assert diagnostics['mass_error'] <= 1e-10 * fair.M
    assert not diagnostics['support_touches_boundary']
    assert diagnostics['support_cells'] >= 2
    assert fair_state.density.is_nonincreasing()


def test_euler_lagrange_level(fair, fair_state):
    """支撑上一阶变分为常数"""
    assert el_level_variance(fair_state, fair) <= 1e-10
    assert fair_state.diagnostics['el_variance'] <= 1e-10


def test_fair_competition_identities(fair, fair_state):
    """积分刻画、维里恒等式与能量闭式在网格误差内成立"""
    assert characterization_residual(fair_state, fair) <= GRID_TOL
    assert virial_identity_residual(fair_state, fair) <= GRID_TOL
    direct = evaluate(fair_state, fair).total
    closed = stationary_energy_identity(fair_state, fair)
    assert abs(direct - closed) <= GRID_TOL * abs(closed)
    assert abs(energy_identity_defect(fair_state, fair)) == pytest.approx(
        abs(direct - closed) / abs(closed), rel=1e-12)
    assert abs(virial_defect(fair_state, fair)) == virial_identity_residual(fair_state, fair)


def test_weighted_identity(fair, fair_state):
    """g = None 与维里残差相同；g ≡ 1 与 g = id 都在网格误差内"""
    assert g_weighted_identity_residual(fair_state, None, fair) == virial_identity_residual(
        fair_state.density, fair)
    assert g_weighted_identity_residual(fair_state, np.ones_like, fair) <= GRID_TOL
    assert g_weighted_identity_residual(fair_state, lambda a: a, fair) <= GRID_TOL


def test_from_density_recovers_level(fair, fair_state):
    """由稳态密度重建的记录给出相同的 Lagrange 常数"""
    rebuilt = SteadyState.from_density(fair_state.density, fair)
    assert rebuilt.lagrange_constant == pytest.approx(fair_state.lagrange_constant, rel=1e-8, abs=1e-9)
    assert rebuilt.diagnostics['source'] == 'user'


def test_negative_controls(fair):
    """均匀球不是稳态：刻画残差大于 1e-2"""
    ball = uniform_ball(fair, 1.0, uniform_grid(64, 2.0))
    state = SteadyState.from_density(ball, fair)
    assert characterization_residual(state, fair) > 1e-2
    assert virial_identity_residual(ball, fair) > 1e-2


def test_uniqueness_from_two_initial_guesses(harmonic, harmonic_state):
    """均匀球与三角形初值收敛到同一剖面"""
    other = solve(harmonic, triangular_profile(harmonic, 0.8, uniform_grid(64, 2.0)))
    distance = l1_distance(harmonic_state.density, other.density, harmonic)
    assert distance <= 1e-7 * harmonic.M


def test_harmonic_matches_closed_form(harmonic, harmonic_state):
    """与 ρ̄(r) = (M/2π) sin(√(2π) r)/r 的单元平均一致"""
    exact = newtonian_profile(harmonic, harmonic_state.density.grid)
    assert mass(exact, harmonic) == pytest.approx(harmonic.M, rel=1e-12)
    distance = l1_distance(harmonic_state.density, exact, harmonic)
    print(f"与闭式稳态的 L¹ 距离: {distance:.3e}")
    assert distance <= GRID_TOL * harmonic.M
    assert harmonic_state.support_radius == pytest.approx(math.sqrt(math.pi / 2.0), abs=0.1)


def test_harmonic_identities(harmonic, harmonic_state):
    """牛顿分支的刻画与维里残差"""
    assert characterization_residual(harmonic_state, harmonic) <= GRID_TOL
    assert virial_identity_residual(harmonic_state, harmonic) <= GRID_TOL
    assert harmonic_state.diagnostics['m_star'] is None


def test_newtonian_profile_requirements():
    """闭式稳态只适用于 (3, -1, 2, 0)，且网格要覆盖支撑"""
    with pytest.raises(ParameterError):
        newtonian_profile(ModelParams(3, -1.0, 1.8), uniform_grid(16, 2.0))
    with pytest.raises(ParameterError):
        newtonian_profile(ModelParams(3, -1.0, 2.0), uniform_grid(16, 1.0))


def test_regime_errors():
    """吸引占优或带约束的扩散占优参数被拒绝"""
    with pytest.raises(RegimeError):
        SteadyStateSolver(ModelParams(3, -1.5, 1.2))
    with pytest.raises(RegimeError):
        SteadyStateSolver(ModelParams(3, -1.0, 2.0, chi=1))


def test_solver_argument_checks(harmonic):
    """容差与阻尼的检查"""
    with pytest.raises(ParameterError):
        SteadyStateSolver(harmonic, tol=0.0)
    with pytest.raises(ParameterError):
        SteadyStateSolver(harmonic, damping=1.5)


def test_zero_mass_init(harmonic):
    """零质量初值报 DegenerateSupportError"""
    zero = RadialDensity(uniform_grid(16, 2.0), np.zeros(16))
    with pytest.raises(DegenerateSupportError):
        solve(harmonic, zero)


def test_iteration_budget(harmonic):
    """迭代次数耗尽时报 ConvergenceError"""
    init = uniform_ball(harmonic, 0.5, uniform_grid(32, 2.0))
    solver = SteadyStateSolver(harmonic, max_iter=1)
    with pytest.raises(ConvergenceError):
        solver.solve(init)
    assert solver.get_statistics()['solves'] == 0


def test_characterization_matches_potential_differences(fair, fair_state):
    """核导数形式的右端与逐点势差分形式一致"""
    density = fair_state.density
    grid = density.grid
    end = density.support_cells
    rho = density.values[:end]
    centers = density.centers[:end]
    at_nodes = convolve(density, fair, grid[:end + 1])
    at_centers = convolve(density, fair, centers)
    whole = rho * (np.diff(at_nodes) + (grid[1:end + 1] ** 2 - grid[:end] ** 2) / 2.0)
    partial = rho * (at_nodes[1:] - at_centers + (grid[1:end + 1] ** 2 - centers ** 2) / 2.0)
    tail = np.concatenate((np.cumsum(whole[::-1])[::-1][1:], [0.0]))

    rhs = characterization_rhs(fair_state, fair)
    scale = float(np.max(density.values ** fair.m))
    difference = float(np.max(np.abs(rhs[:end] - (tail + partial)))) / scale
    print(f"两种右端的最大差: {difference:.3e}")
    assert difference <= 1e-6
    assert np.all(rhs[end:] == 0.0)


def test_characterization_continuous_at_newtonian_exponent(harmonic, harmonic_state):
    """k = 2-N 的闭式分支与 k = 2-N+1e-6 的一般分支给出几乎相同的残差"""
    nearby = ModelParams(3, -1.0 + 1e-6, 2.0, chi=0, M=1.0)
    assert harmonic.is_newtonian and not nearby.is_newtonian
    exact = characterization_residual(harmonic_state, harmonic)
    general = characterization_residual(harmonic_state, nearby)
    print(f"牛顿分支 {exact:.6e}，一般分支 {general:.6e}")
    assert abs(exact - general) <= 1e-4


def test_characterization_defect_sign_and_scale(fair, fair_state):
    """残差是带符号偏差的最大绝对值，scale 可以指定"""
    defect = characterization_defect(fair_state, fair)
    assert characterization_residual(fair_state, fair) == float(np.max(np.abs(defect)))
    scale = float(np.max(fair_state.density.values ** fair.m))
    assert characterization_defect(fair_state, fair, 2.0 * scale) == pytest.approx(0.5 * defect)


def test_richardson_removes_quadratic_term():
    """c·h² 与 c·(h/2)² 的外推为 0，二阶以上的项被压低"""
    assert richardson(4.0e-4, 1.0e-4) == pytest.approx(0.0, abs=1e-18)
    coarse = np.array([4.0e-4, -8.0e-4])
    fine = coarse / 4.0
    assert richardson(coarse, fine) == pytest.approx(np.zeros(2), abs=1e-18)
    assert abs(richardson(4.0e-4 + 8e-6, 1.0e-4 + 1e-6)) < 1e-6


def test_solve_pair_bisects_grid(harmonic):
    """solve_pair 的细网格由粗网格对分得到，两层都收敛"""
    solver = SteadyStateSolver(harmonic)
    coarse, fine = solver.solve_pair(uniform_ball(harmonic, 1.0, uniform_grid(32, 2.0)))
    assert fine.density.cell_count == 2 * coarse.density.cell_count
    assert np.allclose(fine.density.grid[::2], coarse.density.grid)
    assert solver.get_statistics()['solves'] == 2
    assert mass(fine.density, harmonic) == pytest.approx(harmonic.M, rel=1e-10)

    checks = self_consistency(coarse, fine, harmonic)
    assert set(checks) == {'characterization', 'virial', 'energy_identity'}
    for values in checks.values():
        assert set(values) == {'coarse', 'fine', 'extrapolated'}
        assert all(np.isfinite(v) and v >= 0 for v in values.values())


def test_self_consistency_requires_bisected_grid(harmonic, harmonic_state):
    """细网格不是粗网格的对分时报 ParameterError"""
    other = solve(harmonic, uniform_ball(harmonic, 1.0, uniform_grid(96, 2.0)))
    with pytest.raises(ParameterError):
        self_consistency(harmonic_state, other, harmonic)


# 三组参数：(3,-1,2,0)、(3,-1.5,m_c,1)、以及 m 略低于 2 的牛顿情形
SELF_CONSISTENCY_CASES = [
    ModelParams(3, -1.0, 2.0, chi=0, M=1.0),
    ModelParams.fair_competition(3, -1.5, chi=1, M=0.1),
    ModelParams(3, -1.0, 1.9, chi=0, M=1.0),
]


@pytest.mark.parametrize("params", SELF_CONSISTENCY_CASES, ids=str)
def test_extrapolated_self_consistency(params):
    """J = 256 与 512 上外推后：刻画与维里 <= 1e-5，能量闭式 <= 1e-6，EL 方差 <= 1e-10"""
    solver = SteadyStateSolver(params)
    coarse, fine = solver.solve_pair(uniform_ball(params, 1.0, uniform_grid(256, 2.0)))
    for state in (coarse, fine):
        assert state.converged
        assert not state.diagnostics['support_touches_boundary']
        assert el_level_variance(state, params) <= 1e-10

    checks = self_consistency(coarse, fine, params)
    print(f"📊 {params}: {checks}")
    assert checks['characterization']['extrapolated'] <= 1e-5
    assert checks['virial']['extrapolated'] <= 1e-5
    assert checks['energy_identity']['extrapolated'] <= 1e-6
