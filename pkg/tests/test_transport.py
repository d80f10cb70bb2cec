#!/usr/bin/env python3
"""
输运映射测试

测试累积质量反演、推前形式的自由能、Jensen 间隙、逐点 z 下界以及能量下界链。
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

# 添加src目录到Python路径
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from radial_aggdiff.density import random_decreasing, uniform_ball, uniform_grid
from radial_aggdiff.energy import evaluate
from radial_aggdiff.exceptions import (DegenerateSupportError, KernelSingularityError,
                                       MassMismatchError, ParameterError)
from radial_aggdiff.models import ModelParams, SteadyState, TransportMap
from radial_aggdiff.steady import solve
from radial_aggdiff.transport import (build_map, energy_lower_bound, jensen_gap,
                                      pushforward_energy, transport_weight, z_bound_gaps)


@pytest.fixture(scope="module")
def params():
    return ModelParams.fair_competition(3, -1.5, chi=1, M=0.1)


@pytest.fixture(scope="module")
def ball(params):
    return uniform_ball(params, 1.0, uniform_grid(32, 2.0))


@pytest.fixture(scope="module")
def steady(params):
    """J = 64 上的公平竞争稳态"""
    return solve(params, uniform_ball(params, 1.0, uniform_grid(64, 2.0)))


def _as_state(density):
    return SteadyState(density=density, lagrange_constant=0.0,
                       support_radius=density.support_radius)


def test_identity_map(params, ball):
    """同一密度之间的映射是恒等映射"""
    transport = build_map(ball, ball, params)
    assert transport.psi_prime == pytest.approx(transport.source_grid, rel=1e-12, abs=1e-14)
    assert transport.phi == pytest.approx(np.ones(transport.cell_count), rel=1e-10)
    assert transport.monotonicity_issues() == []
    weight = transport_weight(transport, params)
    assert weight(np.array([0.1, 0.5, 0.9])) == pytest.approx(1.0, rel=1e-10)


def test_dilation_map(params, ball):
    """伸缩目标 ρ_λ 给出 ψ′(a) = a/λ，φ = λ^{-N}"""
    lam = 2.0
    transport = build_map(ball, ball.dilate(lam, params.N), params)
    assert transport.psi_prime == pytest.approx(transport.source_grid / lam, rel=1e-12, abs=1e-14)
    assert transport.phi == pytest.approx(lam ** -params.N, rel=1e-10)
    assert transport.psi_prime_at(0.7) == pytest.approx(0.35, rel=1e-12)
    assert transport.inverse_at(0.35) == pytest.approx(0.7, rel=1e-12)


def test_pushforward_density_is_target(params, ball):
    """推前密度在目标网格的每个单元上取目标值"""
    target = random_decreasing(5, params, 32, 2.0)
    transport = build_map(ball, target, params)
    pushed = transport.pushforward_density()
    midpoints = 0.5 * (pushed.grid[1:] + pushed.grid[:-1])
    assert pushed.values == pytest.approx(target.value_at(midpoints), rel=1e-6)


def test_mass_mismatch(params, ball):
    """质量不一致时报 MassMismatchError"""
    heavier = ball.with_values(ball.values * 1.01)
    with pytest.raises(MassMismatchError):
        build_map(ball, heavier, params)


def test_degenerate_support(params, ball):
    """支撑内部有零值单元时报 DegenerateSupportError"""
    values = np.array(ball.values)
    values[3] = 0.0
    holed = ball.with_values(values)
    with pytest.raises(DegenerateSupportError):
        build_map(holed, holed, params)


def test_pushforward_identity_matches_evaluate(params, ball):
    """恒等映射下推前能量等于直接计算的 F"""
    transport = build_map(ball, ball, params)
    pushed = pushforward_energy(transport, _as_state(ball), params)
    direct = evaluate(ball, params)
    assert pushed.entropy == pytest.approx(direct.entropy, rel=1e-8)
    assert pushed.interaction == pytest.approx(direct.interaction, rel=1e-8)
    assert pushed.confinement == pytest.approx(direct.confinement, rel=1e-8)


def test_pushforward_random_target(params, ball):
    """随机单调目标：推前能量与 evaluate(target) 相对差不超过 1e-5"""
    target = random_decreasing(11, params, 32, 2.0)
    transport = build_map(ball, target, params)
    pushed = pushforward_energy(transport, _as_state(ball), params).total
    direct = evaluate(target, params).total
    print(f"推前能量 {pushed:.12g}，直接计算 {direct:.12g}")
    assert abs(pushed - direct) <= 1e-5 * abs(direct)


def test_pushforward_rejects_bad_maps(params, ball):
    """非单调映射或源不匹配时报错"""
    broken = TransportMap(3, [0.0, 0.5, 1.0], [0.0, 0.6, 0.5], [1.0, -0.5], [1.0, 1.0])
    with pytest.raises(KernelSingularityError):
        pushforward_energy(broken, _as_state(ball), params)

    transport = build_map(ball, ball, params)
    other = uniform_ball(params, 0.5, uniform_grid(32, 2.0))
    with pytest.raises(ParameterError):
        pushforward_energy(transport, _as_state(other), params)


def test_jensen_gaps_nonnegative(params, ball):
    """三个 Jensen 间隙在所有采样点上非负"""
    for seed in range(5):
        target = random_decreasing(seed, params, 32, 2.0)
        gaps = jensen_gap(build_map(ball, target, params), params)
        assert gaps.min_gap >= -1e-10
        assert gaps.samples > 0
    print("✅ Jensen 间隙检查通过")


def test_jensen_gaps_vanish_for_identity(params, ball):
    """恒等映射的起点与约束间隙为零"""
    gaps = jensen_gap(build_map(ball, ball, params), params)
    assert abs(gaps.interaction_origin) <= 1e-8
    assert abs(gaps.confinement) <= 1e-8
    assert set(gaps.to_dict()) >= {'interaction_origin', 'interaction_pair', 'confinement',
                                   'min_gap'}


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_jensen_equality_on_dilation_maps(params, ball, lam):
    """伸缩映射（φ 为常数）上三个 Jensen 间隙都取等号，相对与绝对间隙 <= 1e-10"""
    for source in (ball, random_decreasing(9, params, 32, 2.0)):
        transport = build_map(source, source.dilate(lam, params.N), params)
        gaps = jensen_gap(transport, params)
        print(f"λ={lam}: {gaps.to_dict()}")
        for name in ('interaction_origin', 'interaction_pair', 'confinement',
                     'absolute_origin', 'absolute_pair', 'absolute_confinement'):
            assert abs(getattr(gaps, name)) <= 1e-10, name
        assert gaps.samples > source.support_cells


def test_absolute_gaps_reported(params, ball):
    """随机目标的绝对间隙非负，min_absolute_gap 写入字典"""
    target = random_decreasing(4, params, 32, 2.0)
    gaps = jensen_gap(build_map(ball, target, params), params)
    assert gaps.min_absolute_gap >= -1e-10
    for relative, absolute in (('interaction_origin', 'absolute_origin'),
                               ('interaction_pair', 'absolute_pair'),
                               ('confinement', 'absolute_confinement')):
        assert (getattr(gaps, relative) >= 0) == (getattr(gaps, absolute) >= 0)
    assert gaps.to_dict()['min_absolute_gap'] == gaps.min_absolute_gap


def test_swapped_maps_are_inverse(params, ball):
    """build_map(ρ, ρ̄) 与 build_map(ρ̄, ρ) 互为逆映射"""
    target = random_decreasing(5, params, 32, 2.0)
    forward = build_map(ball, target, params)
    backward = build_map(target, ball, params)
    a = np.linspace(0.02, 0.98, 25) * ball.support_radius
    image = forward.psi_prime_at(a)
    assert backward.psi_prime_at(image) == pytest.approx(a, rel=1e-10)
    assert backward.psi_prime_at(image) == pytest.approx(forward.inverse_at(image), rel=1e-10)
    r = np.linspace(0.02, 0.98, 25) * target.support_radius
    assert forward.psi_prime_at(backward.psi_prime_at(r)) == pytest.approx(r, rel=1e-10)


@given(st.floats(min_value=1e-3, max_value=1e3))
@settings(max_examples=200, deadline=None)
def test_z_bound_gaps_nonnegative(z):
    """逐点下界的间隙非负（扩散占优与公平竞争两种情形）"""
    for params in (ModelParams(3, -1.0, 2.0), ModelParams.fair_competition(3, -1.5, chi=1)):
        entropy, confinement = z_bound_gaps(params, np.array([z]))
        assert entropy[0] >= -1e-12
        assert confinement[0] >= -1e-12


def test_z_bound_gaps_at_one(params):
    """z = 1 处两个间隙为零，z <= 0 报错"""
    entropy, confinement = z_bound_gaps(params, np.array([1.0, 2.0]))
    assert entropy[0] == 0.0
    assert abs(confinement[0]) <= 1e-15
    assert confinement[1] > 0
    with pytest.raises(ParameterError):
        z_bound_gaps(params, np.array([0.0]))


def test_lower_bound_chain(params, steady):
    """推前能量 >= Jensen 下界 >= 稳态能量闭式（J = 64 的网格误差内）"""
    for seed in (1, 2, 3):
        target = random_decreasing(seed, params, 64, 2.0)
        transport = build_map(steady.density, target, params)
        chain = energy_lower_bound(transport, steady, params)
        print(f"种子 {seed}: {chain}")
        scale = abs(chain['z_bound'])
        assert chain['pushforward'] >= chain['jensen_bound'] - 1e-3 * scale
        assert chain['jensen_bound'] >= chain['z_bound'] - 1e-3 * scale
        assert chain['pushforward'] >= chain['z_bound'] - 1e-3 * scale


def test_transport_map_validation():
    """TransportMap 的形状与网格检查"""
    with pytest.raises(ParameterError):
        TransportMap(3, [0.0], [0.0], [], [])
    with pytest.raises(ParameterError):
        TransportMap(3, [0.1, 1.0], [0.0, 1.0], [1.0], [1.0])
    with pytest.raises(ParameterError):
        TransportMap(3, [0.0, 1.0], [0.0, 1.0, 2.0], [1.0], [1.0])
