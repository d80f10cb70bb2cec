#!/usr/bin/env python3
"""
特殊函数测试

测试 Gamma 函数、Pochhammer 符号、超几何级数与积分表示以及恒等式残差。
"""

import math
import sys
from pathlib import Path

import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy import special

# 添加src目录到Python路径
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from radial_aggdiff.exceptions import DivergenceError, DomainError, ParameterError, PoleError
from radial_aggdiff.models import HypergeomParams
from radial_aggdiff.specfun import (gamma, gauss_limit, hyp2f1, hyp2f1_array, hyp2f1_integral,
                                    identity_residuals, pochhammer, rgamma)


def test_gamma_classical_values():
    """测试 Gamma 函数的经典值"""
    assert gamma(1.0) == pytest.approx(1.0, rel=1e-14)
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    assert gamma(-0.5) == pytest.approx(-2.0 * math.sqrt(math.pi), rel=1e-13)
    assert gamma(6.0) == pytest.approx(120.0, rel=1e-13)


def test_gamma_recursion():
    """Γ(4.2) 与递推 3.2·2.2·1.2·Γ(1.2) 一致"""
    assert gamma(4.2) == pytest.approx(3.2 * 2.2 * 1.2 * gamma(1.2), rel=1e-13)


def test_gamma_poles():
    """非正整数处抛出 PoleError"""
    for x in (0.0, -1.0, -7.0):
        with pytest.raises(PoleError):
            gamma(x)
    assert rgamma(-3.0) == 0.0


@given(st.floats(min_value=-10.0, max_value=50.0, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_gamma_matches_scipy(x):
    """与 scipy.special.gamma 相对误差不超过 1e-11"""
    assume(abs(x - round(x)) > 1e-2 or x > 0.5)
    expected = special.gamma(x)
    assert gamma(x) == pytest.approx(expected, rel=1e-11)


def test_pochhammer():
    """测试 Pochhammer 符号"""
    assert pochhammer(2.7, 0) == 1.0
    assert pochhammer(1.0, 5) == 120.0
    assert pochhammer(3.0, 2) == 12.0
    assert pochhammer(-2.0, 3) == 0.0
    with pytest.raises(ParameterError):
        pochhammer(1.0, -1)


def test_hyp2f1_at_zero_is_one():
    """F(a,b;c;0) = 1"""
    assert hyp2f1(HypergeomParams(0.3, -1.7, 2.5, 0.0)) == 1.0


def test_hyp2f1_logarithm():
    """F(1,1;2;z) = -ln(1-z)/z，包括走积分表示的 z = 0.95"""
    for z in (0.5, -0.5, 0.95):
        expected = -math.log(1.0 - z) / z
        assert hyp2f1(HypergeomParams(1.0, 1.0, 2.0, z)) == pytest.approx(expected, rel=1e-10)


def test_hyp2f1_gauss_limit():
    """z = 1 处返回 Gauss 极限，c <= a+b 时发散"""
    value = hyp2f1(HypergeomParams(0.5, 0.5, 2.0, 1.0))
    assert value == pytest.approx(4.0 / math.pi, rel=1e-13)
    assert gauss_limit(0.5, 0.5, 2.0) == value
    with pytest.raises(DivergenceError):
        hyp2f1(HypergeomParams(1.0, 1.0, 2.0, 1.0))


def test_hypergeom_params_validation():
    """c 为非正整数或 z 越界时报错"""
    with pytest.raises(PoleError):
        HypergeomParams(1.0, 1.0, -2.0, 0.1)
    with pytest.raises(DomainError):
        HypergeomParams(1.0, 1.0, 2.0, 1.5)
    with pytest.raises(ValueError):
        HypergeomParams(1.0, 1.0, 2.0, -1.0)


def test_terminating_series():
    """a 为负整数时级数截断为多项式"""
    # F(-2, b; c; z) = 1 - 2bz/c + b(b+1)z²/(c(c+1))
    b, c, z = 1.5, 2.5, 0.97
    expected = 1.0 - 2.0 * b * z / c + b * (b + 1.0) * z * z / (c * (c + 1.0))
    assert hyp2f1(HypergeomParams(-2.0, b, c, z)) == pytest.approx(expected, rel=1e-14)


def test_integral_representation():
    """积分表示与级数在 (1.25, 1.0, 1.5, 0.3) 处一致"""
    p = HypergeomParams(1.25, 1.0, 1.5, 0.3)
    integral = hyp2f1_integral(p)
    assert abs(integral * gamma(1.5) / (gamma(1.0) * gamma(0.5)) - hyp2f1(p)) <= 1e-8


def test_integral_beta_values():
    """H(a,b;c;0) 与 H(0,b;c;z) 都是 Beta 函数值"""
    beta = gamma(0.5) * gamma(1.5) / gamma(2.0)
    assert hyp2f1_integral(HypergeomParams(0.7, 0.5, 2.0, 0.0)) == pytest.approx(beta, rel=1e-11)
    assert hyp2f1_integral(HypergeomParams(0.0, 0.5, 2.0, 0.8)) == pytest.approx(beta, rel=1e-11)


def test_integral_requires_ordered_parameters():
    """积分表示要求 c > b > 0"""
    with pytest.raises(ParameterError):
        hyp2f1_integral(HypergeomParams(1.0, 2.0, 1.5, 0.3))


@given(
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=0.5, max_value=3.0),
    st.floats(min_value=-0.6, max_value=0.8),
)
@settings(max_examples=100, deadline=None)
def test_hyp2f1_matches_scipy(a, b, c, z):
    """级数与 scipy.special.hyp2f1 一致"""
    value = hyp2f1(HypergeomParams(a, b, c, z))
    expected = special.hyp2f1(a, b, c, z)
    assert abs(value - expected) <= 1e-9 * max(1.0, abs(expected))


def test_hyp2f1_monotone_in_z():
    """a,b,c > 0 时 F 关于 z 单调不减"""
    for a, b, c in ((0.75, 0.25, 1.5), (1.0, 1.0, 2.0), (2.3, 0.4, 0.9)):
        values = [hyp2f1(HypergeomParams(a, b, c, z)) for z in [i / 40.0 for i in range(39)]]
        assert all(y >= x for x, y in zip(values[:-1], values[1:]))


def test_hyp2f1_array_handles_limit():
    """数组版本在 z = 1 处使用 Gauss 极限"""
    values = hyp2f1_array(0.5, 0.5, 2.0, [0.0, 0.5, 1.0])
    assert values[0] == pytest.approx(1.0)
    assert values[2] == pytest.approx(4.0 / math.pi, rel=1e-13)
    with pytest.raises(DomainError):
        hyp2f1_array(0.5, 0.5, 2.0, [1.2])


def test_identity_residuals():
    """恒等式残差"""
    at_zero = identity_residuals(HypergeomParams(0.8, 1.3, 2.1, 0.0))
    assert at_zero.contiguous_lower_a == pytest.approx(0.0, abs=1e-14)

    quadratic = identity_residuals(HypergeomParams(1.25, 1.0, 2.0, 0.36))
    assert quadratic.quadratic_transformation <= 1e-9

    derivative = identity_residuals(HypergeomParams(1.25, 1.5, 1.5, 0.4))
    assert derivative.derivative <= 1e-6
    assert derivative.max_residual <= 1e-6
    print(f"✅ 恒等式残差: {derivative.to_dict()}")


def test_identity_residuals_domain():
    """z = 1 时恒等式检验不适用"""
    with pytest.raises(DomainError):
        identity_residuals(HypergeomParams(0.5, 0.5, 2.0, 1.0))
