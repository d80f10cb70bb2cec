"""
工具模块

包含高斯求积与几何加密复合规则等通用数值工具。
"""

from .quadrature import gauss_jacobi_left, gauss_legendre, graded_rule, on_interval

__all__ = ["gauss_legendre", "gauss_jacobi_left", "graded_rule", "on_interval"]
