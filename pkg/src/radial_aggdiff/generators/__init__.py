"""
生成器模块

包含把计算结果写成 CSV、JSON 与运行清单的报告生成器。
"""

from .report_writer import ReportWriter

__all__ = ["ReportWriter"]
