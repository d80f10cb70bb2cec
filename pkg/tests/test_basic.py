# -*- coding: utf-8 -*-
"""
基础功能测试
"""

import sys
from pathlib import Path

import pytest

# 添加src目录到Python路径
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

import radial_aggdiff
from radial_aggdiff import ExperimentRunner, ModelParams, RunConfig


def test_package_metadata():
    """测试包信息"""
    assert radial_aggdiff.__version__ == "0.1.0"
    assert set(radial_aggdiff.__all__) >= {'ExperimentRunner', 'RunConfig', 'ModelParams'}


def test_config_initialization():
    """测试配置初始化"""
    config = RunConfig()
    assert config.N == 3
    assert config.k == -1.5
    assert config.m is None
    assert config.chi == 1
    assert config.workers == 1


def test_config_to_dict():
    """测试配置转换为字典"""
    config_dict = RunConfig().to_dict()
    assert isinstance(config_dict, dict)
    assert config_dict['model']['N'] == 3
    assert config_dict['grid']['J'] == 256
    assert 'tolerances' in config_dict


def test_model_params_regimes():
    """测试区域判定"""
    assert ModelParams.fair_competition(3, -1.5).regime == "fair-competition"
    assert ModelParams(3, -1.5, 2.0).regime == "diffusion-dominated"
    assert ModelParams(3, -1.5, 1.2).regime == "attraction-dominated"
    assert ModelParams(3, -1.0, 2.0).is_newtonian


def test_runner_initialization(tmp_path):
    """测试运行器初始化"""
    runner = ExperimentRunner(RunConfig(output_dir=str(tmp_path)))
    assert runner.config is not None
    assert runner.params.is_fair_competition
    assert runner.grid.size == 257
    status = runner.get_status()
    assert isinstance(status, dict)
