#!/usr/bin/env python3
"""
命令行接口测试

测试子命令的退出码、配置错误、版本信息与输出文件。
"""

import json
import shutil
import sys
import tempfile
from pathlib import Path

import pytest

# 添加src目录到Python路径
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from radial_aggdiff.cli import EXIT_FAILURE, EXIT_SUCCESS, EXIT_USAGE, dispatch


@pytest.fixture
def temp_dir():
    """创建临时目录"""
    temp_dir = tempfile.mkdtemp()
    yield temp_dir
    shutil.rmtree(temp_dir)


def test_version(capsys):
    """--version 输出版本号"""
    assert dispatch(['--version']) == EXIT_SUCCESS
    assert '0.1.0' in capsys.readouterr().out


def test_hyp(temp_dir, capsys):
    """hyp 子命令成功并写出结果与清单"""
    code = dispatch(['-o', temp_dir, 'hyp', '--a', '0.5', '--b', '0.5', '--c', '1.5', '--z', '0.25'])
    assert code == EXIT_SUCCESS
    assert '✅ hyp' in capsys.readouterr().out
    result = json.loads((Path(temp_dir) / 'hyp.json').read_text(encoding='utf-8'))
    assert result['value'] == pytest.approx(result['scipy_reference'], rel=1e-12)
    manifest = json.loads((Path(temp_dir) / 'hyp_manifest.json').read_text(encoding='utf-8'))
    assert manifest['status'] == 'success'
    assert 'hyp.json' in manifest['files']


def test_hyp_pole_is_invalid(temp_dir):
    """c 为非正整数时退出码为 2"""
    code = dispatch(['-o', temp_dir, 'hyp', '--a', '1', '--b', '1', '--c=-2', '--z', '0.5'])
    assert code == EXIT_USAGE
    manifest = json.loads((Path(temp_dir) / 'hyp_manifest.json').read_text(encoding='utf-8'))
    assert manifest['status'] == 'invalid'


def test_unknown_subcommand():
    """未知子命令退出码为 2"""
    assert dispatch(['frobnicate']) == EXIT_USAGE


def test_missing_required_option(temp_dir):
    """缺少必填选项退出码为 2"""
    assert dispatch(['-o', temp_dir, 'hyp', '--a', '1']) == EXIT_USAGE


def test_invalid_config_file(temp_dir):
    """配置文件含未知键时退出码为 2"""
    config = Path(temp_dir) / 'bad.yaml'
    config.write_text("model:\n  q: 1\n", encoding='utf-8')
    assert dispatch(['-c', str(config), 'theta', '--points', '3']) == EXIT_USAGE


def test_invalid_model_parameter(temp_dir):
    """k 超出 (-N, 0) 时退出码为 2"""
    assert dispatch(['-o', temp_dir, 'theta', '--k=0.5']) == EXIT_USAGE


def test_theta(temp_dir):
    """theta 子命令写出四列 CSV"""
    assert dispatch(['-o', temp_dir, 'theta', '--dim', '3', '--k=-1.5', '--points', '5']) == EXIT_SUCCESS
    lines = (Path(temp_dir) / 'theta.csv').read_text(encoding='utf-8').splitlines()
    assert lines[0] == 's,theta,theta_prime,theta_by_angle'
    assert len(lines) == 6


def test_energy(temp_dir):
    """energy 子命令（默认均匀球）"""
    assert dispatch(['-o', temp_dir, 'energy', '--cells', '16']) == EXIT_SUCCESS
    result = json.loads((Path(temp_dir) / 'energy.json').read_text(encoding='utf-8'))
    assert result['entropy'] > 0
    assert result['interaction'] < 0
    assert result['interaction_form_difference'] <= 1e-6


def test_convexity_scan(temp_dir, capsys):
    """小分辨率的凸性扫描"""
    code = dispatch(['-o', temp_dir, 'convexity-scan', '--k=-2.5', '--resolution', '20'])
    assert code == EXIT_SUCCESS
    summary = json.loads((Path(temp_dir) / 'convexity_summary.json').read_text(encoding='utf-8'))
    assert summary['violation_count'] == 0
    assert summary['series_check'] is True
    assert (Path(temp_dir) / 'convexity_figure.csv').exists()
    assert 'violation_count' in capsys.readouterr().out


def test_convexity_scan_above_newtonian_is_consistent(temp_dir):
    """k > 2-N 时出现违例但与理论一致，退出码为 0"""
    code = dispatch(['-o', temp_dir, 'convexity-scan', '--k=-0.5', '--resolution', '40'])
    assert code == EXIT_SUCCESS
    summary = json.loads((Path(temp_dir) / 'convexity_summary.json').read_text(encoding='utf-8'))
    assert summary['expected_to_hold'] is False


def test_steady_without_extrapolation(temp_dir):
    """--no-extrapolate 只在 J 上求解，检验量不含外推结果"""
    config = Path(temp_dir) / 'coarse.yaml'
    config.write_text("tolerances:\n  characterization: 1.0e-3\n  virial: 1.0e-3\n"
                      "  energy_identity: 1.0e-3\n", encoding='utf-8')
    code = dispatch(['-c', str(config), '-o', temp_dir, 'steady', '--cells', '64', '--no-extrapolate'])
    assert code == EXIT_SUCCESS
    result = json.loads((Path(temp_dir) / 'steady_diagnostics.json').read_text(encoding='utf-8'))
    assert 'self_consistency' not in result
    assert result['checked']['characterization_residual'] == result['characterization_residual']


def test_failed_verification_exit_code(temp_dir):
    """验证失败时退出码为 1"""
    config = Path(temp_dir) / 'strict.yaml'
    config.write_text("tolerances:\n  kernel: 1.0e-300\n", encoding='utf-8')
    code = dispatch(['-c', str(config), '-o', temp_dir, 'theta', '--points', '4'])
    assert code == EXIT_FAILURE
