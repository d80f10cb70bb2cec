#!/usr/bin/env python3
"""
报告生成器测试

测试 CSV 精度、密度文件、JSON 序列化与运行清单。
"""

import json
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

# 添加src目录到Python路径
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from radial_aggdiff.density import read_density_csv, uniform_ball, uniform_grid
from radial_aggdiff.generators import ReportWriter
from radial_aggdiff.models import ModelParams


@pytest.fixture
def temp_dir():
    """创建临时目录"""
    temp_dir = tempfile.mkdtemp()
    yield temp_dir
    shutil.rmtree(temp_dir)


@pytest.fixture
def writer(temp_dir):
    return ReportWriter(str(Path(temp_dir) / "out"))


def test_write_csv_full_precision(writer):
    """CSV 使用 17 位有效数字，可以无损读回"""
    table = np.array([[1.0 / 3.0, np.pi], [2.0 / 7.0, np.e]])
    path = writer.write_csv('table.csv', ['x', 'y'], table)
    lines = Path(path).read_text(encoding='utf-8').splitlines()
    assert lines[0] == 'x,y'
    back = np.loadtxt(path, delimiter=',', skiprows=1)
    assert np.array_equal(back, table)


def test_write_csv_column_check(writer):
    """列数与表头不一致时报错"""
    with pytest.raises(ValueError):
        writer.write_csv('bad.csv', ['x'], np.ones((3, 2)))


def test_write_density_in_subdirectory(writer):
    """子目录自动创建，密度文件可读回"""
    params = ModelParams.fair_competition(3, -1.5, M=0.1)
    rho = uniform_ball(params, 1.0, uniform_grid(16, 2.0))
    path = writer.write_density('snapshots/snapshot_0000.csv', rho)
    assert Path(path).parent.name == 'snapshots'
    assert np.array_equal(read_density_csv(path).values, rho.values)


def test_write_json_numpy_values(writer):
    """numpy 标量与数组可以写入 JSON"""
    path = writer.write_json('data.json', {'x': np.float64(0.5), 'v': np.arange(3), 'ok': np.bool_(True)})
    data = json.loads(Path(path).read_text(encoding='utf-8'))
    assert data == {'x': 0.5, 'v': [0, 1, 2], 'ok': True}


def test_manifest(writer):
    """清单记录命令、配置、版本、耗时与文件列表"""
    writer.write_json('result.json', {'value': 1})
    path = writer.write_manifest('energy', {'model': {'N': 3}}, {'evaluate': 0.123456},
                                 extra={'status': 'success'})
    manifest = json.loads(Path(path).read_text(encoding='utf-8'))
    assert Path(path).name == 'energy_manifest.json'
    assert manifest['command'] == 'energy'
    assert manifest['status'] == 'success'
    assert manifest['files'] == ['result.json']
    assert manifest['timings']['evaluate'] == pytest.approx(0.1235)
    assert set(manifest['versions']) >= {'radial_aggdiff', 'numpy', 'scipy', 'python'}


def test_statistics(writer):
    """统计写出的文件数与字节数"""
    writer.write_json('a.json', {})
    writer.write_csv('b.csv', ['x'], np.ones((2, 1)))
    stats = writer.get_statistics()
    assert stats['files'] == 2
    assert stats['bytes_written'] > 0
    assert len(writer.get_generated_files()) == 2
