#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
凸性批量扫描工具

对一组 (N, k) 逐个运行 convexity-scan，每组参数写到单独的子目录，最后汇总违例情况。
"""

import os
import sys
import argparse

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from radial_aggdiff.config import RunConfig
from radial_aggdiff.exceptions import RadialAggDiffError
from radial_aggdiff.main import ExperimentRunner


def parse_k_values(text, N):
    """解析 k 列表：逗号分隔的数值，或 'auto:n' 表示 (-N, 0) 内均匀取 n 个点"""
    if text.startswith('auto:'):
        count = int(text.split(':', 1)[1])
        return list(np.linspace(-N, 0.0, count + 2)[1:-1])
    return [float(v) for v in text.split(',') if v.strip()]


def scan_one(base_config, N, k, resolution, output_dir):
    """扫描单组参数"""
    print(f"扫描 N={N}, k={k:g}")
    config = base_config.with_overrides(
        N=N, k=k, m=None, resolution=resolution,
        output_dir=os.path.join(output_dir, f"N{N}_k{k:g}"),
    )
    runner = ExperimentRunner(config)
    return runner.convexity_scan()


def main():
    parser = argparse.ArgumentParser(description='批量运行凸性扫描')
    parser.add_argument('--config', '-c', help='基础配置文件路径')
    parser.add_argument('--dims', '-d', default='2,3,4', help='维数列表（默认：2,3,4）')
    parser.add_argument('--k', '-k', default='auto:6', help="k 列表或 'auto:n'（默认：auto:6）")
    parser.add_argument('--resolution', '-r', type=int, default=100, help='每个方向的格点数')
    parser.add_argument('--output', '-o', default='output_sweep', help='输出根目录')

    args = parser.parse_args()

    base_config = RunConfig.from_file(args.config) if args.config else RunConfig()
    dims = [int(v) for v in args.dims.split(',') if v.strip()]

    results = []
    for N in dims:
        for k in parse_k_values(args.k, N):
            try:
                result = scan_one(base_config, N, k, args.resolution, args.output)
                summary = result['results']
                results.append({
                    'N': N,
                    'k': k,
                    'status': result['status'],
                    'violations': summary.get('violation_count'),
                    'expected_to_hold': summary.get('expected_to_hold'),
                })
            except RadialAggDiffError as e:
                print(f"扫描 N={N}, k={k:g} 时出错：{str(e)}")
                results.append({'N': N, 'k': k, 'status': 'error', 'error': str(e)})

    # 输出统计信息
    success_count = sum(1 for r in results if r['status'] == 'success')
    error_count = len(results) - success_count

    print(f"\n扫描完成：")
    print(f"  一致：{success_count}")
    print(f"  不一致或出错：{error_count}")
    print("\n  N      k       违例数   应成立")
    for r in results:
        print(f"  {r['N']:<4d} {r['k']:>8.4f}  {str(r.get('violations', '-')):>7}   "
              f"{'是' if r.get('expected_to_hold') else '否'}")

    if error_count > 0:
        sys.exit(1)


if __name__ == '__main__':
    main()
