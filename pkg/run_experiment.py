#!/usr/bin/env python3
"""
径向聚集-扩散实验运行脚本

读取本地配置，求稳态并做一轮小规模的不等式模糊测试。
"""

import sys
from pathlib import Path

# 添加src目录到Python路径
sys.path.insert(0, str(Path(__file__).parent / "src"))

from radial_aggdiff.main import ExperimentRunner
from radial_aggdiff.config import RunConfig


def main():
    """运行默认实验"""
    # 尝试自动加载配置文件（优先本地配置，其次示例配置）
    config = None
    for candidate in [
        "config.yaml",
        "config.yml",
        "config.json",
        "config.example.yaml",
        "config.example.json",
    ]:
        if Path(candidate).exists():
            config = RunConfig.from_file(candidate)
            print(f"⚙️ 使用配置文件: {candidate}")
            break
    if config is None:
        config = RunConfig()
        print("⚙️ 使用默认配置")

    params = config.params
    print(f"🚀 开始实验: {params}")
    print(f"📐 区域: {params.regime}，m_c = {params.m_c:.6g}")
    print(f"📁 输出目录: {config.output_dir}")
    print()

    runner = ExperimentRunner(config, show_progress=True)

    result = runner.steady()
    if result['status'] != 'success':
        print("❌ 稳态求解失败!")
        print(f"错误信息: {result['results'].get('error', result['results'].get('failures'))}")
        return 1

    steady = result['results']
    print("🎉 稳态求解完成!")
    print(f"📊 统计信息:")
    print(f"  - 迭代次数: {steady['iterations']}")
    print(f"  - 支撑半径: {steady['support_radius']:.6g}")
    print(f"  - 自由能: {steady['energy']:.10g}")
    print(f"  - 刻画残差: {steady['characterization_residual']:.3e}")
    print(f"  - 维里残差: {steady['virial_residual']:.3e}")
    print()

    result = runner.inequality_fuzz()
    fuzz = result['results']
    if result['status'] == 'success':
        print(f"✅ {fuzz['trials']} 个随机密度的能量都不低于稳态能量（最小间隙 {fuzz['min_gap']:.3e}）")
    else:
        print(f"❌ 不等式检验失败: {fuzz.get('failures', fuzz.get('error'))}")
        return 1

    print(f"📁 输出文件位置: {config.output_dir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
