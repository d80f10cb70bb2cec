"""
命令行接口模块

提供 hyp、theta、potential、energy、steady、transport、convexity-scan、
inequality-fuzz、simulate 九个子命令。退出码：0 成功，1 验证失败，2 用法或配置错误。
"""

import sys
from typing import Dict, Optional, Sequence

import click

from . import __version__
from .config import RunConfig
from .exceptions import ConfigError, ParameterError, RadialAggDiffError
from .main import ExperimentRunner

EXIT_SUCCESS = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

EXIT_CODES = {
    'success': EXIT_SUCCESS,
    'failed': EXIT_FAILURE,
    'error': EXIT_FAILURE,
    'invalid': EXIT_USAGE,
}

MODEL_OPTIONS = (
    click.option('--dim', 'N', type=int, help='空间维数 N'),
    click.option('--k', 'k', type=float, help='吸引指数 k ∈ (-N, 0)'),
    click.option('--m', 'm', type=float, help='扩散指数 m（省略时取 m_c）'),
    click.option('--chi', 'chi', type=click.IntRange(0, 1), help='约束势开关 χ ∈ {0, 1}'),
    click.option('--mass', 'M', type=float, help='总质量 M'),
    click.option('--cells', 'J', type=int, help='径向单元数 J'),
    click.option('--r-max', 'r_max', type=float, help='网格半径'),
)


def model_options(func):
    """为子命令附加模型与网格参数"""
    for option in reversed(MODEL_OPTIONS):
        func = option(func)
    return func


def _build_runner(ctx: click.Context, **overrides) -> ExperimentRunner:
    config = ctx.obj['config'].with_overrides(**overrides)
    return ExperimentRunner(config, show_progress=ctx.obj['progress'])


def _report(ctx: click.Context, result: Dict):
    """回显结果并以对应退出码结束"""
    command = result['command']
    status = result['status']
    results = result.get('results', {})
    if status == 'success':
        click.echo(f"✅ {command}: {result['message']}")
    elif status == 'failed':
        click.echo(f"❌ {command}: {result['message']} {results.get('failures', '')}", err=True)
    else:
        click.echo(f"❌ {command}: {result['message']}: {results.get('error', '未知错误')}", err=True)

    for key, value in results.items():
        if isinstance(value, (bool, int, float, str)) and key != 'error':
            click.echo(f"  {key}: {value}")
    if results.get('issues'):
        for issue in results['issues']:
            click.echo(f"⚠️  {issue}")
    click.echo(f"输出文件: {len(result['files'])} 个，耗时 {result['processing_time']} 秒")
    ctx.exit(EXIT_CODES[status])


@click.group()
@click.option('--config', '-c', 'config_file', help='配置文件路径（YAML/JSON）')
@click.option('--output', '-o', 'output_dir', help='输出目录路径')
@click.option('--seed', type=int, help='随机种子')
@click.option('--workers', type=click.IntRange(min=1), help='模糊测试的并行线程数')
@click.option('--verbose', '-v', is_flag=True, help='输出调试日志')
@click.option('--progress', is_flag=True, help='为长时间循环显示进度条')
@click.version_option(version=__version__, prog_name='radial-aggdiff')
@click.pass_context
def main(ctx, config_file, output_dir, seed, workers, verbose, progress):
    """
    径向聚集-扩散方程数值实验 - 超几何函数、角向核、稳态、输运不等式与梯度流
    """
    config = RunConfig.from_file(config_file) if config_file else RunConfig()
    config = config.with_overrides(
        output_dir=output_dir,
        seed=seed,
        workers=workers,
        log_level='DEBUG' if verbose else None,
    )
    ctx.obj = {'config': config, 'progress': progress}


@main.command()
@click.option('--a', 'a', type=float, required=True, help='参数 a')
@click.option('--b', 'b', type=float, required=True, help='参数 b')
@click.option('--c', 'c', type=float, required=True, help='参数 c')
@click.option('--z', 'z', type=float, required=True, help='自变量 z <= 1')
@click.pass_context
def hyp(ctx, a, b, c, z):
    """计算 2F1(a, b; c; z) 并检验恒等式"""
    _report(ctx, _build_runner(ctx).hyp(a, b, c, z))


@main.command()
@model_options
@click.option('--points', type=click.IntRange(min=2), default=20, show_default=True,
              help='s ∈ [0, 0.95] 上的采样点数')
@click.pass_context
def theta(ctx, points, **model):
    """角向核 ϑ 的闭式与角向积分对照"""
    _report(ctx, _build_runner(ctx, **model).theta(points))


@main.command()
@model_options
@click.option('--density', 'density_path', type=click.Path(exists=True, dir_okay=False),
              help='r,rho 密度文件（省略时取均匀球）')
@click.pass_context
def potential(ctx, density_path, **model):
    """网格节点上的势 S_k 与单边权重 ω"""
    _report(ctx, _build_runner(ctx, **model).potential(density_path))


@main.command()
@model_options
@click.option('--density', 'density_path', type=click.Path(exists=True, dir_okay=False),
              help='r,rho 密度文件（省略时取均匀球）')
@click.pass_context
def energy(ctx, density_path, **model):
    """自由能分解"""
    _report(ctx, _build_runner(ctx, **model).energy(density_path))


@main.command()
@model_options
@click.option('--init', 'init_path', type=click.Path(exists=True, dir_okay=False),
              help='初始密度文件（省略时取均匀球）')
@click.option('--max-iter', type=click.IntRange(min=1), help='最大迭代次数')
@click.option('--extrapolate/--no-extrapolate', default=None,
              help='是否在 J 与 2J 上求解并外推检验量（默认见配置）')
@click.pass_context
def steady(ctx, init_path, max_iter, extrapolate, **model):
    """不动点迭代求稳态并检验刻画与恒等式"""
    runner = _build_runner(ctx, max_iter=max_iter, extrapolate=extrapolate, **model)
    _report(ctx, runner.steady(init_path))


@main.command()
@model_options
@click.option('--source', 'source_path', type=click.Path(exists=True, dir_okay=False),
              required=True, help='源密度（稳态）文件')
@click.option('--target', 'target_path', type=click.Path(exists=True, dir_okay=False),
              required=True, help='目标密度文件')
@click.pass_context
def transport(ctx, source_path, target_path, **model):
    """输运映射、推前能量与 Jensen 间隙"""
    _report(ctx, _build_runner(ctx, **model).transport(source_path, target_path))


@main.command('convexity-scan')
@model_options
@click.option('--resolution', type=click.IntRange(min=16), help='每个方向的格点数')
@click.pass_context
def convexity_scan(ctx, resolution, **model):
    """切线不等式的格点扫描与曲线族表格"""
    _report(ctx, _build_runner(ctx, resolution=resolution, **model).convexity_scan())


@main.command('inequality-fuzz')
@model_options
@click.option('--trials', type=click.IntRange(min=1), help='随机密度个数')
@click.pass_context
def inequality_fuzz(ctx, trials, **model):
    """随机密度上检验 F[ρ] >= F[ρ̄]"""
    _report(ctx, _build_runner(ctx, trials=trials, **model).inequality_fuzz())


@main.command()
@model_options
@click.option('--init', 'init_path', type=click.Path(exists=True, dir_okay=False),
              help='初始密度文件（省略时取均匀球）')
@click.option('--triangular', is_flag=True, help='以三角形剖面为初值')
@click.option('--t-max', type=float, help='最长演化时间')
@click.option('--snapshot-every', type=click.IntRange(min=0), help='快照间隔步数')
@click.pass_context
def simulate(ctx, init_path, triangular, t_max, snapshot_every, **model):
    """有限体积梯度流演化到平衡"""
    runner = _build_runner(ctx, t_max=t_max, snapshot_every=snapshot_every, **model)
    _report(ctx, runner.simulate(init_path, triangular=triangular))


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """解析参数并运行子命令，返回退出码"""
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        result = main.main(args=args, prog_name='radial-aggdiff', standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        click.echo("已中止", err=True)
        return EXIT_FAILURE
    except (ConfigError, ParameterError) as e:
        click.echo(f"❌ 配置错误: {e}", err=True)
        return EXIT_USAGE
    except RadialAggDiffError as e:
        click.echo(f"❌ 发生错误: {e}", err=True)
        return EXIT_FAILURE
    return result if isinstance(result, int) else EXIT_SUCCESS


def run():
    """控制台脚本入口"""
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == '__main__':
    run()
