"""
主控制器模块

ExperimentRunner 主类，把配置、数值模块与报告生成器串成各个子命令的处理流程。
每个子命令返回带 'status' 的结果字典：
success（验证通过）、failed（验证失败）、error（数值失败）、invalid（参数或配置错误）。
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy import special
from tqdm import tqdm

from .config import RunConfig
from .convexity import (decoupling_residual, figure_rows, relative_convexity_residual, scan,
                        series_coefficient_check, sharp_n_inequality)
from .density import (cumulative_mass, random_decreasing, read_density_csv, triangular_profile,
                      uniform_ball)
from .energy import (energy_identity_defect, evaluate, stationary_energy_identity,
                     virial_identity_residual)
from .evolve import RadialSimulator
from .exceptions import ConfigError, ParameterError, RadialAggDiffError, SimulationTimeout
from .generators import ReportWriter
from .kernel import theta, theta_by_angle, theta_prime
from .models import HypergeomParams, RadialDensity, SteadyState
from .potential import omega, potential_profile, symmetric_interaction
from .specfun import gamma, hyp2f1, hyp2f1_integral, identity_residuals, rgamma
from .steady import (SteadyStateSolver, characterization_residual, el_level_variance,
                     self_consistency)
from .transport import build_map, energy_lower_bound, jensen_gap

Outcome = Tuple[str, Dict, Dict[str, float]]

RELATIVE_Z_POINTS = 99
SERIES_TERMS = 10_000


class ExperimentRunner:
    """实验运行器主控制器"""

    def __init__(self, config: RunConfig, show_progress: bool = False):
        """初始化实验运行器

        Args:
            config: 运行配置对象
            show_progress: 是否为长循环显示 tqdm 进度条
        """
        self.config = config
        self.config.validate()
        self.show_progress = show_progress

        # 初始化日志
        self._setup_logging()

        self.params = config.params
        self.grid = config.grid
        self.writer = ReportWriter(config.output_dir)
        self.logger.info(f"ExperimentRunner初始化完成，参数: {self.params}，输出目录: {config.output_dir}")

    def _setup_logging(self):
        """设置日志配置"""
        logging.basicConfig(
            level=getattr(logging, str(self.config.log_level).upper()),
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )
        self.logger = logging.getLogger(__name__)

    def _execute(self, command: str, body: Callable[[], Outcome]) -> Dict:
        """执行子命令并统一处理异常、计时与清单"""
        start_time = time.time()
        self.logger.info(f"开始执行 {command} ...")
        extra: Dict = {}
        try:
            status, results, timings = body()
            message = '验证通过' if status == 'success' else '验证失败'
        except (ParameterError, ConfigError) as e:
            self.logger.error(f"{command} 参数错误: {e}")
            status, results, timings, message = 'invalid', {'error': str(e)}, {}, '参数错误'
        except SimulationTimeout as e:
            self.logger.error(f"{command} 超时: {e}")
            status, results, timings, message = 'error', {'error': str(e)}, {}, '演化超时'
            extra['diagnostics'] = e.diagnostics
            results['diagnostics'] = e.diagnostics
        except RadialAggDiffError as e:
            self.logger.error(f"{command} 数值计算失败: {e}")
            status, results, timings, message = 'error', {'error': str(e)}, {}, '计算失败'

        processing_time = time.time() - start_time
        timings = dict(timings)
        timings['total'] = processing_time
        extra['status'] = status
        self.writer.write_manifest(command, self.config.to_dict(), timings, extra)
        self.logger.info(f"{command} 结束，状态 {status}，耗时 {processing_time:.2f} 秒")
        return {
            'status': status,
            'command': command,
            'results': results,
            'files': self.writer.get_generated_files(),
            'processing_time': round(processing_time, 2),
            'message': message,
        }

    def _load_density(self, path: Optional[str]) -> RadialDensity:
        """读取密度文件，未给出时生成半径 r_max/2 的均匀球"""
        if path:
            return read_density_csv(path)
        return uniform_ball(self.params, 0.5 * self.config.r_max, self.grid)

    def _steady_solver(self) -> SteadyStateSolver:
        return SteadyStateSolver(
            self.params,
            tol=self.config.tolerance('steady'),
            max_iter=self.config.max_iter,
            damping=self.config.damping,
        )

    def _solve_steady(self, init: Optional[RadialDensity] = None) -> Tuple[SteadyState, SteadyStateSolver]:
        solver = self._steady_solver()
        init = init if init is not None else self._load_density(None)
        return solver.solve(init), solver

    # 子命令 hyp
    def hyp(self, a: float, b: float, c: float, z: float) -> Dict:
        def body() -> Outcome:
            p = HypergeomParams(a, b, c, z)
            start = time.time()
            value = hyp2f1(p)
            results = {'a': a, 'b': b, 'c': c, 'z': z, 'value': value}
            try:
                reference = float(special.hyp2f1(a, b, c, z))
                results['scipy_reference'] = reference
            except (OverflowError, ValueError):
                reference = None
            if c > b > 0 and z < 1:
                integral = hyp2f1_integral(p)
                results['integral'] = integral
                results['integral_relation_error'] = abs(
                    value - integral * gamma(c) * rgamma(b) * rgamma(c - b))

            passed = True
            if -1 < z < 1:
                residuals = identity_residuals(p)
                results['identities'] = residuals.to_dict()
                scale = max(1.0, abs(value))
                if residuals.derivative > self.config.tolerance('derivative') * scale:
                    passed = False
                for name in ('quadratic_transformation', 'contiguous_lower_a', 'contiguous_lower_c'):
                    residual = getattr(residuals, name)
                    if residual is not None and residual > self.config.tolerance('identity') * scale:
                        passed = False
            self.writer.write_json('hyp.json', results)
            return ('success' if passed else 'failed'), results, {'evaluate': time.time() - start}

        return self._execute('hyp', body)

    # 子命令 theta
    def theta(self, points: int = 20, s_max: float = 0.95) -> Dict:
        def body() -> Outcome:
            start = time.time()
            s = np.linspace(0.0, s_max, points)
            values = np.asarray(theta(self.params, s))
            slopes = np.asarray(theta_prime(self.params, s))
            oracle = np.array([theta_by_angle(self.params, x) for x in s])
            relative = np.abs(values - oracle) / np.abs(oracle)
            self.writer.write_csv('theta.csv', ['s', 'theta', 'theta_prime', 'theta_by_angle'],
                                  np.column_stack([s, values, slopes, oracle]))
            results = {
                'points': points,
                'max_relative_difference': float(np.max(relative)),
                'monotone': bool(np.all(np.diff(values) >= 0)),
            }
            self.writer.write_json('theta.json', results)
            passed = results['max_relative_difference'] <= self.config.tolerance('kernel')
            return ('success' if passed else 'failed'), results, {'evaluate': time.time() - start}

        return self._execute('theta', body)

    # 子命令 potential
    def potential(self, density_path: Optional[str] = None) -> Dict:
        def body() -> Outcome:
            rho = self._load_density(density_path)
            start = time.time()
            profile = potential_profile(rho, self.params)
            weights = omega(rho, self.params, rho.grid)
            self.writer.write_csv('potential.csv', ['r', 'S', 'omega'],
                                  np.column_stack([profile.grid, profile.values, weights]))
            issues = profile.sign_issues()
            results = {
                'cells': rho.cell_count,
                'min_potential': float(np.min(profile.values)),
                'max_potential': float(np.max(profile.values)),
                'issues': issues,
            }
            self.writer.write_json('potential.json', results)
            return ('failed' if issues else 'success'), results, {'convolve': time.time() - start}

        return self._execute('potential', body)

    # 子命令 energy
    def energy(self, density_path: Optional[str] = None) -> Dict:
        def body() -> Outcome:
            rho = self._load_density(density_path)
            start = time.time()
            breakdown = evaluate(rho, self.params)
            timings = {'evaluate': time.time() - start}
            start = time.time()
            symmetric = symmetric_interaction(rho, self.params)
            timings['symmetric_oracle'] = time.time() - start

            results = breakdown.to_dict()
            scale = max(abs(symmetric), 1e-300)
            results['symmetric_interaction'] = symmetric
            results['interaction_form_difference'] = abs(breakdown.interaction - symmetric) / scale
            results['issues'] = breakdown.sign_issues()
            self.writer.write_json('energy.json', results)
            return ('failed' if results['issues'] else 'success'), results, timings

        return self._execute('energy', body)

    # 子命令 steady
    def steady(self, init_path: Optional[str] = None) -> Dict:
        def body() -> Outcome:
            params = self.params
            init = self._load_density(init_path)
            start = time.time()
            fine = None
            if self.config.extrapolate:
                solver = self._steady_solver()
                ss, fine = solver.solve_pair(init)
            else:
                ss, solver = self._solve_steady(init)
            timings = {'solve': time.time() - start}

            start = time.time()
            checks = {
                'characterization_residual': characterization_residual(ss, params),
                'virial_residual': virial_identity_residual(ss, params),
                'el_variance': el_level_variance(ss, params),
                'energy': evaluate(ss, params).total,
                'energy_identity': stationary_energy_identity(ss, params),
                'energy_identity_gap': abs(energy_identity_defect(ss, params)),
            }
            measured = dict(checks)
            if fine is not None:
                consistency = self_consistency(ss, fine, params)
                checks['self_consistency'] = consistency
                checks['fine_cells'] = fine.density.cell_count
                measured['characterization_residual'] = consistency['characterization']['extrapolated']
                measured['virial_residual'] = consistency['virial']['extrapolated']
                measured['energy_identity_gap'] = consistency['energy_identity']['extrapolated']
                measured['el_variance'] = max(checks['el_variance'], el_level_variance(fine, params))
            timings['verify'] = time.time() - start

            limits = {
                'characterization_residual': self.config.tolerance('characterization'),
                'virial_residual': self.config.tolerance('virial'),
                'el_variance': self.config.tolerance('el_variance'),
                'energy_identity_gap': self.config.tolerance('energy_identity'),
            }
            failures = [name for name, limit in limits.items() if measured[name] > limit]

            results = ss.to_dict()
            results.update(checks)
            results['checked'] = {name: measured[name] for name in limits}
            results['failures'] = failures
            results['solver'] = solver.get_statistics()
            self.writer.write_density('steady_density.csv', ss.density)
            self.writer.write_json('steady_diagnostics.json', results)
            return ('failed' if failures else 'success'), results, timings

        return self._execute('steady', body)

    def _transport_checks(self, source_ss: SteadyState, target: RadialDensity,
                          target_energy: float) -> Dict:
        tmap = build_map(source_ss.density, target, self.params)
        gaps = jensen_gap(tmap, self.params)
        chain = energy_lower_bound(tmap, source_ss, self.params)
        mass_error = float(np.max(np.abs(
            cumulative_mass(target, self.params, tmap.psi_prime)
            - cumulative_mass(source_ss.density, self.params, tmap.source_grid))))
        return {
            'map': tmap,
            'jensen': gaps.to_dict(),
            'chain': chain,
            'pushforward_mismatch': abs(chain['pushforward'] - target_energy) / abs(target_energy),
            'mass_identity_error': mass_error,
        }

    # 子命令 transport
    def transport(self, source_path: str, target_path: str) -> Dict:
        def body() -> Outcome:
            source = read_density_csv(source_path)
            target = read_density_csv(target_path)
            start = time.time()
            source_ss = SteadyState.from_density(source, self.params)
            checks = self._transport_checks(source_ss, target, evaluate(target, self.params).total)
            tmap = checks.pop('map')
            timings = {'transport': time.time() - start}

            # φ 按节点右侧单元给出，最后一个节点沿用最后一个单元
            phi_nodes = np.append(tmap.phi, tmap.phi[-1])
            self.writer.write_csv('transport_map.csv', ['a', 'psi_prime', 'phi'],
                                  np.column_stack([tmap.source_grid, tmap.psi_prime, phi_nodes]))
            failures = []
            if checks['jensen']['min_gap'] < -self.config.tolerance('jensen'):
                failures.append('jensen')
            if checks['pushforward_mismatch'] > self.config.tolerance('pushforward'):
                failures.append('pushforward')
            if checks['mass_identity_error'] > self.config.tolerance('mass') * self.params.M:
                failures.append('mass_identity')
            checks['failures'] = failures
            checks['refined_cells'] = tmap.cell_count
            self.writer.write_json('transport_gaps.json', checks)
            return ('failed' if failures else 'success'), checks, timings

        return self._execute('transport', body)

    # 子命令 convexity-scan
    def convexity_scan(self, resolution: Optional[int] = None) -> Dict:
        def body() -> Outcome:
            params = self.params
            start = time.time()
            report = scan(params, resolution or self.config.resolution, self.config.tolerance('scan'))
            header, table = figure_rows(params)
            self.writer.write_csv('convexity_figure.csv', header, table)
            timings = {'scan': time.time() - start}

            summary = report.to_summary()
            failures = []
            if not report.consistent:
                failures.append('scan')

            start = time.time()
            t = np.arange(1, 1001) / 1001.0
            summary['sharp_n_min'] = float(np.min(sharp_n_inequality(params.N, t)))
            if summary['sharp_n_min'] < -1e-12:
                failures.append('sharp_n')
            if params.N >= 3 and params.k < 2 - params.N:
                summary['series_check'] = series_coefficient_check(params, SERIES_TERMS)
                z = np.arange(1, RELATIVE_Z_POINTS + 1) / (RELATIVE_Z_POINTS + 1.0)
                relative = [relative_convexity_residual(params, float(x)) for x in z]
                summary['relative_convexity_min'] = float(np.min(relative))
                if not summary['series_check']:
                    failures.append('series_check')
                if summary['relative_convexity_min'] < -self.config.tolerance('scan'):
                    failures.append('relative_convexity')
            elif params.N == 2:
                u, tt, cc = np.meshgrid(*(np.arange(1, 21) / 21.0,) * 3, indexing='ij')
                summary['decoupling_min'] = float(np.min(decoupling_residual(params.k, u, tt, cc)))
                if summary['decoupling_min'] < -self.config.tolerance('scan'):
                    failures.append('decoupling')
            timings['criteria'] = time.time() - start

            summary['failures'] = failures
            self.writer.write_json('convexity_summary.json', summary)
            return ('failed' if failures else 'success'), summary, timings

        return self._execute('convexity-scan', body)

    # 子命令 inequality-fuzz
    def inequality_fuzz(self, trials: Optional[int] = None) -> Dict:
        def body() -> Outcome:
            params = self.params
            trials_count = trials or self.config.trials
            start = time.time()
            ss, _ = self._solve_steady()
            steady_energy = evaluate(ss, params).total
            timings = {'solve': time.time() - start}

            seeds = [self.config.seed + i for i in range(trials_count)]

            def trial(seed: int) -> float:
                rho = random_decreasing(seed, params, self.config.J, grid=self.grid)
                return evaluate(rho, params).total

            start = time.time()
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                energies = np.array(list(tqdm(pool.map(trial, seeds), total=trials_count,
                                              desc="模糊测试", disable=not self.show_progress)))
            timings['fuzz'] = time.time() - start
            gaps = energies - steady_energy
            self.writer.write_csv('fuzz.csv', ['seed', 'energy', 'gap'],
                                  np.column_stack([seeds, energies, gaps]))

            allowed = (self.config.tolerance('fuzz_relative') * abs(steady_energy)
                       + self.config.tolerance('fuzz_absolute'))
            failures = []
            min_gap = float(np.min(gaps))
            if min_gap < -allowed:
                failures.append('minimality')

            start = time.time()
            samples = []
            for seed, energy in zip(seeds[:self.config.pushforward_samples], energies):
                rho = random_decreasing(seed, params, self.config.J, grid=self.grid)
                checks = self._transport_checks(ss, rho, float(energy))
                checks.pop('map')
                checks['seed'] = seed
                samples.append(checks)
                if checks['pushforward_mismatch'] > self.config.tolerance('pushforward'):
                    failures.append(f'pushforward[{seed}]')
                if checks['jensen']['min_gap'] < -self.config.tolerance('jensen'):
                    failures.append(f'jensen[{seed}]')
            timings['pushforward'] = time.time() - start

            results = {
                'trials': trials_count,
                'steady_energy': steady_energy,
                'min_gap': min_gap,
                'allowed': allowed,
                'argmin_seed': int(seeds[int(np.argmin(gaps))]),
                'pushforward_samples': samples,
                'failures': failures,
            }
            self.writer.write_json('fuzz_summary.json', results)
            return ('failed' if failures else 'success'), results, timings

        return self._execute('inequality-fuzz', body)

    # 子命令 simulate
    def simulate(self, init_path: Optional[str] = None, triangular: bool = False) -> Dict:
        def body() -> Outcome:
            params = self.params
            config = self.config
            if triangular and not init_path:
                init = triangular_profile(params, 0.5 * config.r_max, self.grid)
            else:
                init = self._load_density(init_path)

            start = time.time()
            ss, _ = self._solve_steady()
            timings = {'solve': time.time() - start}

            simulator = RadialSimulator(
                params,
                cfl=config.cfl,
                potential_refresh=config.potential_refresh,
                snapshot_every=config.snapshot_every,
                show_progress=self.show_progress,
            )
            start = time.time()
            state = simulator.run(init, config.t_max, config.stall_tol, reference=ss.density)
            timings['simulate'] = time.time() - start

            history = np.array(state.energy_history)
            self.writer.write_csv('energy_history.csv', ['t', 'F'], history)
            self.writer.write_density('final_density.csv', state.density)
            for i, (t, values) in enumerate(simulator.snapshots):
                self.writer.write_density(f'snapshots/snapshot_{i:04d}.csv',
                                          RadialDensity(init.grid, values))

            diagnostics = dict(state.diagnostics)
            failures = []
            if diagnostics['mass_error'] > config.tolerance('mass') * max(1.0, state.time):
                failures.append('mass')
            if diagnostics['max_energy_increase'] > 1e-8 * abs(history[0, 1]):
                failures.append('energy_dissipation')
            if diagnostics.get('l1_to_reference', 0.0) > config.tolerance('evolve_distance'):
                failures.append('distance_to_steady')
            results = {
                'diagnostics': diagnostics,
                'simulator': simulator.get_statistics(),
                'failures': failures,
            }
            self.writer.write_json('simulate_summary.json', results)
            return ('failed' if failures else 'success'), results, timings

        return self._execute('simulate', body)

    def get_status(self) -> Dict:
        """获取运行器状态"""
        return {
            'params': self.params.to_dict(),
            'regime': self.params.regime,
            'output_dir': str(Path(self.config.output_dir)),
            'writer': self.writer.get_statistics(),
        }
