"""
报告生成器模块

负责把各子命令的数值结果写成全精度 CSV、JSON 摘要，并为每次运行生成清单文件
（配置回显、版本信息、耗时与生成的文件列表）。
"""

import json
import logging
import platform
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy

from ..density import write_density_csv
from ..models import RadialDensity

CSV_FORMAT = '%.17g'


def _to_jsonable(value):
    """numpy 标量与数组转换为 JSON 原生类型"""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"无法序列化为 JSON: {type(value).__name__}")


class ReportWriter:
    """报告生成器"""

    def __init__(self, output_dir: str):
        """初始化报告生成器

        Args:
            output_dir: 输出目录，不存在时创建
        """
        self.output_dir = Path(output_dir)
        self.logger = logging.getLogger(__name__)
        self._generated_files: List[str] = []
        self._bytes_written = 0

    def _target(self, name: str) -> Path:
        path = self.output_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def _record(self, path: Path):
        self._generated_files.append(str(path))
        self._bytes_written += path.stat().st_size
        self.logger.debug(f"写出 {path}")

    def write_csv(self, name: str, header: Sequence[str], table: np.ndarray) -> str:
        """写出 17 位有效数字的 CSV

        Args:
            name: 文件名（相对输出目录）
            header: 列名
            table: 二维数组，列数与 header 一致

        Returns:
            文件路径
        """
        table = np.atleast_2d(np.asarray(table, dtype=float))
        if table.shape[1] != len(header):
            raise ValueError(f"列数({table.shape[1]})与表头({len(header)})不一致: {name}")
        path = self._target(name)
        np.savetxt(path, table, fmt=CSV_FORMAT, delimiter=',', header=','.join(header), comments='')
        self._record(path)
        return str(path)

    def write_density(self, name: str, rho: RadialDensity) -> str:
        """写出 `r,rho` 密度文件"""
        path = write_density_csv(rho, self._target(name))
        self._record(path)
        return str(path)

    def write_json(self, name: str, data: Dict) -> str:
        path = self._target(name)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(data, f, indent=2, ensure_ascii=False, sort_keys=True, default=_to_jsonable)
            f.write('\n')
        self._record(path)
        return str(path)

    def write_manifest(self, command: str, config: Dict, timings: Dict[str, float],
                       extra: Optional[Dict] = None) -> str:
        """写出 `<command>_manifest.json`

        Args:
            command: 子命令名
            config: 配置回显
            timings: 各阶段耗时（秒）
            extra: 其他需要记录的信息
        """
        from .. import __version__

        manifest = {
            'command': command,
            'created': time.strftime('%Y-%m-%dT%H:%M:%S'),
            'config': config,
            'versions': {
                'radial_aggdiff': __version__,
                'numpy': np.__version__,
                'scipy': scipy.__version__,
                'python': platform.python_version(),
            },
            'timings': {key: round(value, 4) for key, value in timings.items()},
            'files': [Path(p).name for p in self._generated_files],
        }
        if extra:
            manifest.update(extra)
        return self.write_json(f'{command}_manifest.json', manifest)

    def get_generated_files(self) -> List[str]:
        return list(self._generated_files)

    def get_statistics(self) -> Dict[str, int]:
        return {
            'files': len(self._generated_files),
            'bytes_written': self._bytes_written,
        }
