"""
模块入口点

支持 python -m radial_aggdiff 命令
"""

from .cli import run

if __name__ == '__main__':
    run()
