# -*- coding: utf-8 -*-
"""
radial-aggdiff 测试包

各测试文件自行把 src 目录加入 sys.path。
"""
