# -*- coding: utf-8 -*-
"""
拥塞团模型下的拉普拉斯求解、欧拉定向与流算法模拟器
"""

__version__ = "0.1.0"
