# -*- coding: utf-8 -*-
"""
拥塞团（congested clique）模拟器与求解器的配置文件

此文件集中存放模拟器、拉普拉斯求解器、谱稀疏化、欧拉定向以及两个内点法的全部可调参数。
各算法入口都接受 config 参数覆盖这里的默认值。
"""

import math
from pathlib import Path
from typing import Any, Dict, Optional

# 基础路径
BASE_DIR = Path(__file__).resolve().parent.parent
DATA_DIR = BASE_DIR / "data"
DEFAULT_LEDGER_PATH = DATA_DIR / "ledger.tsv"

# 模拟器配置
SIMULATOR_CONFIG = {
    "words_per_message": 4,  # 每条消息最多携带的机器字数 B
    "route_rounds": 16,  # 一次 Lenzen 路由按常数轮数计费 R_route
}

# 拉普拉斯求解器配置
SOLVER_CONFIG = {
    "c_cheby": 1.0,  # 迭代次数上界常数：ceil(c_cheby·√κ·ln(2/ε))
    "projection_tolerance": 1e-8,  # 右端项投影残差超过此相对值时视为不在值域内
    "granularity": None,  # 权重取整粒度，None 表示与 ε 相同
}

# 谱稀疏化配置
SPARSIFY_CONFIG = {
    "c_pd": 8,  # 乘积需求图稀疏化时每个顶点保留的高阶邻居数
    "c_size": 32,  # |E(H)| ≤ c_size·n·log n·log U 中的常数
    "eps_frac": 0.5,  # 每层展开分解允许的跨簇边比例
    "exact_cut_limit": 16,  # 簇规模不超过此值时穷举最稀疏割（上限 24）
    "decomposition_gamma": 1.0,  # 展开分解的符号化轮数 n^(γ/r²)
    "degree_scaling_sweeps": 60,  # 保持加权度数的对称缩放迭代次数
    "certify_slack": 1e-9,  # 测得的 α 乘以 (1 + slack) 以吸收浮点误差
}

# 欧拉定向配置
EULER_CONFIG = {
    "max_splice_hops": 4,  # 未标记令牌被剪除时转发的最大跳数
}

# 最大流内点法配置
MAXFLOW_CONFIG = {
    "alpha_step": 0.5,  # δ 公式中的 α
    "eta_const": 1.0,  # η 中 log_m log(mU) 项的常数
    "eta_floor": 1.0 / 28.0,  # η 的下界，保证 m^{4η} ≥ 1
    "loop_const": 100.0,  # 主循环上界 loop_const·(1/δ̂)·log U
    "interior_floor": 1e-9,  # 剩余容量下限（乘以 U）
    "solver_epsilon": 1e-8,  # 内部拉普拉斯求解精度
    "granularity_ratio": 1e-3,  # 权重取整粒度相对最小权重的比例
    "fixing_damping_tries": 20,  # 修正步越界时的折半次数
    "boost_gap_tolerance": 1e-12,  # 对偶间隙过小时跳过该边的提升
    "max_boost_length": 64,  # 提升路径的最大边数，超过时跳过该边并标记
}

# 最小费用流内点法配置
MCF_CONFIG = {
    "c_rho_coeff": 400.0 * math.sqrt(3.0),  # c_ρ = c_rho_coeff·log^{1/3} W
    "c_t_coeff": 3.0,  # c_T = c_t_coeff·c_ρ·log W
    "eta": 1.0 / 14.0,  # η
    "mu_stop": 0.125,  # μ̂ ≤ mu_stop / m 时提前结束内点迭代
    "max_perturbations": 32,  # 单次 while 扰动的次数上限
    "c_repair": 4.0,  # 修复阶段迭代上界 c_repair·m^{3/7}·log² m（只做断言）
    "c_trigger": 4.0,  # 扰动触发次数上界 c_trigger·m^{3/7}·log³ W（只做标记）
    "solver_epsilon": 1e-8,  # 内部拉普拉斯求解精度
    "granularity_ratio": 1e-3,  # 权重取整粒度相对最小权重的比例
    "step_halving_tries": 30,  # 进步步越界时 δ 折半次数
    "max_progress_steps": 2000,  # 进步步总数的安全上限，达到后直接进入修复阶段
    "perturbation_post_doubling": False,  # True 时 ν_ē 使用加倍后的 ν_e
}

# 校验器配置
ORACLE_CONFIG = {
    "max_nodes": 40,  # 暴力校验器允许的最大顶点数
    "dense_max_nodes": 400,  # 稠密特征分解校验允许的最大顶点数
}

# 日志配置
LOG_CONFIG = {
    "level": "INFO",  # 默认日志级别
    "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",  # 日志格式
}


def merged(defaults: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    合并默认配置与调用方传入的覆盖项

    参数:
        defaults: 模块的默认配置字典
        overrides: 调用方的覆盖项，可为 None

    返回:
        Dict[str, Any]: 新的配置字典，默认值不会被修改
    """
    result = dict(defaults)
    if overrides:
        result.update(overrides)
    return result
