# -*- coding: utf-8 -*-
"""
预条件切比雪夫迭代与基于谱稀疏化的拉普拉斯求解

迭代次数只由 κ 和 ε 决定、与右端项无关，因此 x = Z b 中的 Z 是固定的对称线性算子。
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import factorized

from ..config import settings
from .errors import DisconnectedWithInfeasibleB, NoConvergence, RangeMismatch
from .graph import LaplacianView, laplacian, project_to_range, same_kernel
from .models import WeightedGraph
from .simulator import CliqueNetwork
from .sparsify import SpectralSparsifier, spectral_sparsify

logger = logging.getLogger(__name__)

Operator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ChebyConfig:
    """
    参数:
        kappa: 条件数上界 κ ≥ 1，要求 A ⪯ B ⪯ κA
        epsilon: 误差容限 (0, 1/2]
        c_cheby: 迭代上界常数
    """
    kappa: float
    epsilon: float
    c_cheby: float = 1.0

    def __post_init__(self):
        if self.kappa < 1:
            raise ValueError(f"κ 必须不小于 1: {self.kappa}")
        if not 0 < self.epsilon <= 0.5:
            raise ValueError(f"ε 必须在 (0, 1/2] 内: {self.epsilon}")

    @property
    def max_iters(self) -> int:
        return int(math.ceil(self.c_cheby * math.sqrt(self.kappa) * math.log(2.0 / self.epsilon)))

    @property
    def planned_iterations(self) -> int:
        """使切比雪夫多项式误差 2·q^k ≤ ε 的最小 k，q = (√κ−1)/(√κ+1)"""
        root = math.sqrt(self.kappa)
        if root - 1.0 < 1e-12:
            return 1
        rate = math.log((root + 1.0) / (root - 1.0))
        return max(1, int(math.ceil(math.log(2.0 / self.epsilon) / rate)))


@dataclass
class SolveReport:
    iterations: int = 0
    rounds: int = 0
    residual_estimate: float = 0.0
    max_iters: int = 0
    relative_residual: float = 0.0
    projection_residual: float = 0.0
    alpha: float = 1.0
    kappa: float = 1.0
    sparsifier_rounds: int = 0
    sparsifier_edges: int = 0


def precon_cheby(apply_A: Operator, solve_B: Operator, b: np.ndarray, kappa: float, epsilon: float,
                 network: Optional[CliqueNetwork] = None, phase: str = "solver/matvec",
                 messages_per_multiply: int = 0,
                 config: Optional[Dict[str, Any]] = None) -> Tuple[np.ndarray, SolveReport]:
    """
    预条件切比雪夫迭代

    参数:
        apply_A: x -> A x
        solve_B: r -> B⁺ r
        b: 右端项，需已在 range(A) 内
        kappa: A ⪯ B ⪯ κA 中的 κ
        epsilon: A 范数下的相对误差
        network: 若给出，每次乘 A 计 1 轮

    返回:
        (x, SolveReport)
    """
    cfg = settings.merged(settings.SOLVER_CONFIG, config)
    cheby = ChebyConfig(float(kappa), float(epsilon), float(cfg["c_cheby"]))
    b = np.asarray(b, dtype=np.float64)
    report = SolveReport(max_iters=cheby.max_iters, kappa=cheby.kappa)
    if not np.any(b):
        return np.zeros_like(b), report

    lam_min, lam_max = 1.0 / cheby.kappa, 1.0
    theta = 0.5 * (lam_max + lam_min)
    half_width = 0.5 * (lam_max - lam_min)
    iterations = cheby.planned_iterations

    x = np.zeros_like(b)
    r = b.copy()
    z = solve_B(r)
    b_energy = float(b @ z)
    d = z / theta
    if half_width > 0:
        sigma = theta / half_width
        rho = 1.0 / sigma
    for _ in range(iterations):
        x = x + d
        r = r - apply_A(d)
        if network is not None:
            network.exchange(phase, messages_per_multiply)
        z = solve_B(r)
        if half_width > 0:
            rho_next = 1.0 / (2.0 * sigma - rho)
            d = rho_next * rho * d + (2.0 * rho_next / half_width) * z
            rho = rho_next
        else:
            d = z / theta

    report.iterations = iterations
    report.rounds = iterations
    # B 范数残差：在前提成立时 sqrt(rᵀB⁺r / bᵀB⁺b) ≤ ε·√κ
    r_energy = max(float(r @ z), 0.0)
    report.residual_estimate = math.sqrt(r_energy / b_energy) if b_energy > 0 else 0.0
    report.relative_residual = float(np.linalg.norm(r) / np.linalg.norm(b))
    target = cheby.epsilon * math.sqrt(cheby.kappa)
    if report.iterations > report.max_iters or report.residual_estimate > target * (1.0 + 1e-6) + 1e-14:
        logger.error(f"切比雪夫迭代未收敛: 残差估计 {report.residual_estimate:.3e}，目标 {target:.3e}")
        raise NoConvergence(report.iterations, report.residual_estimate, target)
    logger.debug(f"切比雪夫迭代完成: κ={cheby.kappa:.3g}, 迭代 {iterations} 次")
    return x, report


class LaplacianFactor:
    """
    拉普拉斯矩阵的伪逆求解：每个连通分量固定一个顶点后做稀疏 LU 分解
    """

    def __init__(self, L: LaplacianView):
        self.L = L
        self.blocks = []
        matrix = L.matrix.tocsc()
        for label in range(L.components):
            idx = np.flatnonzero(L.labels == label)
            if len(idx) < 2:
                continue
            keep = idx[:-1]
            sub = matrix[keep][:, keep].tocsc()
            self.blocks.append((idx, keep, factorized(sub)))

    def solve(self, r: np.ndarray) -> np.ndarray:
        x = np.zeros_like(r, dtype=np.float64)
        for idx, keep, solve in self.blocks:
            part = np.zeros(len(idx))
            part[:-1] = solve(r[keep])
            x[idx] = part - part.mean()
        return x


def laplacian_solve(G: WeightedGraph, H: SpectralSparsifier, b: np.ndarray, epsilon: float,
                    network: Optional[CliqueNetwork] = None,
                    config: Optional[Dict[str, Any]] = None) -> Tuple[np.ndarray, SolveReport]:
    """
    以 α·L_H 为预条件求解 L_G y = b

    由 L_G ⪯ αL_H ⪯ α²L_G 取 κ = α²。H 已广播到每个节点，求解 L_H 在节点内部完成，不计轮数。
    """
    LG = laplacian(G)
    LH = laplacian(H.H)
    if not same_kernel(LG.labels, LH.labels):
        raise RangeMismatch("稀疏化图与原图的连通分量不同")
    b_proj, projection = project_to_range(b, LG.labels)
    factor = LaplacianFactor(LH)
    alpha = float(H.alpha)

    def solve_B(r: np.ndarray) -> np.ndarray:
        return factor.solve(r) / alpha

    y, report = precon_cheby(LG.apply, solve_B, b_proj, alpha * alpha, epsilon,
                             network=network, phase="solver/matvec",
                             messages_per_multiply=2 * G.m, config=config)
    report.alpha = alpha
    report.projection_residual = projection
    report.sparsifier_edges = H.H.m
    return y, report


def solve_distributed(G: WeightedGraph, b: np.ndarray, epsilon: float,
                      network: Optional[CliqueNetwork] = None, r: float = 1.0,
                      granularity: Optional[float] = None, strict: bool = True,
                      config: Optional[Dict[str, Any]] = None,
                      sparsify_config: Optional[Dict[str, Any]] = None) -> Tuple[np.ndarray, SolveReport]:
    """
    分布式拉普拉斯求解：权重取整到粒度的整数倍 → 谱稀疏化 → 预条件切比雪夫

    参数:
        G: 正权图
        b: 右端项
        epsilon: L_G 范数下的相对误差
        network: 记账用的网络，缺省新建
        r: 稀疏化的折中参数
        granularity: 权重取整粒度，缺省为 ε
        strict: 为 True 时 b 不在值域内直接报错；否则投影后求解并报告残差

    返回:
        (y, SolveReport)
    """
    cfg = settings.merged(settings.SOLVER_CONFIG, config)
    if network is None:
        network = CliqueNetwork(max(G.n, 1))
    LG = laplacian(G)
    b = np.asarray(b, dtype=np.float64)
    b_proj, projection = project_to_range(b, LG.labels)
    scale = max(float(np.linalg.norm(b)), 1e-300)
    if strict and projection > cfg["projection_tolerance"] * scale:
        logger.error(f"右端项不在值域内: 投影残差 {projection:.3e}")
        raise DisconnectedWithInfeasibleB(projection)

    if G.m == 0 or not np.any(b_proj):
        report = SolveReport(projection_residual=projection)
        return np.zeros(G.n), report

    unit = granularity or cfg["granularity"] or epsilon
    scaled = np.maximum(np.round(G.weights / unit), 1.0)
    ratios = G.weights / (scaled * unit)
    rounding_factor = float(max(ratios.max(), (1.0 / ratios).max()))
    G_int = G.with_weights(scaled, U=float(scaled.max()))

    before = network.ledger.rounds_charged
    sparsifier = spectral_sparsify(G_int, r, network=network, config=sparsify_config)
    sparsifier_rounds = network.ledger.rounds_charged - before
    H = SpectralSparsifier(sparsifier.H.with_weights(sparsifier.H.weights * unit,
                                                     U=float(sparsifier.H.weights.max() * unit)),
                           sparsifier.alpha * rounding_factor, sparsifier.levels, sparsifier.phi)

    y, report = laplacian_solve(G, H, b_proj, epsilon, network=network, config=config)
    report.projection_residual = projection
    report.sparsifier_rounds = sparsifier_rounds
    report.rounds += sparsifier_rounds
    logger.debug(f"分布式求解完成: α={H.alpha:.3g}, 迭代 {report.iterations} 次, 共 {report.rounds} 轮")
    return y, report
