# -*- coding: utf-8 -*-
"""
确定性谱稀疏化

按二进制权重类分别处理：反复做展开分解，把每个展开簇替换为缩放后的乘积需求图的稀疏近似，
跨簇边留到下一层。近似因子 α 逐块测量，取各块最大值。
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg

from ..config import settings
from .errors import CannotCertify, RangeMismatch, ValidationError
from .graph import (EXHAUSTIVE_LIMIT, approximation_factor, components, exhaustive_sparsest_cut,
                    laplacian, relative_spectrum, same_kernel)
from .models import WeightedGraph
from .simulator import CliqueNetwork

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ExpanderDecomposition:
    """
    (ε, φ) 展开分解

    参数:
        partition: 顶点划分，每块为升序顶点数组，按最小顶点排序
        eps_frac: 跨簇边比例上界
        phi: 各簇电导的认证下界
        crossing: 跨簇边数
        certificates: 每个非单点簇的认证值，与 partition 中非单点簇一一对应
    """
    partition: List[np.ndarray]
    eps_frac: float
    phi: float
    crossing: int = 0
    certificates: List[float] = field(default_factory=list)

    def labels(self, n: int) -> np.ndarray:
        result = np.empty(n, dtype=np.int64)
        for k, block in enumerate(self.partition):
            result[block] = k
        return result


@dataclass(frozen=True, eq=False)
class SpectralSparsifier:
    H: WeightedGraph
    alpha: float
    levels: int = 0
    phi: float = 1.0


def _decomposition_charge(n: int, r: float, gamma: float) -> int:
    return int(math.ceil(max(n, 1) ** (gamma / (r * r))))


def _normalized_spectrum(k: int, tails: np.ndarray, heads: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    簇内归一化拉普拉斯的 λ₂、Fiedler 向量与度数
    """
    adj = np.zeros((k, k))
    np.add.at(adj, (tails, heads), 1.0)
    np.add.at(adj, (heads, tails), 1.0)
    degree = adj.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(degree)
    normalized = np.eye(k) - inv_sqrt[:, None] * adj * inv_sqrt[None, :]
    values, vectors = scipy.linalg.eigh(normalized)
    fiedler = vectors[:, 1]
    if fiedler[int(np.argmax(np.abs(fiedler)))] < 0:
        fiedler = -fiedler
    return float(values[1]), fiedler, degree


def _sweep_cut(k: int, tails: np.ndarray, heads: np.ndarray, fiedler: np.ndarray,
               degree: np.ndarray) -> np.ndarray:
    """按 D^{-1/2}·v₂ 排序做前缀扫描，返回电导最小的前缀集合"""
    order = np.argsort(fiedler / np.sqrt(degree), kind="stable")
    pos = np.empty(k, dtype=np.int64)
    pos[order] = np.arange(k)
    lo = np.minimum(pos[tails], pos[heads])
    hi = np.maximum(pos[tails], pos[heads])
    diff = np.zeros(k + 1)
    np.add.at(diff, lo, 1.0)
    np.add.at(diff, hi, -1.0)
    cut = np.cumsum(diff)[: k - 1]
    vol = np.cumsum(degree[order])[: k - 1]
    total = degree.sum()
    phi = cut / np.minimum(vol, total - vol)
    best = int(np.argmin(phi))
    side = np.zeros(k, dtype=bool)
    side[order[: best + 1]] = True
    return side


def _split_components(vertices: np.ndarray, tails: np.ndarray, heads: np.ndarray) -> List[np.ndarray]:
    """按簇内边把局部顶点集合拆成连通分量（局部编号）"""
    local = WeightedGraph(len(vertices), tails, heads, np.ones(len(tails)))
    labels = components(local)
    return [np.flatnonzero(labels == c) for c in range(int(labels.max()) + 1)]


def expander_decompose(g: WeightedGraph, eps_frac: float, phi_target: float,
                       network: Optional[CliqueNetwork] = None, r: float = 1.0,
                       config: Optional[Dict[str, Any]] = None) -> ExpanderDecomposition:
    """
    展开分解（桌面规模的确定性替代实现）

    小簇穷举最稀疏割，大簇用 Cheeger 下界 λ₂/2 认证并按 Fiedler 向量扫描切分；
    认证值达到 φ_target 的簇停止递归。

    参数:
        g: 图，只使用其无权视图
        eps_frac: 允许的跨簇边比例
        phi_target: 目标电导

    返回:
        ExpanderDecomposition: 认证后的分解
    """
    if not 0 < eps_frac < 1:
        raise ValidationError(f"ε_frac 必须在 (0,1) 内: {eps_frac}")
    cfg = settings.merged(settings.SPARSIFY_CONFIG, config)
    exact_limit = min(int(cfg["exact_cut_limit"]), EXHAUSTIVE_LIMIT)
    if network is not None:
        network.charge("sparsify/decomposition(substitute)",
                       _decomposition_charge(g.n, r, float(cfg["decomposition_gamma"])))

    labels = components(g)
    pending = [np.flatnonzero(labels == c) for c in range(int(labels.max()) + 1)] if g.n else []
    final: List[np.ndarray] = []
    certificates: Dict[int, float] = {}
    owner = np.full(g.n, -1, dtype=np.int64)

    while pending:
        cluster = pending.pop(0)
        if len(cluster) == 1:
            final.append(cluster)
            continue
        owner[:] = -1
        owner[cluster] = np.arange(len(cluster))
        inside = (owner[g.tails] >= 0) & (owner[g.heads] >= 0)
        lt, lh = owner[g.tails[inside]], owner[g.heads[inside]]
        k = len(cluster)
        if k <= exact_limit:
            cert, side = exhaustive_sparsest_cut(k, lt, lh)
        else:
            lambda2, fiedler, degree = _normalized_spectrum(k, lt, lh)
            cert = 0.5 * lambda2
            side = None
        if cert >= phi_target:
            certificates[int(cluster.min())] = float(cert)
            final.append(cluster)
            continue
        if side is None:
            side = _sweep_cut(k, lt, lh, fiedler, degree)
        for part in (np.flatnonzero(side), np.flatnonzero(~side)):
            keep = side[lt] == side[lh]
            keep &= np.isin(lt, part)
            relabel = np.full(k, -1, dtype=np.int64)
            relabel[part] = np.arange(len(part))
            for piece in _split_components(part, relabel[lt[keep]], relabel[lh[keep]]):
                pending.append(cluster[part[piece]])

    final.sort(key=lambda block: int(block.min()))
    partition = [np.sort(block) for block in final]
    cluster_of = np.empty(g.n, dtype=np.int64)
    for idx, block in enumerate(partition):
        cluster_of[block] = idx
    crossing = int(np.count_nonzero(cluster_of[g.tails] != cluster_of[g.heads])) if g.m else 0
    allowed = eps_frac * g.m
    if crossing > allowed:
        logger.debug(f"φ={phi_target:.4g} 下跨簇边 {crossing} 超过 {allowed:.1f}")
        raise CannotCertify(phi_target, crossing, allowed)
    certs = [certificates[int(block.min())] for block in partition if int(block.min()) in certificates]
    phi = min(certs) if certs else 1.0
    return ExpanderDecomposition(partition, eps_frac, phi, crossing, certs)


def product_demand_graph(degrees: np.ndarray) -> WeightedGraph:
    """
    乘积需求图：完全图，w(u,v) = deg(u)·deg(v)

    参数:
        degrees: 每个顶点的正整数度数
    """
    degrees = np.asarray(degrees, dtype=np.float64)
    k = len(degrees)
    if k < 2 or np.any(degrees <= 0):
        raise ValidationError("乘积需求图至少需要两个正度数顶点")
    iu, ju = np.triu_indices(k, 1)
    return WeightedGraph(k, iu, ju, degrees[iu] * degrees[ju])


def _recover_degrees(d: WeightedGraph) -> np.ndarray:
    """由乘积需求图的边权恢复度数"""
    k = d.n
    weight = np.zeros((k, k))
    weight[d.tails, d.heads] = d.weights
    weight[d.heads, d.tails] = d.weights
    first = math.sqrt(weight[0, 1] * weight[0, 2] / weight[1, 2])
    result = weight[0] / first
    result[0] = first
    return result


def sparsify_product_demand(d: WeightedGraph, config: Optional[Dict[str, Any]] = None) -> WeightedGraph:
    """
    乘积需求图的确定性稀疏近似

    每个顶点保留到度数最高的 c_pd 个其他顶点的边（同度按编号），再做对称缩放使每个顶点的
    加权度数与原图一致。测得的近似因子超过 2 且 n ≤ 4·c_pd 时退回原图。
    """
    cfg = settings.merged(settings.SPARSIFY_CONFIG, config)
    c_pd = int(cfg["c_pd"])
    k = d.n
    if k <= max(c_pd, 2):
        return d
    degrees = _recover_degrees(d)
    ranking = sorted(range(k), key=lambda v: (-degrees[v], v))[: c_pd + 1]
    pairs = set()
    for v in range(k):
        chosen = [u for u in ranking if u != v][:c_pd]
        for u in chosen:
            pairs.add((min(u, v), max(u, v)))
    pairs = sorted(pairs)
    tails = np.array([p[0] for p in pairs], dtype=np.int64)
    heads = np.array([p[1] for p in pairs], dtype=np.int64)
    base = degrees[tails] * degrees[heads]
    target = d.weighted_degrees()

    scale = np.ones(k)
    for _ in range(int(cfg["degree_scaling_sweeps"])):
        weights = base * scale[tails] * scale[heads]
        current = (np.bincount(tails, weights=weights, minlength=k)
                   + np.bincount(heads, weights=weights, minlength=k))
        scale = scale * np.sqrt(target / current)
    sparse = WeightedGraph(k, tails, heads, base * scale[tails] * scale[heads])

    factor = approximation_factor(laplacian(sparse), laplacian(d))
    if factor > 2.0 and k <= 4 * c_pd:
        return d
    return sparse


def check_sparsifier(g: WeightedGraph, h: WeightedGraph, alpha: float) -> bool:
    """
    稠密检查 (1/α)·L_H ⪯ L_G ⪯ α·L_H

    参数:
        g, h: 同一顶点集上的图，n ≤ 400
        alpha: 近似因子

    返回:
        bool: 所有广义特征值是否落在 [1/α, α] 内
    """
    if g.n != h.n:
        raise ValidationError("两个图的顶点数不同")
    LG, LH = laplacian(g), laplacian(h)
    if not same_kernel(LG.labels, LH.labels):
        raise RangeMismatch()
    lo, hi = relative_spectrum(LG, LH)
    tol = 1e-9
    return bool(lo >= 1.0 / alpha - tol and hi <= alpha + tol)


def _phi_schedule_start(m: int) -> float:
    log_m = max(math.log2(max(m, 2)), 1.0)
    return min(1.0, 1.0 / (log_m * log_m))


def _sparsify_piece(piece: WeightedGraph, config: Dict[str, Any]) -> Tuple[WeightedGraph, float]:
    """把一个展开簇替换为缩放后的乘积需求图稀疏近似；不能变小时保留原边"""
    degree = piece.degrees()
    demand = product_demand_graph(degree)
    base = float(piece.weights.mean())
    scaled = demand.with_weights(demand.weights * base * 2.0 / piece.m)
    candidate = sparsify_product_demand(scaled, config)
    if candidate.m >= piece.m:
        return piece, 1.0
    factor = approximation_factor(laplacian(piece), laplacian(candidate))
    return candidate, factor


def spectral_sparsify(g: WeightedGraph, r: float = 1.0, network: Optional[CliqueNetwork] = None,
                      config: Optional[Dict[str, Any]] = None) -> SpectralSparsifier:
    """
    构造谱稀疏化图 H 并认证近似因子 α

    参数:
        g: 正权图
        r: 折中参数，1 ≤ r ≤ √(log n / log log n)
        network: 记账用的网络

    返回:
        SpectralSparsifier: H 与认证的 α
    """
    cfg = settings.merged(settings.SPARSIFY_CONFIG, config)
    if r < 1:
        raise ValidationError(f"r 必须不小于 1: {r}")
    if g.n >= 16:
        bound = math.sqrt(math.log2(g.n) / math.log2(math.log2(g.n)))
        if r > bound:
            logger.warning(f"r={r} 超过 √(log n / log log n)={bound:.3f}，按上界处理")
            r = bound
    else:
        r = 1.0
    if g.m == 0:
        return SpectralSparsifier(g, 1.0, 0, 1.0)

    eps_frac = float(cfg["eps_frac"])
    weight_class = np.floor(np.log2(g.weights)).astype(np.int64)
    tails: List[np.ndarray] = []
    heads: List[np.ndarray] = []
    weights: List[np.ndarray] = []
    alpha = 1.0
    max_levels = 0
    min_phi = 1.0

    for cls in np.unique(weight_class):
        idx = np.flatnonzero(weight_class == cls)
        level = 0
        while len(idx):
            sub = WeightedGraph(g.n, g.tails[idx], g.heads[idx], g.weights[idx])
            phi = _phi_schedule_start(len(idx))
            floor = 1.0 / len(idx)
            while True:
                try:
                    dec = expander_decompose(sub, eps_frac, phi, network=network, r=r, config=cfg)
                    break
                except CannotCertify:
                    if phi / 2.0 < floor:
                        logger.error(f"权重类 {cls} 第 {level} 层在 φ 下限 {floor:.3g} 仍无法认证")
                        raise
                    phi /= 2.0
            min_phi = min(min_phi, dec.phi)
            if network is not None:
                network.exchange("sparsify/product-demand", 0)
            cluster_of = dec.labels(g.n)
            internal = cluster_of[sub.tails] == cluster_of[sub.heads]
            for block in dec.partition:
                if len(block) < 2:
                    continue
                local = np.full(g.n, -1, dtype=np.int64)
                local[block] = np.arange(len(block))
                mask = internal & (local[sub.tails] >= 0)
                if not np.any(mask):
                    continue
                piece = WeightedGraph(len(block), local[sub.tails[mask]], local[sub.heads[mask]],
                                      sub.weights[mask])
                replacement, factor = _sparsify_piece(piece, cfg)
                alpha = max(alpha, factor)
                tails.append(block[replacement.tails])
                heads.append(block[replacement.heads])
                weights.append(replacement.weights)
            idx = idx[~internal]
            level += 1
        max_levels = max(max_levels, level)

    H = WeightedGraph(g.n, np.concatenate(tails), np.concatenate(heads), np.concatenate(weights))
    alpha *= 1.0 + float(cfg["certify_slack"])
    if network is not None:
        batches = int(math.ceil(H.m / max(network.n, 1)))
        for _ in range(batches):
            network.charge("sparsify/broadcast", network.route_rounds)
    logger.info(f"谱稀疏化完成: |E(G)|={g.m}, |E(H)|={H.m}, α={alpha:.4g}, 层数 {max_levels}")
    return SpectralSparsifier(H, alpha, max_levels, min_phi)
