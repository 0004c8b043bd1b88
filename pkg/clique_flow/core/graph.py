# -*- coding: utf-8 -*-
"""
图与拉普拉斯矩阵的基础运算，以及只在测试和校验中使用的小规模精确算子
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import DimensionMismatch, EmptyGraph, RangeMismatch, TooLarge
from .models import DemandVector, FlowAssignment, WeightedGraph

logger = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 24
_CHUNK = 1 << 15


@dataclass(frozen=True, eq=False)
class LaplacianView:
    """
    L = D − A 的稀疏表示

    参数:
        matrix: CSR 格式的 n×n 拉普拉斯矩阵，平行边权重相加
        labels: 连通分量标号（按顶点 0 起的发现顺序编号）
    """
    matrix: sp.csr_matrix
    labels: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def components(self) -> int:
        return int(self.labels.max()) + 1 if self.n else 0

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x


def components(g: WeightedGraph) -> np.ndarray:
    """无向意义下的连通分量标号"""
    if g.n == 0:
        return np.zeros(0, dtype=np.int64)
    adj = sp.coo_matrix((np.ones(g.m), (g.tails, g.heads)), shape=(g.n, g.n))
    _, labels = connected_components(adj, directed=False)
    return labels.astype(np.int64)


def laplacian(g: WeightedGraph) -> LaplacianView:
    """
    构造拉普拉斯矩阵

    参数:
        g: 带权图，有向图按无向处理

    返回:
        LaplacianView: L[u][u] 为加权度数，L[u][v] 为 −w(u,v)
    """
    t, h, w = g.tails, g.heads, g.weights
    rows = np.concatenate([t, h, t, h])
    cols = np.concatenate([h, t, t, h])
    data = np.concatenate([-w, -w, w, w])
    matrix = sp.coo_matrix((data, (rows, cols)), shape=(g.n, g.n)).tocsr()
    matrix.sum_duplicates()
    return LaplacianView(matrix, components(g))


def project_to_range(b: np.ndarray, labels: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    减去每个连通分量上的均值，把 b 投影到 range(L)

    返回:
        (投影后的向量, 被去掉部分的二范数)
    """
    b = np.asarray(b, dtype=np.float64)
    if len(b) == 0:
        return b.copy(), 0.0
    sizes = np.bincount(labels)
    means = np.bincount(labels, weights=b) / sizes
    removed = means[labels]
    return b - removed, float(np.linalg.norm(removed))


def pseudo_solve_oracle(L: LaplacianView, b: np.ndarray,
                        return_residual: bool = False) -> Union[np.ndarray, Tuple[np.ndarray, float]]:
    """
    用稠密特征分解计算 L†b，只作为测试校验器

    参数:
        L: 拉普拉斯矩阵
        b: 右端项，先投影到值域
        return_residual: 是否同时返回投影残差

    返回:
        np.ndarray 或 (np.ndarray, float)
    """
    b = np.asarray(b, dtype=np.float64)
    if len(b) != L.n:
        raise DimensionMismatch(L.n, len(b))
    b_proj, residual = project_to_range(b, L.labels)
    if L.n == 0:
        return (b_proj, residual) if return_residual else b_proj
    values, vectors = scipy.linalg.eigh(L.dense())
    kernel = L.components
    # 前 kernel 个特征值对应各分量上的常向量
    inv = np.zeros_like(values)
    inv[kernel:] = 1.0 / values[kernel:]
    x = vectors @ (inv * (vectors.T @ b_proj))
    x, _ = project_to_range(x, L.labels)
    return (x, residual) if return_residual else x


def exhaustive_sparsest_cut(n: int, tails: np.ndarray, heads: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    穷举所有非平凡割，返回最小电导及对应的顶点集合（布尔掩码）

    体积按无权度数计算；顶点 n−1 固定在补集一侧，枚举顺序确定。
    """
    degree = (np.bincount(tails, minlength=n) + np.bincount(heads, minlength=n)).astype(np.float64)
    total = degree.sum()
    best_phi = np.inf
    best_mask = 0
    shifts = np.arange(n - 1, dtype=np.int64)
    for start in range(1, 1 << (n - 1), _CHUNK):
        masks = np.arange(start, min(start + _CHUNK, 1 << (n - 1)), dtype=np.int64)
        bits = np.zeros((len(masks), n), dtype=bool)
        bits[:, : n - 1] = ((masks[:, None] >> shifts) & 1).astype(bool)
        cut = (bits[:, tails] != bits[:, heads]).sum(axis=1)
        vol = bits @ degree
        denom = np.minimum(vol, total - vol)
        with np.errstate(divide="ignore", invalid="ignore"):
            phi = np.where(denom > 0, cut / np.where(denom > 0, denom, 1.0), np.inf)
        k = int(np.argmin(phi))
        if phi[k] < best_phi:
            best_phi = float(phi[k])
            best_mask = int(masks[k])
    side = np.zeros(n, dtype=bool)
    side[: n - 1] = ((best_mask >> shifts) & 1).astype(bool)
    return best_phi, side


def conductance_oracle(g: WeightedGraph) -> float:
    """
    穷举计算电导 min_S |e(S, S̄)| / min(Vol(S), Vol(S̄))

    参数:
        g: 连通图，n ≤ 24

    返回:
        float: 电导
    """
    if g.n > EXHAUSTIVE_LIMIT:
        raise TooLarge(g.n, EXHAUSTIVE_LIMIT)
    if g.m == 0 or g.n < 2:
        raise EmptyGraph()
    phi, _ = exhaustive_sparsest_cut(g.n, g.tails, g.heads)
    return phi


def residue(g: WeightedGraph, f: Union[FlowAssignment, np.ndarray],
            sigma: Optional[Union[DemandVector, np.ndarray]] = None) -> np.ndarray:
    """
    每个顶点的不平衡量：(流入 − 流出) − σ(v)
    """
    values = f.values if isinstance(f, FlowAssignment) else np.asarray(f, dtype=np.float64)
    if len(values) != g.m:
        raise DimensionMismatch(g.m, len(values))
    result = (np.bincount(g.heads, weights=values, minlength=g.n)
              - np.bincount(g.tails, weights=values, minlength=g.n))
    if sigma is not None:
        demand = sigma.values if isinstance(sigma, DemandVector) else np.asarray(sigma)
        if len(demand) != g.n:
            raise DimensionMismatch(g.n, len(demand))
        result = result - demand
    return result


def same_kernel(labels_a: np.ndarray, labels_b: np.ndarray) -> bool:
    """两组连通分量标号是否描述同一个划分"""
    if len(labels_a) != len(labels_b):
        return False
    pairs = np.unique(np.stack([labels_a, labels_b], axis=1), axis=0)
    return len(pairs) == len(np.unique(labels_a)) == len(np.unique(labels_b))


def relative_spectrum(LA: LaplacianView, LB: LaplacianView) -> Tuple[float, float]:
    """
    (L_A, L_B) 在公共值域上的广义特征值的最小值与最大值

    两者的核必须相同；没有非平凡分量时返回 (1, 1)。
    """
    if not same_kernel(LA.labels, LB.labels):
        raise RangeMismatch()
    A = LA.dense()
    B = LB.dense()
    lo, hi = np.inf, -np.inf
    for label in range(LA.components):
        idx = np.flatnonzero(LA.labels == label)
        if len(idx) < 2:
            continue
        basis = scipy.linalg.null_space(np.ones((1, len(idx))))
        sub_a = basis.T @ A[np.ix_(idx, idx)] @ basis
        sub_b = basis.T @ B[np.ix_(idx, idx)] @ basis
        values = scipy.linalg.eigh(sub_a, sub_b, eigvals_only=True)
        lo = min(lo, float(values[0]))
        hi = max(hi, float(values[-1]))
    if lo == np.inf:
        return 1.0, 1.0
    return lo, hi


def approximation_factor(LA: LaplacianView, LB: LaplacianView) -> float:
    """最小的 α 使 (1/α)L_B ⪯ L_A ⪯ αL_B"""
    lo, hi = relative_spectrum(LA, LB)
    return max(hi, 1.0 / lo, 1.0)


def energy_norm(L: LaplacianView, x: np.ndarray) -> float:
    """‖x‖_L = sqrt(xᵀ L x)"""
    return float(np.sqrt(max(float(x @ (L.matrix @ x)), 0.0)))
