# -*- coding: utf-8 -*-
"""
带种子的随机实例生成

仓库中唯一使用随机数的地方，算法本身都是确定性的。
"""

import logging
from typing import Optional

import networkx as nx
import numpy as np

from ..core.models import DemandVector, FlowInstance, WeightedGraph

logger = logging.getLogger(__name__)


def random_connected_graph(n: int, seed: int, max_weight: int = 100,
                           extra_edges: Optional[int] = None) -> WeightedGraph:
    """
    随机连通带权图：随机生成树加上 G(n, m) 的额外边，权重为 1..max_weight 的整数

    参数:
        n: 顶点数
        seed: 随机种子
        max_weight: 最大权重 U
        extra_edges: 额外边数，缺省为 n
    """
    rng = np.random.default_rng(seed)
    parents = np.array([rng.integers(0, v) for v in range(1, n)], dtype=np.int64)
    tails = list(parents)
    heads = list(range(1, n))
    extra = nx.gnm_random_graph(n, n if extra_edges is None else extra_edges, seed=seed)
    for u, v in extra.edges():
        tails.append(u)
        heads.append(v)
    weights = rng.integers(1, max_weight + 1, size=len(tails)).astype(np.float64)
    return WeightedGraph(n, np.array(tails, dtype=np.int64), np.array(heads, dtype=np.int64), weights,
                         U=float(max_weight))


def random_eulerian_multigraph(n: int, seed: int, cycles: Optional[int] = None,
                               max_length: int = 8) -> WeightedGraph:
    """
    若干随机闭合回路的并，允许重边，每个顶点度数为偶数

    参数:
        n: 顶点数（至少 2）
        seed: 随机种子
        cycles: 回路条数，缺省为 n
        max_length: 单条回路的最大长度
    """
    rng = np.random.default_rng(seed)
    tails, heads = [], []
    for _ in range(n if cycles is None else cycles):
        length = int(rng.integers(2, max_length + 1))
        walk = [int(rng.integers(0, n))]
        while len(walk) < length:
            step = int(rng.integers(0, n - 1))
            walk.append(step if step < walk[-1] else step + 1)
        if walk[-1] == walk[0]:
            walk.pop()
        if len(walk) < 2:
            continue
        for u, v in zip(walk, walk[1:] + walk[:1]):
            tails.append(u)
            heads.append(v)
    return WeightedGraph(n, np.array(tails, dtype=np.int64), np.array(heads, dtype=np.int64),
                         np.ones(len(tails)))


def _random_arcs(n: int, m: int, rng: np.random.Generator):
    tails = rng.integers(0, n, size=m)
    shift = rng.integers(1, n, size=m)
    heads = (tails + shift) % n
    return tails.astype(np.int64), heads.astype(np.int64)


def random_capacitated_instance(n: int, m: int, U: int, seed: int) -> FlowInstance:
    """随机有向容量实例，s = 0，t = n − 1，容量为 1..U 的整数"""
    rng = np.random.default_rng(seed)
    tails, heads = _random_arcs(n, m, rng)
    caps = rng.integers(1, U + 1, size=m)
    graph = WeightedGraph(n, tails, heads, np.ones(m), directed=True)
    return FlowInstance(graph, caps, s=0, t=n - 1, kind="max")


def random_unit_cost_instance(n: int, m: int, W: int, seed: int) -> FlowInstance:
    """
    随机单位容量费用实例，费用为 1..W 的整数

    需求取自一个随机的 0/1 流的净流入，因此总是可行的。
    """
    rng = np.random.default_rng(seed)
    tails, heads = _random_arcs(n, m, rng)
    costs = rng.integers(1, W + 1, size=m)
    used = rng.integers(0, 2, size=m)
    demand = (np.bincount(heads, weights=used, minlength=n)
              - np.bincount(tails, weights=used, minlength=n)).astype(np.int64)
    graph = WeightedGraph(n, tails, heads, np.ones(m), directed=True)
    return FlowInstance(graph, np.ones(m), costs, demand=DemandVector(demand), kind="min")


def random_unit_cost_st_instance(n: int, m: int, W: int, seed: int) -> FlowInstance:
    """随机单位容量费用实例，s = 0，t = n − 1"""
    rng = np.random.default_rng(seed)
    tails, heads = _random_arcs(n, m, rng)
    costs = rng.integers(1, W + 1, size=m)
    graph = WeightedGraph(n, tails, heads, np.ones(m), directed=True)
    return FlowInstance(graph, np.ones(m), costs, s=0, t=n - 1, kind="min")


def _random_integral_flow(instance: FlowInstance, rng: np.random.Generator, pushes: int) -> np.ndarray:
    """在剩余容量上反复沿随机顺序的 BFS 路径推送随机流量，得到整数 s-t 流"""
    g = instance.graph
    caps = instance.capacities.astype(np.int64)
    flow = np.zeros(g.m, dtype=np.int64)
    for _ in range(pushes):
        order = rng.permutation(g.m)
        parent = np.full(g.n, -1, dtype=np.int64)
        seen = np.zeros(g.n, dtype=bool)
        seen[instance.s] = True
        frontier = [instance.s]
        while frontier and not seen[instance.t]:
            nxt = []
            for k in order:
                u, v = g.tails[k], g.heads[k]
                if u in frontier and not seen[v] and flow[k] < caps[k]:
                    seen[v] = True
                    parent[v] = k
                    nxt.append(v)
            frontier = nxt
        if not seen[instance.t]:
            break
        path = []
        v = instance.t
        while v != instance.s:
            path.append(parent[v])
            v = g.tails[parent[v]]
        bottleneck = int((caps[path] - flow[path]).min())
        flow[path] += int(rng.integers(1, bottleneck + 1))
    return flow


def random_fractional_flow(instance: FlowInstance, delta: float, seed: int, mixes: int = 3,
                           pushes: int = 4) -> np.ndarray:
    """
    若干随机整数 s-t 流的凸组合，组合系数是 Δ 的整数倍，因此每条边的流量都是 Δ 的整数倍

    参数:
        instance: s-t 形式的容量实例
        delta: Δ，1/Δ 为 2 的幂
        seed: 随机种子
        mixes: 参与组合的整数流个数
        pushes: 每个整数流的推送次数
    """
    rng = np.random.default_rng(seed)
    scale = int(round(1.0 / delta))
    cuts = np.sort(rng.integers(0, scale + 1, size=mixes - 1))
    shares = np.diff(np.concatenate([[0], cuts, [scale]]))
    total = np.zeros(instance.m, dtype=np.int64)
    for share in shares:
        total += share * _random_integral_flow(instance, rng, pushes)
    logger.debug(f"生成分数流: Δ=1/{scale}, 组合系数 {shares.tolist()}")
    return total / scale
