# -*- coding: utf-8 -*-
"""
小规模精确校验器

只在测试和 --verify 中使用，不经过模拟器，也不计轮数。
最大流用最短增广路（Edmonds–Karp），最小费用流用 Bellman–Ford 的逐次最短路。
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..config import settings
from ..core.errors import Infeasible, TooLarge, ValidationError
from ..core.models import DemandVector, FlowInstance

logger = logging.getLogger(__name__)


@dataclass
class _Arc:
    src: int
    dst: int
    cap: int
    cost: int
    edge: int
    flow: int = 0

    @property
    def residual(self) -> int:
        return self.cap - self.flow


class _ResidualGraph:
    """成对存放的残量弧，弧 2k 与 2k+1 互为反向"""

    def __init__(self, n: int):
        self.n = n
        self.arcs: List[_Arc] = []
        self.out: List[List[int]] = [[] for _ in range(n)]

    def add_edge(self, u: int, v: int, cap: int, cost: int = 0, edge: int = -1) -> None:
        self.out[u].append(len(self.arcs))
        self.arcs.append(_Arc(u, v, cap, cost, edge))
        self.out[v].append(len(self.arcs))
        self.arcs.append(_Arc(v, u, 0, -cost, -1))

    def push(self, path: List[int], amount: int) -> None:
        for k in path:
            self.arcs[k].flow += amount
            self.arcs[k ^ 1].flow -= amount

    def bfs_path(self, s: int, t: int) -> Optional[List[int]]:
        parent = [-1] * self.n
        seen = [False] * self.n
        seen[s] = True
        queue = deque([s])
        while queue and not seen[t]:
            u = queue.popleft()
            for k in self.out[u]:
                arc = self.arcs[k]
                if arc.residual > 0 and not seen[arc.dst]:
                    seen[arc.dst] = True
                    parent[arc.dst] = k
                    queue.append(arc.dst)
        return self._trace(parent, s, t) if seen[t] else None

    def cheapest_path(self, s: int, t: int) -> Optional[List[int]]:
        """Bellman–Ford 求残量图上 s 到 t 的最便宜路径"""
        dist = [np.inf] * self.n
        dist[s] = 0
        parent = [-1] * self.n
        for _ in range(self.n - 1):
            changed = False
            for k, arc in enumerate(self.arcs):
                if arc.residual > 0 and dist[arc.src] + arc.cost < dist[arc.dst]:
                    dist[arc.dst] = dist[arc.src] + arc.cost
                    parent[arc.dst] = k
                    changed = True
            if not changed:
                break
        return self._trace(parent, s, t) if dist[t] < np.inf else None

    def _trace(self, parent: List[int], s: int, t: int) -> List[int]:
        path = []
        v = t
        while v != s:
            k = parent[v]
            path.append(k)
            v = self.arcs[k].src
        return path[::-1]

    def edge_flows(self, m: int) -> np.ndarray:
        flows = np.zeros(m, dtype=np.int64)
        for arc in self.arcs:
            if arc.edge >= 0:
                flows[arc.edge] = arc.flow
        return flows


def _check_size(n: int) -> None:
    limit = int(settings.ORACLE_CONFIG["max_nodes"])
    if n > limit:
        raise TooLarge(n, limit)


def _build(instance: FlowInstance, extra: int = 0) -> _ResidualGraph:
    g = instance.graph
    costs = instance.costs if instance.costs is not None else np.zeros(g.m, dtype=np.int64)
    residual = _ResidualGraph(g.n + extra)
    for k in range(g.m):
        residual.add_edge(int(g.tails[k]), int(g.heads[k]), int(instance.capacities[k]), int(costs[k]), k)
    return residual


def oracle_max_flow(instance: FlowInstance) -> int:
    """
    最大 s-t 流值

    参数:
        instance: s-t 形式的实例，n ≤ ORACLE_CONFIG["max_nodes"]

    返回:
        int: 最大流值
    """
    _check_size(instance.n)
    if instance.s is None:
        raise ValidationError("最大流校验器需要源和汇")
    residual = _build(instance)
    value = 0
    while True:
        path = residual.bfs_path(instance.s, instance.t)
        if path is None:
            break
        amount = min(residual.arcs[k].residual for k in path)
        residual.push(path, amount)
        value += amount
    return value


def _successive_shortest_paths(residual: _ResidualGraph, s: int, t: int,
                               limit: Optional[int]) -> Tuple[int, int]:
    """沿最便宜路径增广直到达到 limit 或 s、t 不连通，返回 (流值, 费用)"""
    value = cost = 0
    while limit is None or value < limit:
        path = residual.cheapest_path(s, t)
        if path is None:
            break
        amount = min(residual.arcs[k].residual for k in path)
        if limit is not None:
            amount = min(amount, limit - value)
        residual.push(path, amount)
        value += amount
        cost += amount * sum(residual.arcs[k].cost for k in path)
    return value, cost


def oracle_min_cost_flow(instance: FlowInstance,
                         sigma: Optional[DemandVector] = None) -> Tuple[np.ndarray, int]:
    """
    满足需求 σ 的最小费用流

    参数:
        instance: 带费用的实例
        sigma: 需求向量（流入 − 流出），缺省取实例自带的需求

    返回:
        (每条边的整数流量, 总费用)；需求无法满足时抛出 Infeasible
    """
    _check_size(instance.n)
    if sigma is None:
        if instance.demand is None:
            raise ValidationError("最小费用流校验器需要需求向量")
        sigma = instance.demand
    n, m = instance.n, instance.m
    residual = _build(instance, extra=2)
    source, sink = n, n + 1
    required = 0
    for v, d in enumerate(sigma.values):
        if d < 0:
            residual.add_edge(source, v, int(-d))
            required += int(-d)
        elif d > 0:
            residual.add_edge(v, sink, int(d))
    value, cost = _successive_shortest_paths(residual, source, sink, required)
    if value < required:
        logger.error(f"校验器只能满足 {value}/{required} 单位需求")
        raise Infeasible(f"需求不可行：只能输送 {value}/{required} 单位")
    return residual.edge_flows(m), cost


def oracle_min_cost_max_flow(instance: FlowInstance) -> Tuple[int, int]:
    """最大 s-t 流值及该流值下的最小费用"""
    _check_size(instance.n)
    if instance.s is None:
        raise ValidationError("需要源和汇")
    residual = _build(instance)
    return _successive_shortest_paths(residual, instance.s, instance.t, None)


