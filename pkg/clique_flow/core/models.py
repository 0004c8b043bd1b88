# -*- coding: utf-8 -*-
"""
数据模型

图、需求向量、流实例与运行报告。所有模型构造后不再修改，numpy 数组被设为只读。
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ValidationError


def _frozen(array: Any, dtype) -> np.ndarray:
    """复制为只读数组"""
    result = np.array(array, dtype=dtype, copy=True).reshape(-1)
    result.setflags(write=False)
    return result


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """
    带权图（默认无向），允许平行边，不允许自环

    参数:
        n: 顶点数，顶点编号为 0..n-1
        tails / heads: 每条边的两个端点（有向图中为起点/终点）
        weights: 正权重
        directed: 是否为有向图
        U: 权重上界，缺省为最大权重
    """
    n: int
    tails: np.ndarray
    heads: np.ndarray
    weights: np.ndarray
    directed: bool = False
    U: Optional[float] = None

    def __post_init__(self):
        tails = _frozen(self.tails, np.int64)
        heads = _frozen(self.heads, np.int64)
        weights = _frozen(self.weights, np.float64)
        object.__setattr__(self, "tails", tails)
        object.__setattr__(self, "heads", heads)
        object.__setattr__(self, "weights", weights)
        if self.n < 0:
            raise ValidationError(f"顶点数必须非负: {self.n}")
        if not (len(tails) == len(heads) == len(weights)):
            raise ValidationError("边数组长度不一致")
        if len(tails):
            if tails.min() < 0 or heads.min() < 0 or max(tails.max(), heads.max()) >= self.n:
                raise ValidationError("边端点超出顶点范围")
            if np.any(tails == heads):
                bad = int(np.flatnonzero(tails == heads)[0])
                raise ValidationError(f"第 {bad} 条边是自环")
            if np.any(~(weights > 0)):
                raise ValidationError("边权必须为正")
        bound = float(weights.max()) if len(weights) else 1.0
        if self.U is None:
            object.__setattr__(self, "U", bound)
        elif len(weights) and bound > self.U * (1 + 1e-12):
            raise ValidationError(f"边权 {bound} 超过上界 U={self.U}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[float]], directed: bool = False,
                   U: Optional[float] = None) -> "WeightedGraph":
        """由 (u, v[, w]) 序列构造，缺省权重为 1"""
        rows = [tuple(e) for e in edges]
        tails = [int(r[0]) for r in rows]
        heads = [int(r[1]) for r in rows]
        weights = [float(r[2]) if len(r) > 2 else 1.0 for r in rows]
        return cls(n, np.array(tails, dtype=np.int64), np.array(heads, dtype=np.int64),
                   np.array(weights, dtype=np.float64), directed, U)

    @property
    def m(self) -> int:
        return len(self.tails)

    @property
    def edges(self) -> List[Tuple[int, int, float]]:
        return [(int(u), int(v), float(w)) for u, v, w in zip(self.tails, self.heads, self.weights)]

    def degrees(self) -> np.ndarray:
        """无权度数（平行边分别计数）"""
        return (np.bincount(self.tails, minlength=self.n)
                + np.bincount(self.heads, minlength=self.n)).astype(np.int64)

    def weighted_degrees(self) -> np.ndarray:
        return (np.bincount(self.tails, weights=self.weights, minlength=self.n)
                + np.bincount(self.heads, weights=self.weights, minlength=self.n))

    def with_weights(self, weights: np.ndarray, U: Optional[float] = None) -> "WeightedGraph":
        return WeightedGraph(self.n, self.tails, self.heads, weights, self.directed, U)

    def select(self, mask: np.ndarray) -> "WeightedGraph":
        """保留 mask 为真的边"""
        mask = np.asarray(mask)
        return WeightedGraph(self.n, self.tails[mask], self.heads[mask], self.weights[mask],
                             self.directed, self.U)

    def undirected(self) -> "WeightedGraph":
        return WeightedGraph(self.n, self.tails, self.heads, self.weights, False, self.U)


@dataclass(frozen=True, eq=False)
class DemandVector:
    """需求向量 σ，约定 σ(v) = 流入 − 流出，总和为零"""
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values, np.int64)
        object.__setattr__(self, "values", values)
        if int(values.sum()) != 0:
            raise ValidationError(f"需求之和必须为零，当前为 {int(values.sum())}")

    @classmethod
    def from_mapping(cls, n: int, mapping: Dict[int, int]) -> "DemandVector":
        values = np.zeros(n, dtype=np.int64)
        for v, d in mapping.items():
            values[int(v)] += int(d)
        return cls(values)

    @classmethod
    def st(cls, n: int, s: int, t: int, value: int) -> "DemandVector":
        """从 s 向 t 输送 value 单位流量对应的需求"""
        values = np.zeros(n, dtype=np.int64)
        values[s] -= value
        values[t] += value
        return cls(values)

    @property
    def n(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class FlowInstance:
    """
    流问题实例

    参数:
        graph: 有向图，权重字段不参与流计算
        capacities: 整数容量
        costs: 可选的整数费用
        s, t: 源汇（与 demand 二选一）
        demand: 需求向量（与 s, t 二选一）
        kind: 实例类型标签，如 max / min
    """
    graph: WeightedGraph
    capacities: np.ndarray
    costs: Optional[np.ndarray] = None
    s: Optional[int] = None
    t: Optional[int] = None
    demand: Optional[DemandVector] = None
    kind: str = "max"

    def __post_init__(self):
        capacities = np.asarray(self.capacities, dtype=np.float64)
        if len(capacities) != self.graph.m:
            raise ValidationError("容量数量与边数不一致")
        if np.any(capacities != np.round(capacities)) or np.any(capacities < 0):
            raise ValidationError("容量必须是非负整数")
        object.__setattr__(self, "capacities", _frozen(capacities.astype(np.int64), np.int64))
        if self.costs is not None:
            costs = np.asarray(self.costs, dtype=np.float64)
            if len(costs) != self.graph.m:
                raise ValidationError("费用数量与边数不一致")
            if np.any(costs != np.round(costs)):
                raise ValidationError("费用必须是整数")
            object.__setattr__(self, "costs", _frozen(costs.astype(np.int64), np.int64))
        has_terminals = self.s is not None and self.t is not None
        if has_terminals == (self.demand is not None):
            raise ValidationError("必须且只能给出 (s, t) 或需求向量之一")
        if has_terminals:
            for x in (self.s, self.t):
                if not 0 <= x < self.graph.n:
                    raise ValidationError(f"终端 {x} 超出顶点范围")
            if self.s == self.t:
                raise ValidationError("源和汇不能相同")
        elif self.demand.n != self.graph.n:
            raise ValidationError("需求向量长度与顶点数不一致")

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def m(self) -> int:
        return self.graph.m

    @property
    def U(self) -> int:
        return max(1, int(self.capacities.max())) if self.m else 1

    @property
    def W(self) -> int:
        if self.costs is None or not self.m:
            return 1
        return max(1, int(np.abs(self.costs).max()))

    def demand_for(self, value: int) -> DemandVector:
        """s-t 形式实例在流值为 value 时的需求向量"""
        if self.demand is not None:
            return self.demand
        return DemandVector.st(self.n, self.s, self.t, value)


@dataclass(frozen=True, eq=False)
class FlowAssignment:
    """实例上的一个流，values[e] 是第 e 条有向边上的流量"""
    values: np.ndarray
    instance: FlowInstance
    flags: Tuple[str, ...] = ()

    def __post_init__(self):
        values = _frozen(self.values, np.float64)
        if len(values) != self.instance.m:
            raise ValidationError("流量数量与边数不一致")
        object.__setattr__(self, "values", values)

    def net_inflow(self) -> np.ndarray:
        g = self.instance.graph
        return (np.bincount(g.heads, weights=self.values, minlength=g.n)
                - np.bincount(g.tails, weights=self.values, minlength=g.n))

    def value(self) -> float:
        """s-t 流值（s 的净流出）；需求形式时返回正需求之和"""
        if self.instance.s is not None:
            return float(-self.net_inflow()[self.instance.s])
        return float(np.clip(self.instance.demand.values, 0, None).sum())

    def cost(self) -> float:
        if self.instance.costs is None:
            return 0.0
        return float(np.dot(self.values, self.instance.costs))

    def is_integral(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.values - np.round(self.values)) <= tol))

    def is_capacity_feasible(self, tol: float = 1e-9) -> bool:
        return bool(np.all(self.values >= -tol)
                    and np.all(self.values <= self.instance.capacities + tol))


@dataclass(frozen=True, eq=False)
class LaplacianSystem:
    """拉普拉斯方程 L(G) x = b 的输入"""
    graph: WeightedGraph
    b: np.ndarray

    def __post_init__(self):
        b = _frozen(self.b, np.float64)
        if len(b) != self.graph.n:
            raise ValidationError("右端项长度与顶点数不一致")
        object.__setattr__(self, "b", b)


@dataclass
class RunReport:
    """命令行一次运行的结果汇总"""
    kind: str
    result: Dict[str, Any] = field(default_factory=dict)
    ledger: Dict[str, int] = field(default_factory=dict)
    rounds: int = 0
    verdict: Optional[str] = None
    wall_clock: float = 0.0
    flags: List[str] = field(default_factory=list)
    exit_code: int = 0
