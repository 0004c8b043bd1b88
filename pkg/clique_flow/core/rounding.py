# -*- coding: utf-8 -*-
"""
流取整

流量以 Δ 的整数倍给出。每一阶段取出流量为 Δ 奇数倍的边集 E'，忽略方向做欧拉定向，
沿定向方向的边加 Δ、逆向的边减 Δ，然后 Δ 翻倍，log₂(1/Δ) 个阶段后流量为整数。
s-t 流的总流量不是整数时先加一条 t→s 的闭合边，并给它极小的费用保证它只会被加流。
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from .errors import CliqueFlowError, NotMultipleOfDelta, OddDegreeInternal, ValidationError
from .euler import orient
from .models import FlowAssignment, FlowInstance, WeightedGraph
from .simulator import CliqueNetwork

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RoundingTask:
    """
    参数:
        instance: 流实例（s-t 形式或需求形式）
        f: 待取整的流，每条边都是 Δ 的整数倍
        delta: Δ ≤ 1 且 1/Δ 是 2 的幂
        costs: 可选的整数费用，缺省取实例自带的费用
    """
    instance: FlowInstance
    f: Union[FlowAssignment, np.ndarray]
    delta: float
    costs: Optional[np.ndarray] = None

    @property
    def values(self) -> np.ndarray:
        if isinstance(self.f, FlowAssignment):
            return self.f.values
        return np.asarray(self.f, dtype=np.float64)

    @property
    def cost_vector(self) -> Optional[np.ndarray]:
        if self.costs is not None:
            return np.asarray(self.costs, dtype=np.float64)
        if self.instance.costs is not None:
            return self.instance.costs.astype(np.float64)
        return None


@dataclass
class RoundingReport:
    orientation_calls: int = 0
    odd_edges: List[int] = field(default_factory=list)
    closure_edge: bool = False
    rounds: int = 0


def _scale_of(delta: float) -> int:
    if not 0 < delta <= 1:
        raise ValidationError(f"Δ 必须在 (0, 1] 内: {delta}")
    scale = int(round(1.0 / delta))
    if abs(scale * delta - 1.0) > 1e-12 or scale & (scale - 1):
        raise ValidationError(f"1/Δ 必须是 2 的幂: Δ={delta}")
    return scale


def _units(values: np.ndarray, delta: float) -> np.ndarray:
    """流量除以 Δ 后的整数倍数"""
    ratio = values / delta
    units = np.rint(ratio)
    bad = np.flatnonzero(np.abs(ratio - units) > 1e-6)
    if len(bad):
        e = int(bad[0])
        logger.error(f"边 {e} 的流量 {values[e]} 不是 Δ={delta} 的整数倍")
        raise NotMultipleOfDelta(e, float(values[e]), delta)
    return units.astype(np.int64)


def _net_units(n: int, tails: np.ndarray, heads: np.ndarray, units: np.ndarray) -> np.ndarray:
    return (np.bincount(heads, weights=units, minlength=n)
            - np.bincount(tails, weights=units, minlength=n)).astype(np.int64)


def round_with_report(task: RoundingTask,
                      network: Optional[CliqueNetwork] = None) -> Tuple[FlowAssignment, RoundingReport]:
    """
    流取整并返回各阶段的统计

    参数:
        task: 取整任务
        network: 记账用的网络，缺省新建

    返回:
        (FlowAssignment, RoundingReport)
    """
    instance = task.instance
    g = instance.graph
    scale = _scale_of(task.delta)
    values = task.values
    if len(values) != g.m:
        raise ValidationError("流量数量与边数不一致")
    caps = instance.capacities.astype(np.float64)
    if np.any(values < -1e-9) or np.any(values > caps + 1e-9):
        raise ValidationError("待取整的流超出容量范围")
    if network is None:
        network = CliqueNetwork(max(g.n, 1))
    start_rounds = network.ledger.rounds_charged

    units = _units(values, task.delta)
    tails, heads = g.tails.copy(), g.heads.copy()
    costs = task.cost_vector
    report = RoundingReport()
    residue_before = _net_units(g.n, tails, heads, units)

    if instance.s is not None:
        value_units = -int(residue_before[instance.s])
        if value_units % scale:
            report.closure_edge = True
            tails = np.append(tails, instance.t)
            heads = np.append(heads, instance.s)
            units = np.append(units, value_units)
            base = costs if costs is not None else np.zeros(g.m)
            big = 1.0 + float(np.abs(base).sum())
            costs = np.append(base, -big)

    while scale > 1:
        odd = np.flatnonzero(units % 2 != 0)
        parity = (np.bincount(tails[odd], minlength=g.n) + np.bincount(heads[odd], minlength=g.n)) % 2
        if np.any(parity):
            v = int(np.flatnonzero(parity)[0])
            logger.error(f"Δ=1/{scale} 时顶点 {v} 关联的奇数倍边数为奇数")
            raise OddDegreeInternal(v)
        sub = WeightedGraph(g.n, tails[odd], heads[odd], np.ones(len(odd)))
        sub_costs = costs[odd] if costs is not None else None
        orientation, _ = orient(sub, sub_costs, network=network)
        units[odd] += orientation.direction
        units //= 2
        scale //= 2
        report.orientation_calls += 1
        report.odd_edges.append(len(odd))
        logger.debug(f"取整阶段完成: |E'|={len(odd)}, 剩余 1/Δ={scale}")

    rounded = units[: g.m].astype(np.float64)
    if np.any(rounded < 0) or np.any(rounded > caps):
        e = int(np.flatnonzero((rounded < 0) | (rounded > caps))[0])
        logger.error(f"取整后边 {e} 的流量 {rounded[e]} 超出容量 {caps[e]}")
        raise CliqueFlowError(f"取整后边 {e} 超出容量")

    residue_after = _net_units(g.n, g.tails, g.heads, rounded) * int(round(1.0 / task.delta))
    check = np.ones(g.n, dtype=bool)
    if report.closure_edge:
        check[[instance.s, instance.t]] = False
    if not np.array_equal(residue_after[check], residue_before[check]):
        v = int(np.flatnonzero(check & (residue_after != residue_before))[0])
        logger.error(f"取整改变了顶点 {v} 的不平衡量")
        raise CliqueFlowError(f"取整改变了顶点 {v} 的不平衡量")

    report.rounds = network.ledger.rounds_charged - start_rounds
    flags = ("closure-edge",) if report.closure_edge else ()
    logger.info(f"流取整完成: {report.orientation_calls} 次欧拉定向, {report.rounds} 轮")
    return FlowAssignment(rounded, instance, flags), report


def flow_round(task: RoundingTask, network: Optional[CliqueNetwork] = None) -> FlowAssignment:
    """
    把 Δ 整数倍的流取整为整数流

    每条边的流量变为原值的下取整或上取整；s-t 流的流值不减；总流量为整数且给出费用时，总费用不增。
    """
    result, _ = round_with_report(task, network)
    return result
