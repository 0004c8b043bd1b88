# -*- coding: utf-8 -*-
"""
实例文件、账本文件与运行报告的读写

实例文件是类 DIMACS 的行格式，顶点编号从 1 开始：
    c 注释
    p <kind> n m          kind ∈ max / min / lap / euler / round
    a u v cap [cost]      有向弧；lap / euler 中第三列是权重
    n v s | n v t         源、汇
    n v d                 需求（流入 − 流出）
    b v value             拉普拉斯方程右端项
    f k value             round 实例中第 k 条弧上的分数流
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from ..core.errors import ParseError, ValidationError
from ..core.models import DemandVector, FlowInstance, LaplacianSystem, RunReport, WeightedGraph
from ..core.simulator import RoundLedger

logger = logging.getLogger(__name__)

KINDS = ("max", "min", "lap", "euler", "round")


@dataclass
class ParsedInstance:
    """
    解析结果

    参数:
        kind: 实例类型
        graph: 图（max / min / round 为有向图）
        instance: 流实例，lap / euler 为 None
        system: 拉普拉斯方程，只有 lap 实例才有
        flow: round 实例的分数流
    """
    kind: str
    graph: WeightedGraph
    instance: Optional[FlowInstance] = None
    system: Optional[LaplacianSystem] = None
    flow: Optional[np.ndarray] = None


def _number(token: str, line_no: int, line: str, integral: bool = False) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(line_no, line, f"无法解析数值 {token!r}")
    if integral and value != int(value):
        raise ParseError(line_no, line, f"需要整数: {token}")
    return value


def _vertex(token: str, n: int, line_no: int, line: str) -> int:
    v = int(_number(token, line_no, line, integral=True))
    if not 1 <= v <= n:
        raise ParseError(line_no, line, f"顶点编号 {v} 不在 1..{n} 内")
    return v - 1


def parse_instance(text: str) -> ParsedInstance:
    """
    解析实例文本

    参数:
        text: 文件内容

    返回:
        ParsedInstance: 校验过的实例；格式错误抛出 ParseError，语义错误抛出 ValidationError
    """
    kind = None
    n = m = 0
    arcs: List[List[float]] = []
    source = sink = None
    demand = None
    rhs = None
    flow = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        tokens = line.split()
        tag = tokens[0]
        if tag == "p":
            if kind is not None:
                raise ParseError(line_no, line, "重复的 p 行")
            if len(tokens) != 4 or tokens[1] not in KINDS:
                raise ParseError(line_no, line, f"p 行格式应为 'p <{'/'.join(KINDS)}> n m'")
            kind = tokens[1]
            n = int(_number(tokens[2], line_no, line, integral=True))
            m = int(_number(tokens[3], line_no, line, integral=True))
            if n < 1 or m < 0:
                raise ParseError(line_no, line, "顶点数必须为正，边数不能为负")
            demand = np.zeros(n, dtype=np.int64)
            rhs = np.zeros(n)
            flow = np.zeros(m)
            continue
        if kind is None:
            raise ParseError(line_no, line, "p 行之前出现了数据行")

        if tag == "a":
            if len(tokens) not in (4, 5):
                raise ParseError(line_no, line, "a 行格式应为 'a u v cap [cost]'")
            u = _vertex(tokens[1], n, line_no, line)
            v = _vertex(tokens[2], n, line_no, line)
            if u == v:
                raise ParseError(line_no, line, "不允许自环")
            weighted = kind in ("lap", "euler")
            cap = _number(tokens[3], line_no, line, integral=not weighted)
            cost = _number(tokens[4], line_no, line, integral=True) if len(tokens) == 5 else 0.0
            arcs.append([u, v, cap, cost])
        elif tag == "n":
            if len(tokens) != 3:
                raise ParseError(line_no, line, "n 行格式应为 'n v s|t|d'")
            v = _vertex(tokens[1], n, line_no, line)
            if tokens[2] == "s":
                source = v
            elif tokens[2] == "t":
                sink = v
            else:
                demand[v] += int(_number(tokens[2], line_no, line, integral=True))
        elif tag == "b":
            if len(tokens) != 3:
                raise ParseError(line_no, line, "b 行格式应为 'b v value'")
            rhs[_vertex(tokens[1], n, line_no, line)] = _number(tokens[2], line_no, line)
        elif tag == "f":
            if len(tokens) != 3:
                raise ParseError(line_no, line, "f 行格式应为 'f k value'")
            k = int(_number(tokens[1], line_no, line, integral=True))
            if not 1 <= k <= m:
                raise ParseError(line_no, line, f"弧编号 {k} 不在 1..{m} 内")
            flow[k - 1] = _number(tokens[2], line_no, line)
        else:
            raise ParseError(line_no, line, f"未知的行类型 {tag!r}")

    if kind is None:
        raise ParseError(0, "", "缺少 p 行")
    if len(arcs) != m:
        raise ValidationError(f"p 行声明 {m} 条弧，实际读到 {len(arcs)} 条")
    table = np.array(arcs, dtype=np.float64).reshape(-1, 4)
    tails = table[:, 0].astype(np.int64)
    heads = table[:, 1].astype(np.int64)

    if kind in ("lap", "euler"):
        graph = WeightedGraph(n, tails, heads, table[:, 2])
        system = LaplacianSystem(graph, rhs) if kind == "lap" else None
        logger.debug(f"读入 {kind} 实例: n={n}, m={m}")
        return ParsedInstance(kind, graph, system=system)

    graph = WeightedGraph(n, tails, heads, np.ones(m), directed=True)
    costs = table[:, 3] if kind in ("min", "round") else None
    if source is not None or sink is not None:
        if source is None or sink is None:
            raise ValidationError("源和汇必须同时给出")
        if np.any(demand):
            raise ValidationError("不能同时给出源汇与需求")
        instance = FlowInstance(graph, table[:, 2], costs, s=source, t=sink, kind=kind)
    else:
        if kind == "max":
            raise ValidationError("最大流实例需要源和汇")
        instance = FlowInstance(graph, table[:, 2], costs, demand=DemandVector(demand), kind=kind)
    logger.debug(f"读入 {kind} 实例: n={n}, m={m}")
    return ParsedInstance(kind, graph, instance=instance, flow=flow if kind == "round" else None)


def read_instance(path: Union[str, Path]) -> ParsedInstance:
    """从文件读取实例"""
    with open(path, "r", encoding="utf-8") as f:
        return parse_instance(f.read())


def format_instance(kind: str, graph: WeightedGraph, instance: Optional[FlowInstance] = None,
                    b: Optional[np.ndarray] = None, flow: Optional[np.ndarray] = None) -> str:
    """把实例写回文本格式，parse_instance 的逆过程"""
    lines = [f"p {kind} {graph.n} {graph.m}"]
    if instance is not None and instance.s is not None:
        lines.append(f"n {instance.s + 1} s")
        lines.append(f"n {instance.t + 1} t")
    if instance is not None and instance.demand is not None:
        for v in np.flatnonzero(instance.demand.values):
            lines.append(f"n {v + 1} {int(instance.demand.values[v])}")
    for k in range(graph.m):
        u, v = int(graph.tails[k]) + 1, int(graph.heads[k]) + 1
        if instance is None:
            lines.append(f"a {u} {v} {graph.weights[k]:g}")
        elif instance.costs is not None:
            lines.append(f"a {u} {v} {int(instance.capacities[k])} {int(instance.costs[k])}")
        else:
            lines.append(f"a {u} {v} {int(instance.capacities[k])}")
    if b is not None:
        for v in np.flatnonzero(b):
            lines.append(f"b {v + 1} {b[v]:.17g}")
    if flow is not None:
        for k in np.flatnonzero(flow):
            lines.append(f"f {k + 1} {flow[k]:.17g}")
    return "\n".join(lines) + "\n"


def write_ledger(path: Union[str, Path], ledger: RoundLedger) -> Path:
    """账本文件每行一个 phase<TAB>rounds"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in ledger.lines():
            f.write(line + "\n")
    logger.info(f"账本已写入 {path}")
    return path


def format_report(report: RunReport) -> str:
    """运行报告的中文文本"""
    lines = [f"问题类型: {report.kind}"]
    for key, value in report.result.items():
        lines.append(f"  {key}: {value}")
    lines.append(f"模拟轮数: {report.rounds}")
    for phase, rounds in report.ledger.items():
        lines.append(f"  {phase}: {rounds}")
    if report.verdict is not None:
        lines.append(f"校验结果: {report.verdict}")
    if report.flags:
        lines.append(f"实例标记: {', '.join(report.flags)}")
    lines.append(f"耗时: {report.wall_clock:.3f} 秒")
    lines.append(f"退出码: {report.exit_code}")
    return "\n".join(lines)
