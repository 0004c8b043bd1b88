# -*- coding: utf-8 -*-
"""
异常定义

所有模块抛出的异常都继承自 CliqueFlowError，命令行入口据此映射退出码。
"""

from typing import Optional


class CliqueFlowError(Exception):
    """项目内所有异常的基类"""


# --- 模拟器 ---
class BandwidthViolation(CliqueFlowError):
    """某节点在一轮内发送超过 n−1 条消息，或向同一目的地发送多于 1 条"""

    def __init__(self, node: int, count: int):
        self.node = node
        self.count = count
        super().__init__(f"节点 {node} 本轮发送 {count} 条消息，超出带宽限制")


class PayloadOverflow(CliqueFlowError):
    def __init__(self, node: int, length: int, limit: int):
        self.node = node
        self.length = length
        self.limit = limit
        super().__init__(f"节点 {node} 的消息载荷 {length} 字超过上限 {limit} 字")


class RoutingPreconditionViolation(CliqueFlowError):
    """路由批次中某节点作为源或目的地的消息数超过 n"""

    def __init__(self, node: int, role: str, count: int):
        self.node = node
        self.role = role
        self.count = count
        super().__init__(f"路由前提不满足: 节点 {node} 作为 {role} 的消息数为 {count}")


# --- 图与求解器 ---
class DimensionMismatch(CliqueFlowError):
    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"维度不匹配: 期望 {expected}，实际 {actual}")


class TooLarge(CliqueFlowError):
    def __init__(self, size: int, limit: int):
        self.size = size
        self.limit = limit
        super().__init__(f"规模 {size} 超过穷举上限 {limit}")


class EmptyGraph(CliqueFlowError):
    def __init__(self, message: str = "图中没有边"):
        super().__init__(message)


class NoConvergence(CliqueFlowError):
    """切比雪夫迭代在 max_iters 内未达到精度，说明 A ⪯ B ⪯ κA 前提被破坏"""

    def __init__(self, iterations: int, estimate: float, target: float):
        self.iterations = iterations
        self.estimate = estimate
        self.target = target
        super().__init__(f"迭代 {iterations} 次后残差估计 {estimate:.3e} 仍高于 {target:.3e}")


class DisconnectedWithInfeasibleB(CliqueFlowError):
    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"右端项不在拉普拉斯矩阵值域内，投影残差 {residual:.3e}")


class CannotCertify(CliqueFlowError):
    def __init__(self, phi: float, crossing: int, allowed: float):
        self.phi = phi
        self.crossing = crossing
        self.allowed = allowed
        super().__init__(f"无法在 φ={phi:.4g} 下完成展开分解: 跨簇边 {crossing} > {allowed:.1f}")


class RangeMismatch(CliqueFlowError):
    def __init__(self, message: str = "两个拉普拉斯矩阵的核不同"):
        super().__init__(message)


# --- 欧拉定向与取整 ---
class OddDegree(CliqueFlowError):
    def __init__(self, vertex: int, degree: int):
        self.vertex = vertex
        self.degree = degree
        super().__init__(f"顶点 {vertex} 的度数 {degree} 为奇数")


class NotMultipleOfDelta(CliqueFlowError):
    def __init__(self, edge: int, value: float, delta: float):
        self.edge = edge
        self.value = value
        self.delta = delta
        super().__init__(f"边 {edge} 的流量 {value} 不是 Δ={delta} 的整数倍")


class OddDegreeInternal(CliqueFlowError):
    """E' 的奇偶性被破坏，输入并不是一个合法的流"""

    def __init__(self, vertex: int):
        self.vertex = vertex
        super().__init__(f"顶点 {vertex} 关联的奇数倍边数量为奇数，输入不是合法流")


# --- 内点法 ---
class SolverFailure(CliqueFlowError):
    pass


class InteriorViolated(CliqueFlowError):
    def __init__(self, edge: Optional[int] = None, detail: str = ""):
        self.edge = edge
        super().__init__(f"严格内点条件被破坏 (边 {edge}) {detail}".strip())


class Infeasible(CliqueFlowError):
    pass


class NoAugmentingPath(Infeasible):
    pass


class NoEdges(CliqueFlowError):
    def __init__(self):
        super().__init__("实例中没有边")


class NonHalfIntegralT(CliqueFlowError):
    def __init__(self, vertex: int, value: float):
        self.vertex = vertex
        self.value = value
        super().__init__(f"顶点 {vertex} 的 2t(v)={value} 不是整数，需求向量有误")


# --- 输入输出 ---
class ParseError(CliqueFlowError):
    def __init__(self, line_no: int, line: str, reason: str = ""):
        self.line_no = line_no
        self.line = line
        super().__init__(f"第 {line_no} 行解析失败: {line!r} {reason}".strip())


class ValidationError(CliqueFlowError):
    pass
