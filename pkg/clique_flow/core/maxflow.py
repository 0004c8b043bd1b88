# -*- coding: utf-8 -*-
"""
基于电流的内点法最大流

流程：添加预处理边并把每条原始边拆成三条无向边 → 一次增广与修正 → 主循环（‖ρ‖₃ 足够小时增广一步，
否则提升拥塞最大的边）→ 把提升后图上的流投影回原图 → 流取整 → 增广路补足目标流值。
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..config import settings
from .chebyshev import solve_distributed
from .errors import (CannotCertify, CliqueFlowError, Infeasible, InteriorViolated, NoConvergence,
                     NoEdges, RangeMismatch, SolverFailure)
from .models import FlowAssignment, FlowInstance, WeightedGraph
from .rounding import RoundingTask, round_with_report
from .simulator import CliqueNetwork

logger = logging.getLogger(__name__)

KIND_ORIGINAL, KIND_SOURCE, KIND_SINK, KIND_PRECONDITION, KIND_PATH = range(5)


@dataclass
class LiftedGraph:
    """
    内点法运行的无向图，边的方向只是记号

    参数:
        n: 顶点数（提升会增加新顶点）
        tails / heads: 边的记号方向
        up / um: 正向、反向容量 u⁺、u⁻
        flow / duals: 流 f 与对偶变量 y
        origin: (u,v) 副本对应的原始边编号，其余为 −1
        sign: 提升时为保证对偶间隙为正而翻转过方向的边取 −1
        kind: 边的来源
    """
    n: int
    s: int
    t: int
    tails: np.ndarray
    heads: np.ndarray
    up: np.ndarray
    um: np.ndarray
    flow: np.ndarray
    duals: np.ndarray
    origin: np.ndarray
    sign: np.ndarray
    kind: np.ndarray

    @property
    def m(self) -> int:
        return len(self.tails)

    def residuals(self, f: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
        f = self.flow if f is None else f
        return self.up - f, self.um + f

    def resistances(self, f: Optional[np.ndarray] = None) -> np.ndarray:
        forward, backward = self.residuals(f)
        return 1.0 / forward ** 2 + 1.0 / backward ** 2

    def residue(self, values: np.ndarray) -> np.ndarray:
        return (np.bincount(self.heads, weights=values, minlength=self.n)
                - np.bincount(self.tails, weights=values, minlength=self.n))


@dataclass
class AugmentationStep:
    f_tilde: np.ndarray
    f_hat: np.ndarray
    y_hat: np.ndarray
    delta: float
    capped: bool = False


@dataclass
class MaxFlowResult:
    flow: FlowAssignment
    value: int
    iterations: int = 0
    steps: int = 0
    boosts: int = 0
    loop_bound: int = 0
    eta: float = 0.0
    delta_hat: float = 0.0
    tau: float = 0.0
    augmenting_paths: int = 0
    rounding_calls: int = 0
    rounds: int = 0
    flags: List[str] = field(default_factory=list)


def precondition_and_lift(instance: FlowInstance) -> LiftedGraph:
    """
    添加 m 条容量 2U 的 (t, s) 预处理边，并把每条原始边 (u, v) 换成 (u, v)、(s, v)、(u, t) 三条无向边

    端点重合的副本（例如原始边指向 s 时的 (s, s)）是自环，不参与电流计算，直接省略。
    """
    g = instance.graph
    s, t, U = instance.s, instance.t, instance.U
    caps = instance.capacities.astype(np.float64)
    m = g.m
    tails = np.concatenate([np.full(m, t), g.tails, np.full(m, s), g.tails])
    heads = np.concatenate([np.full(m, s), g.heads, g.heads, np.full(m, t)])
    cap = np.concatenate([np.full(m, 2.0 * U), caps, caps, caps])
    kind = np.concatenate([np.full(m, KIND_PRECONDITION), np.full(m, KIND_ORIGINAL),
                           np.full(m, KIND_SOURCE), np.full(m, KIND_SINK)])
    origin = np.concatenate([np.full(m, -1), np.arange(m), np.full(m, -1), np.full(m, -1)])
    keep = (tails != heads) & (cap > 0)
    count = int(keep.sum())
    return LiftedGraph(
        n=g.n, s=s, t=t,
        tails=tails[keep].astype(np.int64), heads=heads[keep].astype(np.int64),
        up=cap[keep].copy(), um=cap[keep].copy(),
        flow=np.zeros(count), duals=np.zeros(g.n),
        origin=origin[keep].astype(np.int64), sign=np.ones(count, dtype=np.int64),
        kind=kind[keep].astype(np.int64),
    )


def _potentials(lifted: LiftedGraph, weights: np.ndarray, b: np.ndarray, network: CliqueNetwork,
                cfg: Dict[str, Any], r: float) -> np.ndarray:
    """求解 L(G)φ = b，数值失败统一转为 SolverFailure"""
    graph = WeightedGraph(lifted.n, lifted.tails, lifted.heads, weights)
    unit = float(cfg["granularity_ratio"]) * float(weights.min())
    try:
        phi, _ = solve_distributed(graph, b, float(cfg["solver_epsilon"]), network=network, r=r,
                                   granularity=unit, strict=False)
    except (NoConvergence, RangeMismatch, CannotCertify, np.linalg.LinAlgError, RuntimeError) as e:
        logger.error(f"电流求解失败: {e}")
        raise SolverFailure(str(e)) from e
    return phi


def _step_cap(lifted: LiftedGraph, f_tilde: np.ndarray, floor: float) -> float:
    """使所有剩余容量不低于 floor 的最大步长"""
    forward, backward = lifted.residuals()
    caps = np.full(lifted.m, np.inf)
    pos = f_tilde > 0
    neg = f_tilde < 0
    caps[pos] = (forward[pos] - floor) / f_tilde[pos]
    caps[neg] = (backward[neg] - floor) / -f_tilde[neg]
    return float(max(caps.min(), 0.0)) if lifted.m else np.inf


def augmentation(lifted: LiftedGraph, F: float, delta: float, network: CliqueNetwork,
                 config: Optional[Dict[str, Any]] = None, r: float = 1.0,
                 floor: Optional[float] = None) -> AugmentationStep:
    """
    增广步：按当前流计算电阻，求 F 单位 s-t 电流 f̃，f̂ = f + δf̃，ŷ = y + δφ̃

    参数:
        floor: 若给出，δ 被限制为使所有剩余容量不低于 floor 的值
    """
    cfg = settings.merged(settings.MAXFLOW_CONFIG, config)
    resist = lifted.resistances()
    b = np.zeros(lifted.n)
    b[lifted.s] -= F
    b[lifted.t] += F
    phi = _potentials(lifted, 1.0 / resist, b, network, cfg, r)
    f_tilde = (phi[lifted.heads] - phi[lifted.tails]) / resist
    capped = False
    if floor is not None and delta > 0:
        cap = _step_cap(lifted, f_tilde, floor)
        if delta > cap:
            delta, capped = cap, True
    f_hat = lifted.flow + delta * f_tilde
    forward, backward = lifted.residuals(f_hat)
    if delta > 0 and (np.any(forward <= 0) or np.any(backward <= 0)):
        e = int(np.flatnonzero((forward <= 0) | (backward <= 0))[0])
        logger.error(f"增广步长 δ={delta:.3e} 过大，边 {e} 越界")
        raise InteriorViolated(e, "增广步长过大")
    return AugmentationStep(f_tilde, f_hat, lifted.duals + delta * phi, delta, capped)


def _interior(lifted: LiftedGraph, f: np.ndarray) -> bool:
    forward, backward = lifted.residuals(f)
    return bool(np.all(forward > 0) and np.all(backward > 0))


def fixing(lifted: LiftedGraph, f_hat: np.ndarray, y_hat: np.ndarray, network: CliqueNetwork,
           config: Optional[Dict[str, Any]] = None, r: float = 1.0) -> Tuple[np.ndarray, np.ndarray, bool]:
    """
    修正步：把 (f̂, ŷ) 拉回中心路径，输出流的不平衡量与 f̂ 相同

    返回:
        (f, y, damped): damped 表示修正量曾被折半以保持严格内点
    """
    cfg = settings.merged(settings.MAXFLOW_CONFIG, config)
    tries = int(cfg["fixing_damping_tries"])
    if not _interior(lifted, f_hat):
        raise InteriorViolated(None, "修正步输入不是严格内点")
    forward, backward = lifted.residuals(f_hat)
    weights = 1.0 / (1.0 / forward ** 2 + 1.0 / backward ** 2)
    gap = 1.0 / forward - 1.0 / backward
    theta = weights * ((y_hat[lifted.heads] - y_hat[lifted.tails]) - gap)
    damped = False
    scale = 1.0
    for _ in range(tries):
        if _interior(lifted, f_hat + scale * theta):
            break
        scale *= 0.5
        damped = True
    else:
        raise InteriorViolated(None, "修正量折半后仍越界")
    theta = scale * theta
    f_prime = f_hat + theta
    if not np.any(theta):
        return f_prime, y_hat.copy(), damped

    resist = lifted.resistances(f_prime)
    phi = _potentials(lifted, 1.0 / resist, -lifted.residue(theta), network, cfg, r)
    theta_prime = (phi[lifted.heads] - phi[lifted.tails]) / resist
    scale = 1.0
    for _ in range(tries):
        if _interior(lifted, f_prime + scale * theta_prime):
            break
        scale *= 0.5
        damped = True
    else:
        raise InteriorViolated(None, "二次修正量折半后仍越界")
    return f_prime + scale * theta_prime, y_hat + scale * phi, damped


def congestion(lifted: LiftedGraph, f_tilde: np.ndarray) -> np.ndarray:
    """ρ_e = f̃_e / min(u⁺ − f, u⁻ + f)"""
    forward, backward = lifted.residuals()
    return f_tilde / np.minimum(forward, backward)


def select_boost_set(rho: np.ndarray, size: int) -> np.ndarray:
    """|ρ| 最大的 size 条边，相同时编号小者优先"""
    order = np.lexsort((np.arange(len(rho)), -np.abs(rho)))
    return np.sort(order[:size])


def boosting(lifted: LiftedGraph, boost_set: np.ndarray, U: int,
             config: Optional[Dict[str, Any]] = None) -> List[str]:
    """
    把 boost_set 中的每条边替换为 β(e) 条边的路径，β(e) = 2 + ⌈2U / min(u⁺−f, u⁻+f)⌉

    前两条边复制原边，其余边 u⁺ = ∞；路径上的流都等于 f，对偶变量按等差数列设置，
    使每条路径边都满足中心路径条件。对偶间隙为负的边先翻转记号方向。

    返回:
        List[str]: 本次提升产生的标记
    """
    cfg = settings.merged(settings.MAXFLOW_CONFIG, config)
    tolerance = float(cfg["boost_gap_tolerance"])
    longest = int(cfg["max_boost_length"])
    flags: List[str] = []
    new_tails, new_heads, new_up, new_um, new_flow = [], [], [], [], []
    new_duals: List[float] = []
    next_vertex = lifted.n

    for e in boost_set:
        e = int(e)
        f = lifted.flow[e]
        forward, backward = lifted.up[e] - f, lifted.um[e] + f
        gap = 1.0 / forward - 1.0 / backward
        if abs(gap) <= tolerance:
            flags.append("boost-skipped-zero-gap")
            continue
        beta = 2 + int(math.ceil(2.0 * U / min(forward, backward)))
        if beta > longest:
            logger.warning(f"边 {e} 的提升路径长度 {beta} 超过上限 {longest}，跳过")
            flags.append("boost-too-long")
            continue
        if gap < 0:
            lifted.tails[e], lifted.heads[e] = lifted.heads[e], lifted.tails[e]
            lifted.up[e], lifted.um[e] = lifted.um[e], lifted.up[e]
            lifted.flow[e] = f = -f
            lifted.sign[e] = -lifted.sign[e]
            gap = -gap
        if lifted.kind[e] == KIND_PRECONDITION:
            logger.warning(f"预处理边 {e} 被提升")
            flags.append("boosted-preconditioning-edge")

        u, v = int(lifted.tails[e]), int(lifted.heads[e])
        path = [u] + list(range(next_vertex, next_vertex + beta - 1)) + [v]
        next_vertex += beta - 1
        y_v = float(lifted.duals[v])
        step = -gap / (beta - 2)
        duals = [y_v, y_v + gap]
        for _ in range(3, beta):
            duals.append(duals[-1] + step)
        new_duals.extend(duals)

        lifted.heads[e] = path[1]
        up_e, um_e = float(lifted.up[e]), float(lifted.um[e])
        for i in range(2, beta + 1):
            new_tails.append(path[i - 1])
            new_heads.append(path[i])
            if i == 2:
                new_up.append(up_e)
                new_um.append(um_e)
            else:
                new_up.append(np.inf)
                new_um.append((beta - 2) / gap - f)
            new_flow.append(f)

    if new_tails:
        count = len(new_tails)
        lifted.tails = np.concatenate([lifted.tails, np.array(new_tails, dtype=np.int64)])
        lifted.heads = np.concatenate([lifted.heads, np.array(new_heads, dtype=np.int64)])
        lifted.up = np.concatenate([lifted.up, new_up])
        lifted.um = np.concatenate([lifted.um, new_um])
        lifted.flow = np.concatenate([lifted.flow, new_flow])
        lifted.origin = np.concatenate([lifted.origin, np.full(count, -1, dtype=np.int64)])
        lifted.sign = np.concatenate([lifted.sign, np.ones(count, dtype=np.int64)])
        lifted.kind = np.concatenate([lifted.kind, np.full(count, KIND_PATH, dtype=np.int64)])
        lifted.duals = np.concatenate([lifted.duals, new_duals])
        lifted.n = next_vertex
    return flags


def _norm3(x: np.ndarray) -> float:
    return float(np.sum(np.abs(x) ** 3) ** (1.0 / 3.0))


def bfs_path(n: int, arc_from: np.ndarray, arc_to: np.ndarray, usable: np.ndarray, s: int, t: int,
             network: Optional[CliqueNetwork], phase: str) -> Optional[List[int]]:
    """
    逐跳广度优先搜索，每扩展一层计 1 轮

    返回:
        s 到 t 的弧编号列表，不可达时返回 None
    """
    parent = np.full(n, -1, dtype=np.int64)
    visited = np.zeros(n, dtype=bool)
    visited[s] = True
    frontier = np.zeros(n, dtype=bool)
    frontier[s] = True
    while frontier.any() and not visited[t]:
        if network is not None:
            network.exchange(phase, int(frontier.sum()))
        candidates = np.flatnonzero(usable & frontier[arc_from] & ~visited[arc_to])
        reached, first = np.unique(arc_to[candidates], return_index=True)
        parent[reached] = candidates[first]
        visited[reached] = True
        frontier[:] = False
        frontier[reached] = True
    if not visited[t]:
        return None
    path = []
    v = t
    while v != s:
        arc = int(parent[v])
        path.append(arc)
        v = int(arc_from[arc])
    if network is not None:
        network.exchange(phase, len(path))
    return path[::-1]


def _project(lifted: LiftedGraph, instance: FlowInstance, F: int, scale: int,
             network: CliqueNetwork) -> np.ndarray:
    """
    把原始边副本上的流投影为原图上以 1/scale 为单位的合法流：截断到 [0, u_e]、向下取整，
    再从 s 出发贪心分解出 s-t 路径，总量不超过 F
    """
    g = instance.graph
    raw = np.zeros(g.m)
    copies = np.flatnonzero(lifted.origin >= 0)
    raw[lifted.origin[copies]] = lifted.sign[copies] * lifted.flow[copies]
    raw = np.clip(raw, 0.0, instance.capacities.astype(np.float64))
    available = np.floor(raw * scale + 1e-9).astype(np.int64)
    result = np.zeros(g.m, dtype=np.int64)
    target = F * scale
    routed = 0
    while routed < target:
        path = bfs_path(g.n, g.tails, g.heads, available > 0, instance.s, instance.t,
                        network, "maxflow/projection")
        if path is None:
            break
        amount = min(int(available[path].min()), target - routed)
        available[path] -= amount
        result[path] += amount
        routed += amount
    return result


def _augment_to_target(instance: FlowInstance, flow: np.ndarray, F: int,
                       network: CliqueNetwork) -> Tuple[np.ndarray, int]:
    """在残量图上反复找增广路直到流值为 F"""
    g = instance.graph
    caps = instance.capacities.astype(np.int64)
    flow = flow.astype(np.int64).copy()
    arc_from = np.concatenate([g.tails, g.heads])
    arc_to = np.concatenate([g.heads, g.tails])
    value = int(np.sum(flow[g.tails == instance.s]) - np.sum(flow[g.heads == instance.s]))
    paths = 0
    while value < F:
        residual = np.concatenate([caps - flow, flow])
        path = bfs_path(g.n, arc_from, arc_to, residual > 0, instance.s, instance.t,
                        network, "maxflow/augmenting-path")
        if path is None:
            logger.error(f"残量图中没有增广路，流值停在 {value} < {F}")
            raise Infeasible(f"目标流值 {F} 不可行，最大可达 {value}")
        path = np.array(path)
        amount = min(int(residual[path].min()), F - value)
        forward = path[path < g.m]
        backward = path[path >= g.m] - g.m
        flow[forward] += amount
        flow[backward] -= amount
        value += amount
        paths += 1
    return flow, paths


def _schedule(m: int, U: int, cfg: Dict[str, Any]) -> Tuple[float, float, int, float, int]:
    """η、δ̂、主循环上界、提升阈值和 |S*|"""
    log_m = math.log(max(m, 2))
    log_log = math.log(max(math.log2(max(m * U, 2)), 1.0))
    eta = 1.0 / 14.0 - (1.0 / 7.0) * math.log(U) / log_m - float(cfg["eta_const"]) * log_log / log_m
    eta = max(float(cfg["eta_floor"]), eta)
    delta_hat = m ** -(0.5 - eta)
    bound = int(math.ceil(float(cfg["loop_const"]) / delta_hat * max(1.0, math.log2(U))))
    threshold = m ** (0.5 - eta) / (33.0 * (1.0 - float(cfg["alpha_step"])))
    size = max(1, int(math.floor(m ** (4.0 * eta))))
    return eta, delta_hat, bound, threshold, size


def max_flow(instance: FlowInstance, F: int, network: Optional[CliqueNetwork] = None,
             config: Optional[Dict[str, Any]] = None, r: float = 1.0) -> MaxFlowResult:
    """
    求流值为 F 的整数 s-t 流

    参数:
        instance: s-t 形式的有向容量实例
        F: 目标流值
        network: 记账用的网络，缺省新建
        config: 覆盖 MAXFLOW_CONFIG
        r: 拉普拉斯求解器的折中参数

    返回:
        MaxFlowResult: 整数流与运行统计；F 不可行时抛出 Infeasible
    """
    cfg = settings.merged(settings.MAXFLOW_CONFIG, config)
    if instance.s is None:
        raise CliqueFlowError("最大流需要 s-t 形式的实例")
    if network is None:
        network = CliqueNetwork(max(instance.n, 1))
    start = network.ledger.rounds_charged
    F = int(F)
    g = instance.graph
    if F == 0:
        return MaxFlowResult(FlowAssignment(np.zeros(g.m), instance), 0)
    if g.m == 0:
        raise NoEdges()
    caps = instance.capacities
    out_s = int(caps[g.tails == instance.s].sum())
    in_t = int(caps[g.heads == instance.t].sum())
    if F > min(out_s, in_t):
        logger.error(f"目标流值 {F} 超过 s 的出容量 {out_s} 或 t 的入容量 {in_t}")
        raise Infeasible(f"目标流值 {F} 超过源汇的容量上界")

    U = instance.U
    lifted = precondition_and_lift(instance)
    eta, delta_hat, bound, threshold, size = _schedule(lifted.m, U, cfg)
    alpha = float(cfg["alpha_step"])
    floor = float(cfg["interior_floor"]) * U
    flags: List[str] = []
    logger.info(f"最大流内点法开始: m={lifted.m}, U={U}, F={F}, η={eta:.4f}, 主循环上界 {bound}")

    aug = augmentation(lifted, F, 0.0, network, cfg, r)
    rho = congestion(lifted, aug.f_tilde)
    lifted.flow, lifted.duals, damped = fixing(lifted, aug.f_hat, aug.y_hat, network, cfg, r)

    tau = 0.0
    iterations = steps = boosts = 0
    force_step = False
    while tau < 1.0 - 1e-12 and iterations < bound:
        iterations += 1
        network.exchange("maxflow/step", lifted.m)
        norm = _norm3(rho)
        if norm <= threshold or force_step:
            force_step = False
            delta = 1.0 / (33.0 * (1.0 - alpha) * norm) if norm > 0 else 1.0
            delta = min(delta, 1.0 - tau)
            aug = augmentation(lifted, F, delta, network, cfg, r, floor=floor)
            if aug.capped and "interior-cap" not in flags:
                logger.warning(f"剩余容量下限限制了步长: δ={aug.delta:.3e}")
                flags.append("interior-cap")
            rho = congestion(lifted, aug.f_tilde)
            lifted.flow, lifted.duals, damped = fixing(lifted, aug.f_hat, aug.y_hat, network, cfg, r)
            if damped and "fixing-damped" not in flags:
                flags.append("fixing-damped")
            tau += aug.delta
            steps += 1
            logger.debug(f"第 {iterations} 次迭代: 增广 δ={aug.delta:.4g}, τ={tau:.4f}, ‖ρ‖₃={norm:.4g}")
        else:
            chosen = select_boost_set(rho, size)
            network.exchange("maxflow/boosting", len(chosen))
            for flag in boosting(lifted, chosen, U, cfg):
                if flag not in flags:
                    flags.append(flag)
            boosts += 1
            trial = augmentation(lifted, F, 0.0, network, cfg, r)
            rho = congestion(lifted, trial.f_tilde)
            after = _norm3(rho)
            if after >= norm:
                logger.warning(f"提升未降低拥塞: ‖ρ‖₃ {norm:.4g} → {after:.4g}")
                if "boost-no-progress" not in flags:
                    flags.append("boost-no-progress")
                force_step = True
            logger.debug(f"第 {iterations} 次迭代: 提升 {len(chosen)} 条边, ‖ρ‖₃ {norm:.4g} → {after:.4g}")
    if tau < 1.0 - 1e-12:
        logger.warning(f"主循环达到上界 {bound} 时 τ={tau:.4f}")
        flags.append("loop-bound")

    scale = 1
    while scale < 2 * g.m:
        scale *= 2
    projected = _project(lifted, instance, F, scale, network)
    rounded, report = round_with_report(RoundingTask(instance, projected / scale, 1.0 / scale), network)
    final, paths = _augment_to_target(instance, np.rint(rounded.values), F, network)
    if paths > 1:
        flags.append("multiple-augmenting-paths")
    flow = FlowAssignment(final.astype(np.float64), instance, tuple(flags))
    result = MaxFlowResult(flow, F, iterations, steps, boosts, bound, eta, delta_hat, tau, paths,
                           report.orientation_calls, network.ledger.rounds_charged - start, flags)
    logger.info(f"最大流完成: 流值 {F}, 迭代 {iterations} 次（增广 {steps}，提升 {boosts}），"
                f"增广路 {paths} 条, {result.rounds} 轮")
    return result


def max_flow_value(instance: FlowInstance, network: Optional[CliqueNetwork] = None,
                   config: Optional[Dict[str, Any]] = None, r: float = 1.0) -> MaxFlowResult:
    """
    二分搜索最大可行流值

    上界取 n·U、s 的出容量与 t 的入容量中的最小者。
    """
    if network is None:
        network = CliqueNetwork(max(instance.n, 1))
    g = instance.graph
    caps = instance.capacities
    hi = min(instance.n * instance.U, int(caps[g.tails == instance.s].sum()),
             int(caps[g.heads == instance.t].sum()))
    best = MaxFlowResult(FlowAssignment(np.zeros(g.m), instance), 0)
    lo = 0
    while lo < hi:
        mid = (lo + hi + 1) // 2
        try:
            best = max_flow(instance, mid, network, config, r)
            lo = mid
        except Infeasible:
            hi = mid - 1
    best.rounds = network.ledger.rounds_charged
    logger.info(f"最大流值为 {lo}")
    return best
