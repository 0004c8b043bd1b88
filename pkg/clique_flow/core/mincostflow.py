# -*- coding: utf-8 -*-
"""
单位容量最小费用流

原图先补上辅助顶点 v_aux，使每条边流量取 1/2 时恰好满足需求；再把每条边 (u,v) 变成一个 Q 侧顶点 e_uv，
得到二部 b-匹配问题。内点法在二部图上逐步降低对偶间隙，期间用额外的星形顶点 v₀ 参与电流求解；
结束后截断、取整得到部分匹配，消去负环，最后用最短增广路补全匹配并映射回原图。
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import networkx as nx
import numpy as np

from ..config import settings
from .chebyshev import solve_distributed
from .errors import (CannotCertify, CliqueFlowError, Infeasible, InteriorViolated, NoAugmentingPath,
                     NoConvergence, NonHalfIntegralT, RangeMismatch, SolverFailure, ValidationError)
from .models import DemandVector, FlowAssignment, FlowInstance, WeightedGraph
from .rounding import RoundingTask, round_with_report
from .simulator import CliqueNetwork

logger = logging.getLogger(__name__)


@dataclass
class McfState:
    """
    二部图上的内点法状态

    顶点编号：P 侧为原图顶点 0..n0−1 与 v_aux = n0，Q 侧为 n_p + k（k 为扩展图的边号），
    v₀ 只在电流求解时临时追加在最后。二部图的边 k 为 (u_k, e_k)，边 m1 + k 为 (v_k, e_k)，方向都从 P 指向 Q。

    参数:
        n0 / m0: 原图的顶点数与边数
        g1_tails / g1_heads / g1_costs: 补上辅助边后的扩展图
        tails / heads / cost: 二部图的边
        b: 每个顶点要匹配的次数
        f / s / nu / y: 原始变量、松弛、权重与对偶变量
    """
    n0: int
    m0: int
    g1_tails: np.ndarray
    g1_heads: np.ndarray
    g1_costs: np.ndarray
    tails: np.ndarray
    heads: np.ndarray
    cost: np.ndarray
    b: np.ndarray
    f: np.ndarray
    s: np.ndarray
    nu: np.ndarray
    y: np.ndarray
    mu_hat: float
    c_rho: float
    c_T: float
    eta: float
    rho: np.ndarray = field(default_factory=lambda: np.zeros(0))
    star_weights: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def n_p(self) -> int:
        return self.n0 + 1

    @property
    def aux(self) -> int:
        return self.n0

    @property
    def m1(self) -> int:
        return len(self.g1_tails)

    @property
    def m(self) -> int:
        return len(self.tails)

    @property
    def n_vertices(self) -> int:
        return self.n_p + self.m1

    @property
    def v0(self) -> int:
        return self.n_vertices

    def partner(self) -> np.ndarray:
        """每条边在同一个 Q 顶点上的另一条边"""
        return (np.arange(self.m) + self.m1) % self.m

    def demand(self) -> np.ndarray:
        """流入 − 流出形式的需求：P 侧送出 b，Q 侧各收 1"""
        d = np.zeros(self.n_vertices)
        d[: self.n_p] = -self.b[: self.n_p]
        d[self.n_p:] = 1.0
        return d

    def residue(self, values: np.ndarray) -> np.ndarray:
        return (np.bincount(self.heads, weights=values, minlength=self.n_vertices)
                - np.bincount(self.tails, weights=values, minlength=self.n_vertices))

    def duality_measure(self) -> float:
        return float(np.sum(self.f * self.s) / np.sum(self.nu))


@dataclass
class ProgressStep:
    delta: float
    halvings: int
    rho_norm4: float
    mu_before: float
    mu_after: float
    damped: bool = False


@dataclass
class RepairOutcome:
    matching: np.ndarray
    iterations: int = 0
    cancelled_cycles: int = 0
    min_reduced_cost: float = 0.0
    rounding_calls: int = 0
    flags: List[str] = field(default_factory=list)


@dataclass
class MinCostFlowResult:
    flow: FlowAssignment
    value: int = 0
    cost: int = 0
    outer_iterations: int = 0
    inner_iterations: int = 0
    executed_outer: int = 0
    progress_steps: int = 0
    perturbations: int = 0
    perturbation_bound: float = 0.0
    repair_iterations: int = 0
    cancelled_cycles: int = 0
    min_reduced_cost: float = 0.0
    rounding_calls: int = 0
    mu_hat: float = 0.0
    rounds: int = 0
    flags: List[str] = field(default_factory=list)


def nu_norm(nu: np.ndarray, x: np.ndarray, p: float) -> float:
    """‖x‖_{ν,p} = (Σ ν_e |x_e|^p)^{1/p}"""
    return float(np.sum(nu * np.abs(x) ** p) ** (1.0 / p))


def _log2_w(W: int) -> float:
    return math.log2(max(W, 2))


def initialization(instance: FlowInstance, sigma: np.ndarray,
                   config: Optional[Dict[str, Any]] = None) -> McfState:
    """
    构造二部图并给出中心路径上的初始点

    参数:
        instance: 单位容量、非负整数费用的有向实例
        sigma: 流入 − 流出形式的需求

    返回:
        McfState: f = 1/2，y_P = ‖c‖∞，y_Q = 0
    """
    cfg = settings.merged(settings.MCF_CONFIG, config)
    g = instance.graph
    n0, m0 = g.n, g.m
    costs0 = (instance.costs if instance.costs is not None else np.zeros(m0, dtype=np.int64)).astype(np.float64)
    supply = -np.asarray(sigma, dtype=np.float64)
    in_deg = np.bincount(g.heads, minlength=n0).astype(np.float64)
    out_deg = np.bincount(g.tails, minlength=n0).astype(np.float64)
    twice_t = 2.0 * supply + in_deg - out_deg
    bad = np.flatnonzero(np.abs(twice_t - np.rint(twice_t)) > 1e-9)
    if len(bad):
        v = int(bad[0])
        logger.error(f"顶点 {v} 的 t(v) = {twice_t[v] / 2} 不是半整数")
        raise NonHalfIntegralT(v, float(twice_t[v] / 2))
    twice_t = np.rint(twice_t).astype(np.int64)

    aux = n0
    aux_cost = float(np.abs(costs0).sum()) + 1.0
    out_count = np.maximum(twice_t, 0)
    in_count = np.maximum(-twice_t, 0)
    vertices = np.arange(n0)
    aux_tails = np.concatenate([np.repeat(vertices, out_count), np.full(int(in_count.sum()), aux)])
    aux_heads = np.concatenate([np.full(int(out_count.sum()), aux), np.repeat(vertices, in_count)])
    g1_tails = np.concatenate([g.tails, aux_tails]).astype(np.int64)
    g1_heads = np.concatenate([g.heads, aux_heads]).astype(np.int64)
    g1_costs = np.concatenate([costs0, np.full(len(aux_tails), aux_cost)])
    m1 = len(g1_tails)
    n_p = n0 + 1

    q_ids = n_p + np.arange(m1)
    tails = np.concatenate([g1_tails, g1_heads])
    heads = np.concatenate([q_ids, q_ids])
    cost = np.concatenate([g1_costs, np.zeros(m1)])

    supply1 = np.append(supply, 0.0)
    in_deg1 = np.bincount(g1_heads, minlength=n_p).astype(np.float64)
    b = np.concatenate([supply1 + in_deg1, np.ones(m1)])

    c_inf = max(1.0, float(np.abs(cost).max()) if len(cost) else 1.0)
    y = np.concatenate([np.full(n_p, c_inf), np.zeros(m1)])
    f = np.full(len(tails), 0.5)
    s = cost + y[tails] - y[heads]
    nu = s / (2.0 * c_inf)

    log_w = _log2_w(instance.W)
    c_rho = float(cfg["c_rho_coeff"]) * log_w ** (1.0 / 3.0)
    c_T = float(cfg["c_t_coeff"]) * c_rho * log_w
    logger.debug(f"初始化完成: 辅助边 {len(aux_tails)} 条, |P|={n_p}, |Q|={m1}, ‖c‖∞={c_inf}")
    return McfState(n0, m0, g1_tails, g1_heads, g1_costs, tails, heads, cost, b, f, s, nu, y,
                    c_inf, c_rho, c_T, float(cfg["eta"]), np.zeros(len(tails)), np.zeros(n_p))


def set_star(state: McfState) -> None:
    """r_{v₀p} = m^{1+2η}/a(p)，a(p) 为 p 的各 Q 邻居上两条边的权重之和"""
    pair = state.nu + state.nu[state.partner()]
    a = np.bincount(state.tails, weights=pair, minlength=state.n_p)[: state.n_p]
    state.star_weights = a / state.m ** (1.0 + 2.0 * state.eta)


def _solve(state: McfState, resistances: np.ndarray, rhs: np.ndarray, network: CliqueNetwork,
           cfg: Dict[str, Any], r: float) -> np.ndarray:
    """在二部图加星形顶点 v₀ 上求解 Lφ = rhs，返回不含 v₀ 的势"""
    star = np.flatnonzero(state.star_weights > 0)
    tails = np.concatenate([state.tails, np.full(len(star), state.v0)])
    heads = np.concatenate([state.heads, star])
    weights = np.concatenate([1.0 / resistances, state.star_weights[star]])
    graph = WeightedGraph(state.n_vertices + 1, tails, heads, weights)
    unit = float(cfg["granularity_ratio"]) * float(weights.min())
    try:
        phi, _ = solve_distributed(graph, np.append(rhs, 0.0), float(cfg["solver_epsilon"]),
                                   network=network, r=r, granularity=unit, strict=False)
    except (NoConvergence, RangeMismatch, CannotCertify, np.linalg.LinAlgError, RuntimeError) as e:
        logger.error(f"电流求解失败: {e}")
        raise SolverFailure(str(e)) from e
    return phi[: state.n_vertices]


def congestion(state: McfState, network: CliqueNetwork, cfg: Dict[str, Any],
               r: float) -> Tuple[np.ndarray, np.ndarray]:
    """电阻 r = ν/f² 下路由需求的电流 f̂ 与势 φ̂，并更新 ρ = |f̂|/f"""
    resistances = state.nu / state.f ** 2
    phi = _solve(state, resistances, state.demand(), network, cfg, r)
    f_hat = (phi[state.heads] - phi[state.tails]) / resistances
    state.rho = np.abs(f_hat) / state.f
    return f_hat, phi


def perturbation(state: McfState, post_doubling: bool = False) -> None:
    """
    对每个 Q 顶点 v，取 ρ 较大的关联边 e（相等时取编号小者），ē 为另一条边：
    y_v −= s_e，于是 s_e 翻倍、s_ē 增加 s_e；ν_ē += ν_e·f_ē/f_e，ν_e 翻倍
    """
    first = np.arange(state.m1)
    second = first + state.m1
    rho = state.rho if len(state.rho) == state.m else np.zeros(state.m)
    e = np.where(rho[second] > rho[first], second, first)
    e_bar = np.where(e == first, second, first)
    q = state.heads[e]

    gap = state.s[e].copy()
    nu_e = state.nu[e].copy()
    state.y[q] -= gap
    state.s[e] += gap
    state.s[e_bar] += gap
    weight = 2.0 * nu_e if post_doubling else nu_e
    state.nu[e_bar] += weight * state.f[e_bar] / state.f[e]
    state.nu[e] = 2.0 * nu_e


def progress(state: McfState, network: CliqueNetwork, config: Optional[Dict[str, Any]] = None,
             r: float = 1.0) -> ProgressStep:
    """
    一次内点法进步步：预测步 (f', s') 后用第二次电流求解修正原始可行性

    预测步的松弛更新为 s' = s − κ·μ̂·(φ̂_head − φ̂_tail)，即势差乘以当前 μ̂ 后再扣除，
    y 同样加上 κ·μ̂·φ̂；这与只用 κ·∇φ̂ 的写法相差一个 μ̂ 因子。

    参数:
        state: 严格内点状态，原地更新
        network: 记账用的网络

    返回:
        ProgressStep: 步长 δ 与对偶间隙的变化
    """
    cfg = settings.merged(settings.MCF_CONFIG, config)
    mu_before = state.duality_measure()
    f, s = state.f, state.s
    f_hat, phi_hat = congestion(state, network, cfg, r)
    norm4 = nu_norm(state.nu, state.rho, 4.0)
    delta = min(1.0 / (8.0 * norm4), 0.125) if norm4 > 0 else 0.125
    grad_hat = phi_hat[state.heads] - phi_hat[state.tails]

    halvings = 0
    while True:
        kappa = delta / (1.0 - delta)
        f1 = (1.0 - delta) * f + delta * f_hat
        # 势差按 μ̂ 缩放到与 s 同量纲，精确中心性下等价于取电阻 s/f
        s1 = s - kappa * state.mu_hat * grad_hat
        if np.all(f1 > 0) and np.all(s1 > 0):
            break
        halvings += 1
        if halvings > int(cfg["step_halving_tries"]):
            e = int(np.flatnonzero((f1 <= 0) | (s1 <= 0))[0])
            logger.error(f"进步步在 δ 折半 {halvings - 1} 次后仍离开内点: 边 {e}")
            raise InteriorViolated(e, "progress predictor")
        delta /= 2.0

    f_sharp = (1.0 - delta) * f * s / s1
    sigma2 = state.residue(f1 - f_sharp)
    resist2 = s1 ** 2 / ((1.0 - delta) * f * s)
    phi2 = _solve(state, resist2, sigma2, network, cfg, r)
    f_tilde = (phi2[state.heads] - phi2[state.tails]) / resist2

    damped = False
    theta = 1.0
    for _ in range(int(cfg["step_halving_tries"]) + 1):
        f_new = f_sharp + theta * f_tilde
        s_new = s1 - theta * s1 * f_tilde / f_sharp
        if np.all(f_new > 0) and np.all(s_new > 0):
            break
        damped = True
        theta /= 2.0
    else:
        logger.error("修正步无法保持在内点")
        raise InteriorViolated(None, "progress corrector")

    state.y = state.y + kappa * state.mu_hat * phi_hat + theta * phi2
    state.f, state.s = f_new, s_new
    state.mu_hat = state.duality_measure()
    network.exchange("mcf/progress", state.m)
    return ProgressStep(delta, halvings, norm4, mu_before, state.mu_hat, damped)


def _hop_relax(n: int, arc_from: np.ndarray, arc_to: np.ndarray, weight: np.ndarray,
               sources: np.ndarray, network: CliqueNetwork, phase: str) -> Tuple[np.ndarray, np.ndarray]:
    """
    同步 Bellman–Ford：每轮所有顶点用上一轮的距离松弛出边，每轮计 1 轮通信

    返回:
        (D, parent): 不可达为 inf；parent 为到达该顶点的弧编号，源点为 −1
    """
    dist = np.full(n, np.inf)
    dist[sources] = 0.0
    parent = np.full(n, -1, dtype=np.int64)
    for _ in range(n + 1):
        network.exchange(phase, len(arc_from))
        candidate = dist[arc_from] + weight
        better = np.flatnonzero(candidate < dist[arc_to])
        if len(better) == 0:
            return dist, parent
        order = np.lexsort((better, candidate[better], arc_to[better]))
        better = better[order]
        dest = arc_to[better]
        first = np.r_[True, dest[1:] != dest[:-1]]
        better = better[first]
        dist[arc_to[better]] = candidate[better]
        parent[arc_to[better]] = better
    logger.error("松弛 n+1 轮后距离仍在下降，残量图中存在负环")
    raise CliqueFlowError("最短路松弛未收敛")


def _residual_arcs(state: McfState, matching: np.ndarray,
                   weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """未匹配边 P→Q 权重为 w，匹配边反向 Q→P 权重为 −w；弧编号与边编号一致"""
    free = matching == 0
    arc_from = np.where(free, state.tails, state.heads)
    arc_to = np.where(free, state.heads, state.tails)
    return arc_from, arc_to, np.where(free, weights, -weights)


def _round_matching(state: McfState, network: CliqueNetwork) -> Tuple[np.ndarray, int]:
    """截断到 b^≤ = min(b, b⁺)，按 Δ 向下取整，再在加了 s、t 的网络上做流取整"""
    n = state.n_vertices
    f = np.maximum(state.f, 0.0)
    load = np.bincount(state.tails, weights=f, minlength=n)
    b_le = np.minimum(state.b, load)
    shrink = np.where(load > b_le, b_le / np.where(load > 0, load, 1.0), 1.0)
    f = f * shrink[state.tails]
    load = np.bincount(state.heads, weights=f, minlength=n)
    b_le = np.minimum(state.b, load)
    shrink = np.where(load > b_le, b_le / np.where(load > 0, load, 1.0), 1.0)
    f = f * shrink[state.heads]

    scale = 1
    while scale < 2 * state.m:
        scale *= 2
    units = np.floor(f * scale + 1e-9)
    values = units / scale
    src, snk = n, n + 1
    p_ids = np.arange(state.n_p)
    q_ids = state.n_p + np.arange(state.m1)
    tails = np.concatenate([state.tails, np.full(state.n_p, src), q_ids])
    heads = np.concatenate([state.heads, p_ids, np.full(state.m1, snk)])
    caps = np.concatenate([np.ones(state.m), state.b[: state.n_p], np.ones(state.m1)])
    flows = np.concatenate([values,
                            np.bincount(state.tails, weights=values, minlength=n)[: state.n_p],
                            np.bincount(state.heads, weights=values, minlength=n)[state.n_p:]])
    costs = np.concatenate([state.cost, np.zeros(state.n_p + state.m1)])
    graph = WeightedGraph(n + 2, tails, heads, np.ones(len(tails)), directed=True)
    instance = FlowInstance(graph, np.rint(caps), costs, s=src, t=snk, kind="min")
    sub = CliqueNetwork(n + 2, config={"words_per_message": network.B, "route_rounds": network.route_rounds})
    rounded, report = round_with_report(RoundingTask(instance, flows, 1.0 / scale), sub)
    network.ledger.merge(sub.ledger)
    return np.rint(rounded.values[: state.m]).astype(np.int64), report.orientation_calls


def _negative_cycle_arcs(n: int, arc_from: np.ndarray, arc_to: np.ndarray, weight: np.ndarray) -> List[int]:
    """
    逐弧 Bellman–Ford（所有顶点初始距离为 0），第 n 遍仍能松弛的顶点沿父指针回退 n 步必落在负环上

    返回:
        List[int]: 负环上的弧编号；不存在负环时抛出 CliqueFlowError
    """
    dist = np.zeros(n)
    parent = np.full(n, -1, dtype=np.int64)
    relaxed = -1
    for _ in range(n + 1):
        relaxed = -1
        for arc in range(len(arc_from)):
            u, v = int(arc_from[arc]), int(arc_to[arc])
            if dist[u] + weight[arc] < dist[v]:
                dist[v] = dist[u] + weight[arc]
                parent[v] = arc
                relaxed = v
        if relaxed < 0:
            break
    if relaxed < 0:
        raise CliqueFlowError("残量图中没有负环")

    x = relaxed
    for _ in range(n):
        if parent[x] < 0:
            raise CliqueFlowError("负环回溯失败")
        x = int(arc_from[parent[x]])
    arcs = []
    v = x
    while True:
        arc = int(parent[v])
        arcs.append(arc)
        v = int(arc_from[arc])
        if v == x:
            break
    if float(weight[arcs].sum()) >= 0:
        logger.error(f"父指针回溯得到的环权重非负: {float(weight[arcs].sum())}")
        raise CliqueFlowError("负环回溯失败")
    return arcs[::-1]


def _cancel_negative_cycles(state: McfState, matching: np.ndarray, network: CliqueNetwork) -> int:
    """反复在残量图上找负环并沿环交换匹配，直到当前匹配在同样的度数下费用最小"""
    cancelled = 0
    n = state.n_vertices
    while True:
        arc_from, arc_to, weight = _residual_arcs(state, matching, state.cost)
        digraph = nx.DiGraph()
        digraph.add_nodes_from(range(n + 1))
        for arc in range(state.m):
            digraph.add_edge(int(arc_from[arc]), int(arc_to[arc]), weight=float(weight[arc]), arc=arc)
        digraph.add_edges_from((n, v, {"weight": 0.0, "arc": -1}) for v in range(n))
        network.charge("mcf/repair-cycles", n)
        if not nx.negative_edge_cycle(digraph):
            return cancelled
        try:
            cycle = nx.find_negative_cycle(digraph, n)
            arcs = [digraph[u][v]["arc"] for u, v in zip(cycle[:-1], cycle[1:])]
        except nx.NetworkXError as exc:
            logger.debug(f"networkx 未能给出负环（{exc}），改用父指针回溯")
            arcs = _negative_cycle_arcs(n, arc_from, arc_to, weight)
        matching[arcs] ^= 1
        cancelled += 1
        logger.debug(f"消去第 {cancelled} 个负环，长度 {len(arcs)}")


def repairing(state: McfState, network: CliqueNetwork,
              config: Optional[Dict[str, Any]] = None) -> RepairOutcome:
    """
    把内点法的分数解修复为最小费用的完美 b-匹配

    参数:
        state: 内点法结束时的状态
        network: 记账用的网络

    返回:
        RepairOutcome: 二部图每条边是否匹配以及修复统计；无增广路时抛出 NoAugmentingPath
    """
    cfg = settings.merged(settings.MCF_CONFIG, config)
    n = state.n_vertices
    is_p = np.arange(n) < state.n_p
    target = np.rint(state.b).astype(np.int64)
    matching, rounding_calls = _round_matching(state, network)
    outcome = RepairOutcome(matching, rounding_calls=rounding_calls)

    outcome.cancelled_cycles = _cancel_negative_cycles(state, matching, network)
    if outcome.cancelled_cycles:
        outcome.flags.append("cancelled-negative-cycles")

    arc_from, arc_to, weight = _residual_arcs(state, matching, state.cost)
    dist, _ = _hop_relax(n, arc_from, arc_to, weight, np.ones(n, dtype=bool), network, "mcf/repair-potentials")
    y = np.where(is_p, -dist, dist)

    log_m = math.log2(max(state.m, 2))
    cap = float(cfg["c_repair"]) * state.m ** (3.0 / 7.0) * log_m ** 2
    best = np.inf
    while True:
        degree = (np.bincount(state.tails, weights=matching, minlength=n)
                  + np.bincount(state.heads, weights=matching, minlength=n)).astype(np.int64)
        deficit = degree < target
        sources = deficit & is_p
        targets = deficit & ~is_p
        if not targets.any():
            break
        reduced = state.cost - y[state.tails] - y[state.heads]
        arc_from, arc_to, weight = _residual_arcs(state, matching, reduced)
        dist, parent = _hop_relax(n, arc_from, arc_to, weight, sources, network, "mcf/repair-shortest-path")
        reachable = np.isfinite(dist)
        live = reachable[arc_from]
        if live.any():
            worst = float(weight[live].min())
            best = min(best, worst)
            if worst < -1e-9:
                logger.error(f"可达边的约化费用为负: {worst}")
                raise CliqueFlowError(f"可达边的约化费用为负: {worst}")
        candidates = np.flatnonzero(targets & reachable)
        if len(candidates) == 0:
            logger.error(f"还有 {int(targets.sum())} 个 Q 顶点未匹配，但不存在增广路")
            raise NoAugmentingPath(f"修复阶段找不到增广路，剩余 {int(targets.sum())} 个未匹配顶点")
        end = int(candidates[np.argmin(dist[candidates])])
        capped = np.where(reachable, dist, dist[reachable].max())
        y = np.where(is_p, y - capped, y + capped)

        path = []
        v = end
        while parent[v] != -1:
            path.append(int(parent[v]))
            v = int(arc_from[parent[v]])
        matching[path] ^= 1
        network.exchange("mcf/repair-augment", len(path))
        outcome.iterations += 1

    outcome.min_reduced_cost = 0.0 if best == np.inf else best
    if outcome.iterations > cap:
        logger.warning(f"修复阶段迭代 {outcome.iterations} 次，超过 {cap:.1f}")
        outcome.flags.append("repair-iterations-exceeded")
    state.y = y
    outcome.matching = matching
    return outcome


def _validate(instance: FlowInstance) -> None:
    if instance.m and np.any(instance.capacities != 1):
        raise ValidationError("最小费用流只支持单位容量")
    if instance.costs is not None and np.any(instance.costs < 0):
        raise ValidationError("最小费用流只支持非负费用")


def min_cost_flow(instance: FlowInstance, sigma: Optional[DemandVector] = None,
                  network: Optional[CliqueNetwork] = None, config: Optional[Dict[str, Any]] = None,
                  r: float = 1.0) -> MinCostFlowResult:
    """
    求满足需求 σ 的最小费用整数流

    参数:
        instance: 单位容量、非负整数费用的有向实例
        sigma: 需求向量，缺省取实例自带的需求
        network: 记账用的网络，缺省新建
        config: 覆盖 MCF_CONFIG
        r: 拉普拉斯求解器的折中参数

    返回:
        MinCostFlowResult: 整数流及内点法、修复阶段的统计；不可行时抛出 Infeasible
    """
    cfg = settings.merged(settings.MCF_CONFIG, config)
    _validate(instance)
    if sigma is None:
        if instance.demand is None:
            raise ValidationError("没有给出需求向量")
        sigma = instance.demand
    if sigma.n != instance.n:
        raise ValidationError("需求向量长度与顶点数不一致")
    if network is None:
        network = CliqueNetwork(max(instance.n, 1))
    start = network.ledger.rounds_charged
    g = instance.graph
    if not np.any(sigma.values):
        return MinCostFlowResult(FlowAssignment(np.zeros(g.m), instance))

    state = initialization(instance, sigma.values, cfg)
    m = state.m
    outer = int(math.ceil(state.c_T * m ** (0.5 - 3.0 * state.eta)))
    inner = int(math.ceil(m ** (2.0 * state.eta)))
    threshold = state.c_rho * m ** (0.5 - state.eta)
    stop = float(cfg["mu_stop"]) / m
    max_steps = int(cfg["max_progress_steps"])
    post = bool(cfg["perturbation_post_doubling"])
    flags: List[str] = []
    logger.info(f"最小费用流内点法开始: |E|={m}, 外层 {outer} 次 × 内层 {inner} 次, μ̂={state.mu_hat:.4g}")

    steps = perturbations = executed = 0
    finished = False
    for _ in range(outer):
        executed += 1
        set_star(state)
        network.exchange("mcf/star", state.n_p)
        for _ in range(inner):
            rounds = 0
            while nu_norm(state.nu, state.rho, 3.0) > threshold and rounds < int(cfg["max_perturbations"]):
                perturbation(state, post)
                network.exchange("mcf/perturbation", state.m1)
                congestion(state, network, cfg, r)
                rounds += 1
            perturbations += rounds
            step = progress(state, network, cfg, r)
            steps += 1
            if step.damped and "progress-damped" not in flags:
                flags.append("progress-damped")
            if state.mu_hat <= stop:
                finished = True
                break
            if steps >= max_steps:
                logger.warning(f"进步步达到上限 {max_steps}，μ̂={state.mu_hat:.4g}")
                flags.append("progress-step-cap")
                finished = True
                break
        if finished:
            break

    bound = float(cfg["c_trigger"]) * m ** (3.0 / 7.0) * _log2_w(instance.W) ** 3
    if perturbations > bound:
        flags.append("perturbation-bound")
    logger.info(f"内点法结束: 外层执行 {executed} 次, 进步步 {steps} 次, 扰动 {perturbations} 次, μ̂={state.mu_hat:.4g}")

    outcome = repairing(state, network, cfg)
    flags.extend(outcome.flags)
    matching = outcome.matching
    if np.any(matching[state.m0: state.m1]):
        logger.error("最优解使用了辅助边，需求无法满足")
        raise Infeasible("需求向量在单位容量下不可行")
    values = matching[: state.m0].astype(np.float64)
    flow = FlowAssignment(values, instance, tuple(flags))
    if not np.array_equal(flow.net_inflow(), sigma.values.astype(np.float64)):
        logger.error("修复后的流没有精确满足需求")
        raise CliqueFlowError("修复后的流没有精确满足需求")

    cost = int(round(flow.cost()))
    result = MinCostFlowResult(flow, int(np.sum(np.maximum(-sigma.values, 0))), cost, outer, inner, executed,
                               steps, perturbations, bound, outcome.iterations, outcome.cancelled_cycles,
                               outcome.min_reduced_cost, outcome.rounding_calls, state.mu_hat,
                               network.ledger.rounds_charged - start, flags)
    logger.info(f"最小费用流完成: 费用 {cost}, 修复迭代 {outcome.iterations} 次, {result.rounds} 轮")
    return result


def min_cost_max_st_flow(instance: FlowInstance, network: Optional[CliqueNetwork] = None,
                         config: Optional[Dict[str, Any]] = None, r: float = 1.0) -> MinCostFlowResult:
    """二分搜索最大的可行 s-t 流值，返回该流值下的最小费用流"""
    if instance.s is None:
        raise ValidationError("需要 s-t 形式的实例")
    _validate(instance)
    if network is None:
        network = CliqueNetwork(max(instance.n, 1))
    g = instance.graph
    hi = min(int(np.sum(g.tails == instance.s)), int(np.sum(g.heads == instance.t)))
    best = MinCostFlowResult(FlowAssignment(np.zeros(g.m), instance))
    lo = 0
    while lo < hi:
        mid = (lo + hi + 1) // 2
        try:
            best = min_cost_flow(instance, DemandVector.st(instance.n, instance.s, instance.t, mid),
                                 network, config, r)
            lo = mid
        except Infeasible:
            hi = mid - 1
    if best.value != lo:
        best = min_cost_flow(instance, DemandVector.st(instance.n, instance.s, instance.t, lo),
                             network, config, r)
    best.rounds = network.ledger.rounds_charged
    logger.info(f"最小费用最大流: 流值 {lo}, 费用 {best.cost}")
    return best
