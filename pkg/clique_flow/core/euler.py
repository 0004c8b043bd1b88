# -*- coding: utf-8 -*-
"""
确定性欧拉定向

每个顶点把关联边按编号排序后两两配对，得到一组边不相交的隐式环。配对出的每一对边在协议中是一个
令牌：令牌两侧（0 号槽和 1 号槽）各连着一个虚拟邻居。反复 3 染色、求极大匹配、剪除未标记令牌，
⌈log₂ n⌉ 轮后每个环只剩少数令牌，由编号最大的令牌选定方向，再按层倒序把方向传回被剪除的令牌。

带费用时，每条虚拟链路记录沿它离开本令牌的有符号费用，领头令牌选择正向费用不大于反向费用的方向。
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..config import settings
from .errors import CliqueFlowError, DimensionMismatch, OddDegree
from .models import WeightedGraph
from .simulator import CliqueNetwork, RoundLedger, deliver

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CyclePairing:
    """
    每个顶点上关联边的完美配对

    参数:
        node: 第 k 个令牌所在的顶点，令牌按 (顶点, 槽位) 编号
        slots: 形状 (T, 2)，令牌两个槽位上的边编号，slots[k, 0] < slots[k, 1]
    """
    node: np.ndarray
    slots: np.ndarray

    @property
    def tokens(self) -> int:
        return len(self.node)

    def pairs_at(self, v: int) -> List[Tuple[int, int]]:
        idx = np.flatnonzero(self.node == v)
        return [(int(self.slots[k, 0]), int(self.slots[k, 1])) for k in idx]

    def cycles(self, g: WeightedGraph) -> List[List[int]]:
        """展开配对定义的环，每个环是按走向排列的边编号列表"""
        owner = {}
        for k in range(self.tokens):
            for side in (0, 1):
                owner[(int(self.node[k]), int(self.slots[k, side]))] = (k, side)
        seen = np.zeros(self.tokens, dtype=bool)
        result = []
        for start in range(self.tokens):
            if seen[start]:
                continue
            walk = []
            k, side = start, 1
            while not seen[k]:
                seen[k] = True
                e = int(self.slots[k, side])
                walk.append(e)
                v = int(self.node[k])
                other = int(g.heads[e]) if int(g.tails[e]) == v else int(g.tails[e])
                k, arrive = owner[(other, e)]
                side = 1 - arrive
            result.append(walk)
        return result


@dataclass
class CycleTokens:
    """
    令牌协议的全部状态，按令牌编号向量化存放

    nbr[k, s] / back[k, s]: 从 k 的 s 侧出发到达的令牌，以及到达时所在的那一侧
    cost[k, s]: 沿 s 侧离开 k 走到 nbr[k, s] 的有符号费用，满足 cost[k, s] = −cost[nbr, back]
    active: 尚未被剪除
    levels: 每次收缩前的链路快照及本次被剪除的令牌，供倒序传播方向使用
    """
    node: np.ndarray
    slots: np.ndarray
    nbr: np.ndarray
    back: np.ndarray
    cost: np.ndarray
    active: np.ndarray
    levels: List[Tuple[np.ndarray, np.ndarray, np.ndarray]] = field(default_factory=list)

    @property
    def tokens(self) -> int:
        return len(self.node)

    def kinds(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """活跃令牌按所在环的长度分为单令牌环、双令牌环和长度不小于 3 的环"""
        ids = np.arange(self.tokens)
        single = self.active & (self.nbr[:, 0] == ids)
        pair = self.active & ~single & (self.nbr[:, 0] == self.nbr[:, 1])
        ring = self.active & ~single & ~pair
        return single, pair, ring


@dataclass(frozen=True)
class CycleRecord:
    leader: int
    survivors: int
    forward_side: int
    chosen_cost: float
    reverse_cost: float


@dataclass(frozen=True, eq=False)
class Orientation:
    """
    定向结果

    参数:
        direction: +1 表示沿给定方向（tail→head），−1 表示反向
        cycles: 每个环一条领头记录
        iterations: 收缩轮数，恒为 ⌈log₂ n⌉
        active_counts: 每次收缩前后的活跃令牌数
    """
    direction: np.ndarray
    cycles: List[CycleRecord] = field(default_factory=list)
    iterations: int = 0
    active_counts: List[int] = field(default_factory=list)

    def oriented_ends(self, g: WeightedGraph) -> Tuple[np.ndarray, np.ndarray]:
        """定向后每条边的 (起点, 终点)"""
        forward = self.direction > 0
        return np.where(forward, g.tails, g.heads), np.where(forward, g.heads, g.tails)

    def is_balanced(self, g: WeightedGraph) -> bool:
        src, dst = self.oriented_ends(g)
        return bool(np.array_equal(np.bincount(src, minlength=g.n), np.bincount(dst, minlength=g.n)))


def pair_locally(g: WeightedGraph) -> CyclePairing:
    """
    每个顶点把关联边按编号排序、相邻两条配成一对

    参数:
        g: 无向多重图（有向图忽略方向）

    返回:
        CyclePairing: 令牌按 (顶点, 槽位) 编号
    """
    degree = g.degrees()
    odd = np.flatnonzero(degree % 2 == 1)
    if len(odd):
        v = int(odd[0])
        logger.error(f"顶点 {v} 度数为奇数，无法配对")
        raise OddDegree(v, int(degree[v]))
    ends_v = np.concatenate([g.tails, g.heads])
    ends_e = np.concatenate([np.arange(g.m), np.arange(g.m)])
    order = np.lexsort((ends_e, ends_v))
    node = ends_v[order][0::2]
    slots = ends_e[order].reshape(-1, 2)
    return CyclePairing(node.astype(np.int64), slots.astype(np.int64))


def build_tokens(g: WeightedGraph, pairing: CyclePairing, costs: Optional[np.ndarray] = None) -> CycleTokens:
    """由配对构造初始令牌环，每条原始边是一条虚拟链路"""
    T = pairing.tokens
    m = g.m
    ends_v = np.concatenate([g.tails, g.heads])
    ends_e = np.concatenate([np.arange(m), np.arange(m)])
    order = np.lexsort((ends_e, ends_v))
    position = np.empty(2 * m, dtype=np.int64)
    position[order] = np.arange(2 * m)
    tail_pos, head_pos = position[:m], position[m:]

    nbr = np.empty((T, 2), dtype=np.int64)
    back = np.empty((T, 2), dtype=np.int64)
    cost = np.zeros((T, 2), dtype=np.float64)
    nbr[tail_pos // 2, tail_pos % 2] = head_pos // 2
    back[tail_pos // 2, tail_pos % 2] = head_pos % 2
    nbr[head_pos // 2, head_pos % 2] = tail_pos // 2
    back[head_pos // 2, head_pos % 2] = tail_pos % 2
    if costs is not None:
        cost[tail_pos // 2, tail_pos % 2] = costs
        cost[head_pos // 2, head_pos % 2] = -costs
    return CycleTokens(pairing.node, pairing.slots, nbr, back, cost, np.ones(T, dtype=bool))


def _route(network: CliqueNetwork, state: CycleTokens, senders: np.ndarray, receivers: np.ndarray,
           phase: str, words: int = 1) -> int:
    """令牌间的一步通信，同一顶点上的令牌之间不经过网络"""
    src = state.node[senders]
    dst = state.node[receivers]
    remote = src != dst
    return deliver(network, src[remote], dst[remote], phase, words)


def _lowest_bit(x: np.ndarray) -> np.ndarray:
    low = x & -x
    return np.rint(np.log2(low)).astype(np.int64)


def _palette_step(palette: int) -> int:
    bits = max(1, int(palette - 1).bit_length())
    return bits * (2 * bits + 1)


def color3(state: CycleTokens, network: CliqueNetwork) -> np.ndarray:
    """
    长度不小于 3 的环上的确定性 3 染色

    初始颜色为令牌编号。每步每个令牌与两侧邻居分别比较最低的不同位 i，得到 2i + 自己的第 i 位，
    两个结果组成无序对作为新颜色；相邻令牌的无序对必不相同。调色板不再缩小后，逐个颜色类改成
    {0, 1, 2} 中邻居未用的最小颜色。

    返回:
        np.ndarray: 每个令牌的颜色，非环上令牌为 −1
    """
    _, _, ring = state.kinds()
    ids = np.flatnonzero(ring)
    colors = np.full(state.tokens, -1, dtype=np.int64)
    if len(ids) == 0:
        return colors
    colors[ids] = ids
    left = state.nbr[ids, 0]
    right = state.nbr[ids, 1]
    senders = np.concatenate([ids, ids])
    receivers = np.concatenate([left, right])

    palette = state.tokens
    steps = 0
    while True:
        nxt = _palette_step(palette)
        if nxt >= palette:
            break
        _route(network, state, senders, receivers, "euler/color")
        own = colors[ids]
        picks = []
        for other in (colors[left], colors[right]):
            i = _lowest_bit(own ^ other)
            picks.append(2 * i + ((own >> i) & 1))
        lo = np.minimum(picks[0], picks[1])
        hi = np.maximum(picks[0], picks[1])
        colors[ids] = hi * (hi + 1) // 2 + lo
        palette = nxt
        steps += 1

    for c in range(palette - 1, 2, -1):
        members = ids[colors[ids] == c]
        _route(network, state, np.concatenate([members, members]),
               np.concatenate([state.nbr[members, 0], state.nbr[members, 1]]), "euler/color")
        if len(members) == 0:
            continue
        a = colors[state.nbr[members, 0]]
        b = colors[state.nbr[members, 1]]
        choice = np.where((a != 0) & (b != 0), 0, np.where((a != 1) & (b != 1), 1, 2))
        colors[members] = choice
        steps += 1
    logger.debug(f"3 染色完成: {len(ids)} 个令牌, {steps} 步")
    return colors


def _maximal_matching(state: CycleTokens, colors: np.ndarray, network: CliqueNetwork) -> np.ndarray:
    """按颜色类依次提议，每类两个子步；被多方提议时接受编号最小者"""
    _, pair, ring = state.kinds()
    partner = np.full(state.tokens, -1, dtype=np.int64)
    paired = np.flatnonzero(pair)
    partner[paired] = state.nbr[paired, 0]

    for c in range(3):
        for _ in range(2):
            proposers = np.flatnonzero(ring & (colors == c) & (partner < 0))
            left = state.nbr[proposers, 0]
            right = state.nbr[proposers, 1]
            target = np.where(partner[left] < 0, left, np.where(partner[right] < 0, right, -1))
            proposers, target = proposers[target >= 0], target[target >= 0]
            _route(network, state, proposers, target, "euler/match")
            order = np.lexsort((proposers, target))
            proposers, target = proposers[order], target[order]
            first = np.r_[True, target[1:] != target[:-1]] if len(target) else np.zeros(0, dtype=bool)
            accepted_from, accepted_by = proposers[first], target[first]
            _route(network, state, accepted_by, accepted_from, "euler/match")
            partner[accepted_from] = accepted_by
            partner[accepted_by] = accepted_from
            matched = np.concatenate([accepted_from, accepted_by])
            _route(network, state, np.concatenate([matched, matched]),
                   np.concatenate([state.nbr[matched, 0], state.nbr[matched, 1]]), "euler/match")
    return partner


def contract_once(state: CycleTokens, network: CliqueNetwork,
                  config: Optional[Dict[str, Any]] = None) -> CycleTokens:
    """
    一次收缩：极大匹配中每对保留编号较大的令牌，其余令牌被剪除

    被保留的令牌沿两侧各发出 (来源, 来源侧, 累计费用)，被剪除的令牌把消息从另一侧转发出去并累加
    链路费用；标记令牌之间至多隔 3 个未标记令牌，消息至多走 4 跳。
    """
    cfg = settings.merged(settings.EULER_CONFIG, config)
    max_hops = int(cfg["max_splice_hops"])
    _, pair, ring = state.kinds()
    if not np.any(pair | ring):
        state.levels.append((state.nbr.copy(), state.back.copy(), np.zeros(state.tokens, dtype=bool)))
        return state

    colors = color3(state, network)
    partner = _maximal_matching(state, colors, network)
    ids = np.arange(state.tokens)
    participating = pair | ring
    marked = participating & (partner >= 0) & (ids > partner)
    removed = participating & ~marked
    state.levels.append((state.nbr.copy(), state.back.copy(), removed))

    survivors = np.flatnonzero(marked)
    origin = np.concatenate([survivors, survivors])
    origin_side = np.repeat([0, 1], len(survivors))
    holder = origin.copy()
    arrive = state.back[origin, origin_side]
    current = state.nbr[origin, origin_side]
    acc = state.cost[origin, origin_side].copy()
    nbr, back, cost = state.nbr.copy(), state.back.copy(), state.cost.copy()

    hops = 0
    while len(origin):
        if hops == max_hops:
            logger.error(f"剪除消息在 {max_hops} 跳内未到达下一个标记令牌")
            raise CliqueFlowError(f"环上出现超过 {max_hops - 1} 个连续未标记令牌")
        _route(network, state, holder, current, "euler/splice", words=3)
        hops += 1
        done = marked[current]
        d_cur, d_arr = current[done], arrive[done]
        nbr[d_cur, d_arr] = origin[done]
        back[d_cur, d_arr] = origin_side[done]
        cost[d_cur, d_arr] = -acc[done]
        keep = ~done
        origin, origin_side = origin[keep], origin_side[keep]
        holder, current, arrive, acc = current[keep], current[keep], arrive[keep], acc[keep]
        out = 1 - arrive
        acc = acc + state.cost[holder, out]
        current = state.nbr[holder, out]
        arrive = state.back[holder, out]

    state.nbr, state.back, state.cost = nbr, back, cost
    state.active = state.active & ~removed
    return state


def _leader_phase(state: CycleTokens, network: CliqueNetwork,
                  out_side: np.ndarray) -> List[CycleRecord]:
    """每个幸存令牌的消息绕环一周，回到起点时得知环的总费用和最大令牌编号"""
    survivors = np.flatnonzero(state.active)
    origin = survivors.copy()
    holder = survivors.copy()
    current = state.nbr[survivors, 1]
    arrive = state.back[survivors, 1]
    acc = state.cost[survivors, 1].copy()
    top = survivors.copy()
    total = np.zeros(state.tokens, dtype=np.float64)
    leader_of = np.full(state.tokens, -1, dtype=np.int64)

    while len(origin):
        _route(network, state, holder, current, "euler/leader", words=3)
        top = np.maximum(top, current)
        done = current == origin
        total[origin[done]] = acc[done]
        leader_of[origin[done]] = top[done]
        keep = ~done
        origin, top = origin[keep], top[keep]
        holder, current, arrive, acc = current[keep], current[keep], arrive[keep], acc[keep]
        out = 1 - arrive
        acc = acc + state.cost[holder, out]
        current = state.nbr[holder, out]
        arrive = state.back[holder, out]

    leaders = survivors[leader_of[survivors] == survivors]
    records = []
    for leader in leaders:
        forward = float(total[leader])
        side = 1 if forward <= -forward else 0
        chosen = forward if side == 1 else -forward
        count = int(np.sum(leader_of[survivors] == leader))
        records.append(CycleRecord(int(leader), count, side, chosen, -chosen))
    out_side[leaders] = [r.forward_side for r in records]

    holder = leaders.copy()
    current = state.nbr[leaders, out_side[leaders]]
    arrive = state.back[leaders, out_side[leaders]]
    start = leaders.copy()
    while len(start):
        _route(network, state, holder, current, "euler/leader")
        done = current == start
        keep = ~done
        start, holder, current, arrive = start[keep], current[keep], current[keep], arrive[keep]
        out_side[holder] = 1 - arrive
        current, arrive = state.nbr[holder, 1 - arrive], state.back[holder, 1 - arrive]
    return records


def _reverse_phase(state: CycleTokens, network: CliqueNetwork, out_side: np.ndarray) -> None:
    """按收缩层倒序，把幸存令牌的方向沿当层链路传给被剪除的令牌"""
    alive = state.active.copy()
    for nbr, back, removed in reversed(state.levels):
        senders = np.flatnonzero(alive)
        holder = senders
        current = nbr[senders, out_side[senders]]
        arrive = back[senders, out_side[senders]]
        while len(holder):
            _route(network, state, holder, current, "euler/reverse")
            pending = removed[current]
            holder, current, arrive = current[pending], current[pending], arrive[pending]
            out_side[holder] = 1 - arrive
            current, arrive = nbr[holder, 1 - arrive], back[holder, 1 - arrive]
        alive |= removed


def orient(g: WeightedGraph, costs: Optional[np.ndarray] = None,
           network: Optional[CliqueNetwork] = None,
           config: Optional[Dict[str, Any]] = None) -> Tuple[Orientation, RoundLedger]:
    """
    欧拉定向

    参数:
        g: 每个顶点度数为偶数的多重图，有向图忽略方向
        costs: 可选，沿给定方向经过每条边的有符号费用，反向经过取相反数
        network: 记账用的网络，缺省新建
        config: 覆盖 EULER_CONFIG

    返回:
        (Orientation, RoundLedger): 定向结果与网络账本
    """
    if network is None:
        network = CliqueNetwork(max(g.n, 1))
    if costs is not None:
        costs = np.asarray(costs, dtype=np.float64)
        if len(costs) != g.m:
            raise DimensionMismatch(g.m, len(costs))
    pairing = pair_locally(g)
    state = build_tokens(g, pairing, costs)
    iterations = (g.n - 1).bit_length() if g.n > 1 else 0

    counts = [int(state.active.sum())]
    for it in range(iterations):
        contract_once(state, network, config)
        counts.append(int(state.active.sum()))
        logger.debug(f"第 {it + 1} 次收缩后剩余 {counts[-1]} 个活跃令牌")

    out_side = np.full(state.tokens, -1, dtype=np.int64)
    records = _leader_phase(state, network, out_side)
    _reverse_phase(state, network, out_side)
    if np.any(out_side < 0):
        missing = int(np.flatnonzero(out_side < 0)[0])
        logger.error(f"令牌 {missing} 没有收到方向")
        raise CliqueFlowError(f"令牌 {missing} 在倒序传播后仍没有方向")

    direction = np.ones(g.m, dtype=np.int64)
    if state.tokens:
        tokens = np.arange(state.tokens)
        edge = state.slots[tokens, out_side]
        direction[edge] = np.where(g.tails[edge] == state.node, 1, -1)
    result = Orientation(direction, records, iterations, counts)
    logger.info(f"欧拉定向完成: {g.m} 条边, {len(records)} 个环, 收缩 {iterations} 次, "
                f"累计 {network.ledger.rounds_charged} 轮")
    return result, network.ledger
