# -*- coding: utf-8 -*-
"""
拥塞团模拟器

n 个节点按同步轮次通信，每轮每个节点向每个其他节点至多发送一条不超过 B 个字的消息。
Lenzen 路由按常数轮数 R_route 计费，只校验前提条件，不模拟具体调度。
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..config import settings
from .errors import BandwidthViolation, PayloadOverflow, RoutingPreconditionViolation, ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Message:
    src: int
    dst: int
    payload: Tuple[Any, ...] = ()


@dataclass
class RoundLedger:
    """
    轮数账本

    rounds_charged 始终等于 per_phase 各项之和，只增不减。
    """
    rounds_charged: int = 0
    per_phase: Dict[str, int] = field(default_factory=dict)
    messages_sent: int = 0

    def charge(self, phase: str, rounds: int, messages: int = 0) -> None:
        if rounds < 0 or messages < 0:
            raise ValueError("计费数值不能为负")
        self.per_phase[phase] = self.per_phase.get(phase, 0) + int(rounds)
        self.rounds_charged += int(rounds)
        self.messages_sent += int(messages)

    def lines(self) -> List[str]:
        """账本文件的行：phase<TAB>rounds"""
        return [f"{phase}\t{rounds}" for phase, rounds in self.per_phase.items()]

    def snapshot(self) -> Dict[str, int]:
        return dict(self.per_phase)

    def merge(self, other: "RoundLedger") -> None:
        """把在辅助网络上运行的子过程的账本并入本账本"""
        for phase, rounds in other.per_phase.items():
            self.charge(phase, rounds)
        self.messages_sent += other.messages_sent


Handler = Callable[[Any, List[Message]], Tuple[Any, Iterable[Message]]]


class CliqueNetwork:
    """
    n 个节点的同步网络

    参数:
        n: 节点数
        node_states: 每个节点的初始状态，缺省为 {"id": v}
        config: 覆盖 SIMULATOR_CONFIG 的配置项
    """

    def __init__(self, n: int, node_states: Optional[Sequence[Any]] = None,
                 config: Optional[Dict[str, Any]] = None):
        if n < 1:
            raise ValidationError(f"网络至少需要一个节点: n={n}")
        cfg = settings.merged(settings.SIMULATOR_CONFIG, config)
        self.n = int(n)
        self.B = int(cfg["words_per_message"])
        self.route_rounds = int(cfg["route_rounds"])
        self.ledger = RoundLedger()
        if node_states is None:
            node_states = [{"id": v} for v in range(self.n)]
        if len(node_states) != self.n:
            raise ValidationError("节点状态数量与 n 不一致")
        self.node_states: List[Any] = list(node_states)
        self.inboxes: List[List[Message]] = [[] for _ in range(self.n)]

    # --- 逐条消息接口 ---
    def run_round(self, handler: Handler, phase: str = "round") -> "CliqueNetwork":
        """
        执行一轮：每个节点根据 (状态, 收件箱) 产生新状态和发件箱，然后统一投递

        参数:
            handler: 节点处理函数 (state, inbox) -> (state, outbox)
            phase: 账本中的阶段名

        返回:
            CliqueNetwork: 自身，便于链式调用
        """
        outboxes = []
        new_states = []
        for v in range(self.n):
            state, outbox = handler(self.node_states[v], self.inboxes[v])
            outbox = list(outbox)
            self._check_outbox(v, outbox)
            new_states.append(state)
            outboxes.append(outbox)

        delivered = [[] for _ in range(self.n)]
        count = 0
        for outbox in outboxes:
            for msg in outbox:
                delivered[msg.dst].append(msg)
                count += 1
        for inbox in delivered:
            inbox.sort(key=lambda msg: msg.src)
        self.node_states = new_states
        self.inboxes = delivered
        self.ledger.charge(phase, 1, count)
        return self

    def _check_outbox(self, v: int, outbox: List[Message]) -> None:
        if len(outbox) > self.n - 1:
            raise BandwidthViolation(v, len(outbox))
        seen = {}
        for msg in outbox:
            if msg.src != v:
                raise ValidationError(f"节点 {v} 的发件箱中出现了源为 {msg.src} 的消息")
            if msg.dst == v:
                raise ValidationError(f"节点 {v} 不能给自己发消息")
            if not 0 <= msg.dst < self.n:
                raise ValidationError(f"目的节点 {msg.dst} 不存在")
            if len(msg.payload) > self.B:
                raise PayloadOverflow(v, len(msg.payload), self.B)
            seen[msg.dst] = seen.get(msg.dst, 0) + 1
            if seen[msg.dst] > 1:
                raise BandwidthViolation(v, seen[msg.dst])

    def route_batch(self, messages: Iterable[Message], phase: str = "route") -> "CliqueNetwork":
        """
        用 Lenzen 路由投递一批消息，计费 R_route 轮

        前提：每个节点作为源和作为目的地的消息数都不超过 n。
        """
        messages = list(messages)
        src = np.array([msg.src for msg in messages], dtype=np.int64)
        dst = np.array([msg.dst for msg in messages], dtype=np.int64)
        for msg in messages:
            if len(msg.payload) > self.B:
                raise PayloadOverflow(msg.src, len(msg.payload), self.B)
        self._check_routing(src, dst)

        delivered = [[] for _ in range(self.n)]
        for msg in messages:
            delivered[msg.dst].append(msg)
        for inbox in delivered:
            inbox.sort(key=lambda msg: (msg.src, tuple(msg.payload)))
        self.inboxes = delivered
        self.ledger.charge(phase, self.route_rounds, len(messages))
        return self

    # --- 向量化接口 ---
    def route_arrays(self, src: np.ndarray, dst: np.ndarray, phase: str, words: int = 1) -> None:
        """
        与 route_batch 相同的校验与计费，消息以 (src, dst) 数组给出，内容由调用方自行搬运
        """
        if words > self.B:
            raise PayloadOverflow(int(src[0]) if len(src) else 0, words, self.B)
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        self._check_routing(src, dst)
        self.ledger.charge(phase, self.route_rounds, len(src))

    def exchange(self, phase: str, messages: int = 0) -> None:
        """
        一轮直接通信：每个节点给每个其他节点至多发一个字（如矩阵向量乘时广播 x_v）
        """
        self.ledger.charge(phase, 1, messages)

    def charge(self, phase: str, rounds: int) -> None:
        """符号化计费，用于黑盒子程序"""
        self.ledger.charge(phase, rounds)

    def _check_routing(self, src: np.ndarray, dst: np.ndarray) -> None:
        if len(src) == 0:
            return
        if src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= self.n:
            raise ValidationError("路由消息的端点超出节点范围")
        # 目的地过载优先于源过载报告
        for role, ends in (("dst", dst), ("src", src)):
            counts = np.bincount(ends, minlength=self.n)
            worst = int(np.argmax(counts))
            if counts[worst] > self.n:
                logger.error(f"路由前提被破坏: 节点 {worst} 作为 {role} 有 {counts[worst]} 条消息")
                raise RoutingPreconditionViolation(worst, role, int(counts[worst]))


def split_for_routing(src: np.ndarray, dst: np.ndarray, n: int) -> np.ndarray:
    """
    把一批消息拆成若干子批，使每个子批中每个节点作为源和目的地的消息都不超过 n

    返回:
        np.ndarray: 每条消息所属子批的编号，子批编号从 0 连续
    """
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    if len(src) == 0:
        return np.zeros(0, dtype=np.int64)
    src_rank = _rank_within(src)
    dst_rank = _rank_within(dst)
    dst_blocks = int(dst_rank.max()) // n + 1
    batch = (src_rank // n) * dst_blocks + dst_rank // n
    _, compact = np.unique(batch, return_inverse=True)
    return compact.astype(np.int64)


def _rank_within(keys: np.ndarray) -> np.ndarray:
    """每个元素在相同键中的出现序号（按原始顺序）"""
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    starts = np.flatnonzero(np.r_[True, sorted_keys[1:] != sorted_keys[:-1]])
    run_start = np.repeat(starts, np.diff(np.r_[starts, len(keys)]))
    rank = np.empty(len(keys), dtype=np.int64)
    rank[order] = np.arange(len(keys)) - run_start
    return rank


def deliver(network: CliqueNetwork, src: np.ndarray, dst: np.ndarray, phase: str, words: int = 1) -> int:
    """
    按需拆批后路由一组消息，返回实际使用的路由批次数
    """
    batches = split_for_routing(src, dst, network.n)
    count = int(batches.max()) + 1 if len(batches) else 1
    if len(batches) == 0:
        network.route_arrays(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), phase, words)
        return 1
    for k in range(count):
        mask = batches == k
        network.route_arrays(np.asarray(src)[mask], np.asarray(dst)[mask], phase, words)
    return count
