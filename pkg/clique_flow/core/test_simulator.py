# -*- coding: utf-8 -*-
"""
test_simulator.py: 拥塞团模拟器的单元测试
"""

import unittest

import numpy as np

from clique_flow.core.errors import (BandwidthViolation, PayloadOverflow,
                                     RoutingPreconditionViolation, ValidationError)
from clique_flow.core.simulator import (CliqueNetwork, Message, RoundLedger, deliver,
                                        split_for_routing)


def _silent(state, inbox):
    return state, []


class RunRoundTest(unittest.TestCase):
    def test_single_node_charges_one_round(self):
        network = CliqueNetwork(1)
        network.run_round(_silent)
        self.assertEqual(network.ledger.rounds_charged, 1)
        self.assertEqual(network.inboxes, [[]])

    def test_broadcast_reaches_every_other_node(self):
        network = CliqueNetwork(3)

        def handler(state, inbox):
            if state["id"] == 0:
                return state, [Message(0, 1, (7,)), Message(0, 2, (7,))]
            return state, []

        network.run_round(handler)
        self.assertEqual(network.inboxes[0], [])
        for v in (1, 2):
            self.assertEqual([(msg.src, msg.payload) for msg in network.inboxes[v]], [(0, (7,))])
        self.assertEqual(network.ledger.rounds_charged, 1)
        self.assertEqual(network.ledger.messages_sent, 2)

    def test_two_messages_to_same_destination(self):
        network = CliqueNetwork(2)

        def handler(state, inbox):
            if state["id"] == 0:
                return state, [Message(0, 1, (1,)), Message(0, 1, (2,))]
            return state, []

        with self.assertRaises(BandwidthViolation) as ctx:
            network.run_round(handler)
        self.assertEqual((ctx.exception.node, ctx.exception.count), (0, 2))

    def test_payload_too_long(self):
        network = CliqueNetwork(2)

        def handler(state, inbox):
            if state["id"] == 1:
                return state, [Message(1, 0, (1, 2, 3, 4, 5))]
            return state, []

        with self.assertRaises(PayloadOverflow):
            network.run_round(handler)

    def test_self_message_rejected(self):
        network = CliqueNetwork(2)
        with self.assertRaises(ValidationError):
            network.run_round(lambda state, inbox: (state, [Message(state["id"], state["id"])]))

    def test_inbox_sorted_by_sender(self):
        network = CliqueNetwork(4)

        def handler(state, inbox):
            v = state["id"]
            return state, [] if v == 0 else [Message(v, 0, (10 * v,))]

        network.run_round(handler)
        self.assertEqual([msg.src for msg in network.inboxes[0]], [1, 2, 3])

    def test_handlers_see_previous_round(self):
        network = CliqueNetwork(3)

        def handler(state, inbox):
            total = state.get("total", 0) + sum(msg.payload[0] for msg in inbox)
            v = state["id"]
            return {"id": v, "total": total}, [Message(v, (v + 1) % 3, (v + 1,))]

        network.run_round(handler).run_round(handler)
        totals = [state["total"] for state in network.node_states]
        self.assertEqual(totals, [3, 1, 2])
        self.assertEqual(network.ledger.rounds_charged, 2)

    def test_repeat_runs_identical(self):
        def execute():
            network = CliqueNetwork(5)

            def handler(state, inbox):
                v = state["id"]
                seen = state.get("seen", ()) + tuple(msg.payload for msg in inbox)
                return {"id": v, "seen": seen}, [Message(v, u, (v * u,)) for u in range(5) if u != v]

            for _ in range(3):
                network.run_round(handler)
            return network.node_states, network.ledger.snapshot()

        self.assertEqual(execute(), execute())


class RouteBatchTest(unittest.TestCase):
    def test_empty_batch_charges_route_rounds(self):
        network = CliqueNetwork(3)
        network.route_batch([])
        self.assertEqual(network.ledger.rounds_charged, 16)
        self.assertEqual(network.ledger.per_phase, {"route": 16})

    def test_capacity_exactly_met(self):
        network = CliqueNetwork(4)
        messages = [Message(u, (u + k) % 4, (k,)) for u in range(4) for k in range(1, 5)]
        network.route_batch(messages)
        self.assertEqual(sum(len(inbox) for inbox in network.inboxes), 16)
        self.assertEqual(network.ledger.rounds_charged, 16)
        for inbox in network.inboxes:
            keys = [(msg.src, msg.payload) for msg in inbox]
            self.assertEqual(keys, sorted(keys))

    def test_destination_overloaded(self):
        network = CliqueNetwork(2)
        with self.assertRaises(RoutingPreconditionViolation) as ctx:
            network.route_batch([Message(1, 0, (k,)) for k in range(3)])
        self.assertEqual(ctx.exception.node, 0)
        self.assertEqual(ctx.exception.role, "dst")
        self.assertEqual(ctx.exception.count, 3)

    def test_source_overloaded(self):
        network = CliqueNetwork(3)
        with self.assertRaises(RoutingPreconditionViolation) as ctx:
            network.route_batch([Message(2, k % 2, (k,)) for k in range(4)])
        self.assertEqual((ctx.exception.node, ctx.exception.role, ctx.exception.count), (2, "src", 4))

    def test_destination_reported_before_source(self):
        network = CliqueNetwork(2)
        messages = [Message(1, 0, (k,)) for k in range(3)] + [Message(0, 1, (k,)) for k in range(3)]
        with self.assertRaises(RoutingPreconditionViolation) as ctx:
            network.route_batch(messages)
        self.assertEqual((ctx.exception.node, ctx.exception.role), (0, "dst"))

    def test_route_rounds_configurable(self):
        network = CliqueNetwork(3, config={"route_rounds": 5})
        network.route_batch([Message(0, 1, (1,))], phase="custom")
        self.assertEqual(network.ledger.per_phase, {"custom": 5})


class LedgerTest(unittest.TestCase):
    def test_rounds_equal_phase_sum(self):
        ledger = RoundLedger()
        ledger.charge("a", 3)
        ledger.charge("b", 2, messages=4)
        ledger.charge("a", 1)
        self.assertEqual(ledger.rounds_charged, 6)
        self.assertEqual(ledger.rounds_charged, sum(ledger.per_phase.values()))
        self.assertEqual(ledger.lines(), ["a\t4", "b\t2"])

    def test_negative_charge_rejected(self):
        with self.assertRaises(ValueError):
            RoundLedger().charge("a", -1)

    def test_merge(self):
        main, sub = RoundLedger(), RoundLedger()
        main.charge("a", 2)
        sub.charge("a", 1, messages=3)
        sub.charge("b", 5)
        main.merge(sub)
        self.assertEqual(main.per_phase, {"a": 3, "b": 5})
        self.assertEqual(main.messages_sent, 3)


class SplitForRoutingTest(unittest.TestCase):
    def test_batches_respect_bound(self):
        n = 4
        src = np.zeros(10, dtype=np.int64)
        dst = np.arange(10) % n
        batches = split_for_routing(src, dst, n)
        for k in range(int(batches.max()) + 1):
            mask = batches == k
            self.assertLessEqual(np.bincount(src[mask], minlength=n).max(), n)
            self.assertLessEqual(np.bincount(dst[mask], minlength=n).max(), n)

    def test_deliver_counts_batches(self):
        network = CliqueNetwork(2)
        count = deliver(network, np.zeros(5, dtype=np.int64), np.ones(5, dtype=np.int64), "x")
        self.assertEqual(count, 3)
        self.assertEqual(network.ledger.per_phase["x"], 48)

    def test_deliver_empty(self):
        network = CliqueNetwork(2)
        self.assertEqual(deliver(network, np.zeros(0), np.zeros(0), "x"), 1)
        self.assertEqual(network.ledger.rounds_charged, 16)


if __name__ == "__main__":
    unittest.main()
