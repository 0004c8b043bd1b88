# -*- coding: utf-8 -*-
"""
test_euler.py: 局部配对、3 染色、收缩与欧拉定向的测试
"""

import math
import unittest

import numpy as np

from clique_flow.core.errors import OddDegree
from clique_flow.core.euler import build_tokens, color3, contract_once, orient, pair_locally
from clique_flow.core.models import WeightedGraph
from clique_flow.core.simulator import CliqueNetwork
from clique_flow.utils.generators import random_eulerian_multigraph

# 轮数 / (log n · log* n) 的上限；每次收缩至多约 150 次路由，每次 16 轮
ROUND_BUDGET_CONSTANT = 1000.0


def _log_star(n: float) -> int:
    count = 0
    while n > 1:
        n = math.log2(n)
        count += 1
    return count


def _cycle(n: int) -> WeightedGraph:
    return WeightedGraph.from_edges(n, [(v, (v + 1) % n) for v in range(n)])


def _figure_eight() -> WeightedGraph:
    return WeightedGraph.from_edges(5, [(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)])


class PairingTest(unittest.TestCase):
    def test_four_cycle(self):
        g = _cycle(4)
        pairing = pair_locally(g)
        self.assertEqual(pairing.tokens, 4)
        self.assertEqual(pairing.pairs_at(0), [(0, 3)])
        self.assertEqual(len(pairing.cycles(g)), 1)

    def test_figure_eight(self):
        g = _figure_eight()
        pairing = pair_locally(g)
        self.assertEqual(pairing.pairs_at(0), [(0, 2), (3, 5)])
        cycles = pairing.cycles(g)
        self.assertEqual(len(cycles), 2)
        self.assertEqual(sorted(e for walk in cycles for e in walk), list(range(6)))

    def test_odd_degree(self):
        g = WeightedGraph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
        with self.assertRaises(OddDegree) as ctx:
            pair_locally(g)
        self.assertEqual((ctx.exception.vertex, ctx.exception.degree), (0, 3))


class ColoringTest(unittest.TestCase):
    def _check_proper(self, n: int):
        g = _cycle(n)
        state = build_tokens(g, pair_locally(g))
        colors = color3(state, CliqueNetwork(n))
        self.assertTrue(np.all((colors >= 0) & (colors <= 2)))
        self.assertTrue(np.all(colors != colors[state.nbr[:, 0]]))
        self.assertTrue(np.all(colors != colors[state.nbr[:, 1]]))

    def test_small_cycle(self):
        self._check_proper(4)

    def test_odd_cycle(self):
        self._check_proper(7)

    def test_long_cycle(self):
        self._check_proper(4096)

    def test_bigon_not_colored(self):
        g = WeightedGraph.from_edges(2, [(0, 1), (0, 1)])
        state = build_tokens(g, pair_locally(g))
        np.testing.assert_array_equal(color3(state, CliqueNetwork(2)), [-1, -1])


class ContractTest(unittest.TestCase):
    def _contract(self, g: WeightedGraph):
        state = build_tokens(g, pair_locally(g))
        return contract_once(state, CliqueNetwork(g.n))

    def test_eight_cycle_halves(self):
        state = self._contract(_cycle(8))
        self.assertLessEqual(int(state.active.sum()), 4)
        self.assertGreaterEqual(int(state.active.sum()), 1)

    def test_triangle(self):
        self.assertLessEqual(int(self._contract(_cycle(3)).active.sum()), 2)

    def test_bigon_keeps_higher_token(self):
        state = self._contract(WeightedGraph.from_edges(2, [(0, 1), (0, 1)]))
        np.testing.assert_array_equal(state.active, [False, True])

    def test_survivors_still_form_cycles(self):
        state = self._contract(_cycle(16))
        alive = np.flatnonzero(state.active)
        for k in alive:
            for side in (0, 1):
                other = state.nbr[k, side]
                self.assertTrue(state.active[other])
                self.assertEqual(state.nbr[other, state.back[k, side]], k)


class OrientTest(unittest.TestCase):
    def test_four_cycle(self):
        g = _cycle(4)
        orientation, ledger = orient(g)
        self.assertTrue(orientation.is_balanced(g))
        self.assertIn(orientation.direction.tolist(), ([1, 1, 1, 1], [-1, -1, -1, -1]))
        self.assertEqual(orientation.iterations, 2)
        self.assertEqual(len(orientation.cycles), 1)
        self.assertGreater(ledger.rounds_charged, 0)

    def test_figure_eight(self):
        g = _figure_eight()
        orientation, _ = orient(g)
        self.assertTrue(orientation.is_balanced(g))
        src, dst = orientation.oriented_ends(g)
        self.assertEqual(int(np.sum(src == 0)), 2)
        self.assertEqual(int(np.sum(dst == 0)), 2)

    def test_cost_picks_cheaper_direction(self):
        g = _cycle(4)
        orientation, _ = orient(g, costs=np.array([1.0, 1.0, 1.0, -5.0]))
        np.testing.assert_array_equal(orientation.direction, [1, 1, 1, 1])
        record = orientation.cycles[0]
        self.assertAlmostEqual(record.chosen_cost, -2.0)
        self.assertAlmostEqual(record.reverse_cost, 2.0)

    def test_cost_reverse_direction(self):
        g = _cycle(4)
        orientation, _ = orient(g, costs=np.array([1.0, 1.0, 1.0, 5.0]))
        np.testing.assert_array_equal(orientation.direction, [-1, -1, -1, -1])

    def test_random_multigraphs_balanced(self):
        for seed in range(5):
            g = random_eulerian_multigraph(60, seed)
            costs = np.random.default_rng(seed).integers(-5, 6, size=g.m).astype(np.float64)
            orientation, _ = orient(g, costs=costs)
            self.assertTrue(orientation.is_balanced(g))
            self.assertEqual(orientation.iterations, 6)
            for record in orientation.cycles:
                self.assertLessEqual(record.chosen_cost, record.reverse_cost)
            self.assertEqual(orientation.active_counts, sorted(orientation.active_counts, reverse=True))

    def test_active_tokens_halve(self):
        for seed in range(3):
            g = random_eulerian_multigraph(128, seed)
            orientation, _ = orient(g)
            cycles = len(orientation.cycles)
            counts = orientation.active_counts
            for before, after in zip(counts, counts[1:]):
                # 已缩成单个令牌的环不再参与，其余令牌每次至少减半
                self.assertLessEqual(after, (before + cycles) // 2)

    def test_round_budget_across_sizes(self):
        ratios = []
        for n in (256, 1024, 4096):
            g = random_eulerian_multigraph(n, seed=n)
            orientation, ledger = orient(g)
            self.assertTrue(orientation.is_balanced(g))
            ratios.append(ledger.rounds_charged / (math.log2(n) * _log_star(n)))
        self.assertLess(max(ratios), ROUND_BUDGET_CONSTANT)

    def test_empty_graph(self):
        orientation, _ = orient(WeightedGraph.from_edges(3, []))
        self.assertEqual(len(orientation.direction), 0)

    def test_ledger_shared_with_network(self):
        network = CliqueNetwork(8)
        network.charge("before", 3)
        _, ledger = orient(_cycle(8), network=network)
        self.assertIs(ledger, network.ledger)
        self.assertEqual(ledger.per_phase["before"], 3)
        self.assertEqual(ledger.rounds_charged, sum(ledger.per_phase.values()))


if __name__ == "__main__":
    unittest.main()
