# -*- coding: utf-8 -*-
"""
test_maxflow.py: 内点法最大流各步骤与整体结果的测试
"""

import unittest

import numpy as np

from clique_flow.core.errors import Infeasible, NoEdges
from clique_flow.core.maxflow import (KIND_ORIGINAL, KIND_PATH, KIND_PRECONDITION, KIND_SINK, KIND_SOURCE,
                                      LiftedGraph, augmentation, boosting, congestion, fixing, max_flow,
                                      max_flow_value, precondition_and_lift, select_boost_set)
from clique_flow.core.models import FlowInstance, WeightedGraph
from clique_flow.core.simulator import CliqueNetwork
from clique_flow.utils.generators import random_capacitated_instance
from clique_flow.utils.oracles import oracle_max_flow


def _instance(n, arcs, caps, s=0, t=None):
    g = WeightedGraph.from_edges(n, arcs, directed=True)
    return FlowInstance(g, caps, s=s, t=n - 1 if t is None else t)


def _manual(n, arcs, up, um, s=0, t=None):
    m = len(arcs)
    return LiftedGraph(
        n=n, s=s, t=n - 1 if t is None else t,
        tails=np.array([a[0] for a in arcs], dtype=np.int64),
        heads=np.array([a[1] for a in arcs], dtype=np.int64),
        up=np.array(up, dtype=np.float64), um=np.array(um, dtype=np.float64),
        flow=np.zeros(m), duals=np.zeros(n),
        origin=np.arange(m, dtype=np.int64), sign=np.ones(m, dtype=np.int64),
        kind=np.full(m, KIND_ORIGINAL, dtype=np.int64),
    )


class LiftTest(unittest.TestCase):
    def test_single_edge(self):
        lifted = precondition_and_lift(_instance(2, [(0, 1)], [3]))
        self.assertEqual(lifted.m, 4)
        self.assertEqual(lifted.kind.tolist(), [KIND_PRECONDITION, KIND_ORIGINAL, KIND_SOURCE, KIND_SINK])
        self.assertEqual((int(lifted.tails[0]), int(lifted.heads[0])), (1, 0))
        self.assertEqual(float(lifted.up[0]), 6.0)
        np.testing.assert_array_equal(lifted.origin, [-1, 0, -1, -1])

    def test_path(self):
        lifted = precondition_and_lift(_instance(3, [(0, 1), (1, 2)], [1, 1]))
        self.assertEqual(lifted.m, 8)
        np.testing.assert_array_equal(lifted.flow, np.zeros(8))
        np.testing.assert_array_equal(lifted.up, lifted.um)

    def test_copies_into_source_dropped(self):
        lifted = precondition_and_lift(_instance(3, [(1, 0), (0, 2)], [1, 1]))
        self.assertFalse(np.any(lifted.tails == lifted.heads))


class SelectBoostSetTest(unittest.TestCase):
    def test_largest_with_ties(self):
        np.testing.assert_array_equal(select_boost_set(np.array([1.0, -3.0, 3.0, 2.0]), 2), [1, 2])

    def test_size_larger_than_graph(self):
        np.testing.assert_array_equal(select_boost_set(np.array([0.5, 0.1]), 5), [0, 1])


class BoostingTest(unittest.TestCase):
    def setUp(self):
        self.lifted = _manual(2, [(0, 1)], [4.0], [2.0])
        self.lifted.origin = np.array([-1], dtype=np.int64)

    def test_single_edge_becomes_path(self):
        flags = boosting(self.lifted, np.array([0]), U=1)
        lifted = self.lifted
        self.assertEqual(flags, [])
        self.assertEqual((lifted.n, lifted.m), (4, 3))
        self.assertEqual(int(lifted.sign[0]), -1)
        np.testing.assert_allclose(lifted.duals, [0.0, 0.0, 0.0, 0.25])
        self.assertEqual(lifted.kind.tolist(), [KIND_ORIGINAL, KIND_PATH, KIND_PATH])
        last = 2
        self.assertEqual((int(lifted.tails[last]), int(lifted.heads[last])), (3, 0))
        self.assertTrue(np.isinf(lifted.up[last]))
        self.assertAlmostEqual(float(lifted.um[last]), 4.0)
        self.assertAlmostEqual(float(lifted.duals[0] - lifted.duals[3]), -0.25)
        np.testing.assert_array_equal(lifted.flow, np.zeros(3))

    def test_path_edges_are_centered(self):
        boosting(self.lifted, np.array([0]), U=1)
        lifted = self.lifted
        for e in (1, 2):
            forward, backward = lifted.up[e] - lifted.flow[e], lifted.um[e] + lifted.flow[e]
            gap = 1.0 / forward - 1.0 / backward
            self.assertAlmostEqual(float(lifted.duals[lifted.heads[e]] - lifted.duals[lifted.tails[e]]), gap)

    def test_empty_boost_set(self):
        flags = boosting(self.lifted, np.array([], dtype=np.int64), U=1)
        self.assertEqual(flags, [])
        self.assertEqual((self.lifted.n, self.lifted.m), (2, 1))

    def test_zero_gap_skipped(self):
        lifted = _manual(2, [(0, 1)], [2.0], [2.0])
        self.assertEqual(boosting(lifted, np.array([0]), U=1), ["boost-skipped-zero-gap"])
        self.assertEqual(lifted.m, 1)

    def test_long_path_skipped(self):
        # β = 2 + ⌈2·100 / 2⌉ = 102 超过默认上限 64
        flags = boosting(self.lifted, np.array([0]), U=100)
        self.assertEqual(flags, ["boost-too-long"])
        self.assertEqual((self.lifted.n, self.lifted.m), (2, 1))
        self.assertEqual(int(self.lifted.sign[0]), 1)


class AugmentationTest(unittest.TestCase):
    def test_unit_edge_current(self):
        lifted = _manual(2, [(0, 1)], [2.0], [2.0])
        step = augmentation(lifted, 1, 0.0, CliqueNetwork(2))
        self.assertAlmostEqual(float(step.f_tilde[0]), 1.0, places=6)
        np.testing.assert_array_equal(step.f_hat, lifted.flow)
        np.testing.assert_array_equal(step.y_hat, lifted.duals)

    def test_half_step(self):
        lifted = _manual(2, [(0, 1)], [2.0], [2.0])
        step = augmentation(lifted, 1, 0.5, CliqueNetwork(2))
        self.assertAlmostEqual(float(step.f_hat[0]), 0.5, places=6)
        self.assertFalse(step.capped)

    def test_symmetric_diamond_splits(self):
        lifted = _manual(4, [(0, 1), (1, 3), (0, 2), (2, 3)], [2.0] * 4, [2.0] * 4)
        step = augmentation(lifted, 1, 0.0, CliqueNetwork(4))
        np.testing.assert_allclose(step.f_tilde, [0.5, 0.5, 0.5, 0.5], atol=1e-5)
        np.testing.assert_allclose(congestion(lifted, step.f_tilde), [0.25] * 4, atol=1e-5)

    def test_floor_caps_step(self):
        lifted = _manual(2, [(0, 1)], [2.0], [2.0])
        step = augmentation(lifted, 1, 10.0, CliqueNetwork(2), floor=0.5)
        self.assertTrue(step.capped)
        self.assertAlmostEqual(float(step.f_hat[0]), 1.5, places=5)


class FixingTest(unittest.TestCase):
    def test_centered_input_unchanged(self):
        lifted = _manual(2, [(0, 1)], [2.0], [2.0])
        network = CliqueNetwork(2)
        f, y, damped = fixing(lifted, np.zeros(1), np.zeros(2), network)
        np.testing.assert_array_equal(f, [0.0])
        np.testing.assert_array_equal(y, [0.0, 0.0])
        self.assertFalse(damped)
        self.assertEqual(network.ledger.rounds_charged, 0)

    def test_residue_preserved(self):
        lifted = _manual(2, [(0, 1)], [2.0], [2.0])
        f_hat = np.zeros(1)
        f, _, _ = fixing(lifted, f_hat, np.array([0.0, 0.3]), CliqueNetwork(2))
        np.testing.assert_allclose(lifted.residue(f), lifted.residue(f_hat), atol=1e-6)
        forward, backward = lifted.residuals(f)
        self.assertTrue(np.all(forward > 0) and np.all(backward > 0))


class MaxFlowTest(unittest.TestCase):
    def test_single_edge(self):
        instance = _instance(2, [(0, 1)], [3])
        result = max_flow(instance, 3)
        self.assertEqual(result.value, 3)
        np.testing.assert_array_equal(result.flow.values, [3.0])
        self.assertGreater(result.rounds, 0)

    def test_zero_target(self):
        result = max_flow(_instance(2, [(0, 1)], [3]), 0)
        np.testing.assert_array_equal(result.flow.values, [0.0])
        self.assertEqual(result.value, 0)

    def test_target_above_capacity(self):
        with self.assertRaises(Infeasible):
            max_flow(_instance(2, [(0, 1)], [3]), 4)

    def test_no_edges(self):
        with self.assertRaises(NoEdges):
            max_flow(_instance(2, [], []), 1)

    def test_flow_is_feasible(self):
        instance = _instance(4, [(0, 1), (1, 3), (0, 2), (2, 3), (1, 2)], [2, 1, 1, 2, 1])
        result = max_flow(instance, 3)
        self.assertTrue(result.flow.is_integral())
        self.assertTrue(result.flow.is_capacity_feasible())
        self.assertEqual(result.flow.value(), 3.0)
        inner = result.flow.net_inflow()[[1, 2]]
        np.testing.assert_allclose(inner, 0.0, atol=1e-9)

    def test_boost_inside_main_loop(self):
        # 初始拥塞 ‖ρ‖₃ 高于提升阈值，第一次迭代就走提升分支
        result = max_flow(_instance(2, [(0, 1)], [3]), 3)
        self.assertGreater(result.boosts, 0)
        self.assertEqual(result.value, 3)
        np.testing.assert_array_equal(result.flow.values, [3.0])
        self.assertTrue(result.flow.is_capacity_feasible())

    def test_steps_stay_interior(self):
        instance = random_capacitated_instance(8, 20, 8, 5)
        lifted = precondition_and_lift(instance)
        network = CliqueNetwork(instance.n)
        F = oracle_max_flow(instance)
        aug = augmentation(lifted, F, 0.0, network)
        lifted.flow, lifted.duals, _ = fixing(lifted, aug.f_hat, aug.y_hat, network)
        for _ in range(6):
            aug = augmentation(lifted, F, 0.1, network, floor=1e-9 * instance.U)
            lifted.flow, lifted.duals, _ = fixing(lifted, aug.f_hat, aug.y_hat, network)
            forward, backward = lifted.residuals()
            self.assertTrue(np.all(forward > 0))
            self.assertTrue(np.all(backward > 0))


class MaxFlowValueTest(unittest.TestCase):
    def test_complete_directed_graph(self):
        arcs = [(u, v) for u in range(4) for v in range(4) if u != v]
        result = max_flow_value(_instance(4, arcs, [1] * len(arcs)))
        self.assertEqual(result.value, 3)

    def test_disconnected(self):
        result = max_flow_value(_instance(4, [(0, 1), (2, 3)], [1, 1]))
        self.assertEqual(result.value, 0)

    def test_random_against_oracle(self):
        shapes = [(6, 15, 4), (8, 20, 8), (12, 30, 1), (16, 40, 16), (24, 60, 4), (30, 80, 8)]
        for n, m, U in shapes:
            for seed in range(3):
                with self.subTest(n=n, U=U, seed=seed):
                    instance = random_capacitated_instance(n, m, U, seed)
                    network = CliqueNetwork(instance.n)
                    result = max_flow_value(instance, network)
                    self.assertEqual(result.value, oracle_max_flow(instance))
                    self.assertTrue(result.flow.is_capacity_feasible())
                    self.assertLessEqual(result.iterations, result.loop_bound)
                    self.assertEqual(result.rounds, network.ledger.rounds_charged)


if __name__ == "__main__":
    unittest.main()
