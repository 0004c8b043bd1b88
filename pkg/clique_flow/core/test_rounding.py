# -*- coding: utf-8 -*-
"""
test_rounding.py: 流取整的测试
"""

import unittest

import numpy as np

from clique_flow.core.errors import NotMultipleOfDelta, OddDegreeInternal, ValidationError
from clique_flow.core.models import DemandVector, FlowAssignment, FlowInstance, WeightedGraph
from clique_flow.core.rounding import RoundingTask, flow_round, round_with_report
from clique_flow.core.simulator import CliqueNetwork
from clique_flow.utils.generators import random_capacitated_instance, random_fractional_flow


def _st_instance(n, arcs, caps, costs=None, s=0, t=None):
    g = WeightedGraph.from_edges(n, arcs, directed=True)
    return FlowInstance(g, caps, costs, s=s, t=n - 1 if t is None else t)


class FlowRoundTest(unittest.TestCase):
    def test_integral_flow_unchanged(self):
        instance = _st_instance(3, [(0, 1), (1, 2)], [2, 2])
        rounded, report = round_with_report(RoundingTask(instance, np.array([1.0, 1.0]), 0.25))
        np.testing.assert_array_equal(rounded.values, [1.0, 1.0])
        self.assertEqual(report.odd_edges, [0, 0])
        self.assertFalse(report.closure_edge)

    def test_half_path_rounds_up(self):
        instance = _st_instance(3, [(0, 1), (1, 2)], [1, 1])
        rounded, report = round_with_report(RoundingTask(instance, np.array([0.5, 0.5]), 0.5))
        np.testing.assert_array_equal(rounded.values, [1.0, 1.0])
        self.assertTrue(report.closure_edge)
        self.assertIn("closure-edge", rounded.flags)
        self.assertGreaterEqual(rounded.value(), 0.5)

    def test_cheaper_path_wins(self):
        instance = _st_instance(4, [(0, 1), (1, 3), (0, 2), (2, 3)], [1, 1, 1, 1], costs=[1, 1, 2, 2])
        before = FlowAssignment(np.full(4, 0.5), instance)
        rounded = flow_round(RoundingTask(instance, before.values, 0.5))
        np.testing.assert_array_equal(rounded.values, [1.0, 1.0, 0.0, 0.0])
        self.assertLessEqual(rounded.cost(), before.cost())
        self.assertEqual(rounded.value(), 1.0)

    def test_phase_count(self):
        instance = _st_instance(3, [(0, 1), (1, 2)], [1, 1])
        _, report = round_with_report(RoundingTask(instance, np.array([0.125, 0.125]), 0.125))
        self.assertEqual(report.orientation_calls, 3)

    def test_not_multiple_of_delta(self):
        instance = _st_instance(3, [(0, 1), (1, 2)], [1, 1])
        with self.assertRaises(NotMultipleOfDelta) as ctx:
            flow_round(RoundingTask(instance, np.array([0.5, 0.3]), 0.5))
        self.assertEqual(ctx.exception.edge, 1)

    def test_input_not_a_flow(self):
        g = WeightedGraph.from_edges(2, [(0, 1)], directed=True)
        instance = FlowInstance(g, [1], demand=DemandVector(np.zeros(2)), kind="min")
        with self.assertRaises(OddDegreeInternal):
            flow_round(RoundingTask(instance, np.array([0.5]), 0.5))

    def test_delta_must_be_power_of_two(self):
        instance = _st_instance(2, [(0, 1)], [1])
        with self.assertRaises(ValidationError):
            flow_round(RoundingTask(instance, np.array([0.0]), 0.75))

    def test_random_fractional_flows(self):
        for seed in range(20):
            instance = random_capacitated_instance(10, 30, 4, seed)
            delta = 1.0 / 16
            values = random_fractional_flow(instance, delta, seed)
            before = FlowAssignment(values, instance)
            network = CliqueNetwork(instance.n)
            rounded, report = round_with_report(RoundingTask(instance, values, delta), network)
            self.assertTrue(rounded.is_integral())
            self.assertTrue(rounded.is_capacity_feasible())
            self.assertTrue(np.all(np.abs(rounded.values - values) < 1.0))
            self.assertGreaterEqual(rounded.value(), before.value() - 1e-9)
            inner = np.ones(instance.n, dtype=bool)
            inner[[instance.s, instance.t]] = False
            np.testing.assert_allclose(rounded.net_inflow()[inner], 0.0, atol=1e-9)
            self.assertEqual(report.orientation_calls, 4)
            self.assertEqual(report.rounds, network.ledger.rounds_charged)


if __name__ == "__main__":
    unittest.main()
