# -*- coding: utf-8 -*-
"""
test_chebyshev.py: 预条件切比雪夫迭代与分布式拉普拉斯求解的测试
"""

import unittest

import numpy as np

from clique_flow.core.chebyshev import ChebyConfig, laplacian_solve, precon_cheby, solve_distributed
from clique_flow.core.errors import DisconnectedWithInfeasibleB, NoConvergence
from clique_flow.core.graph import energy_norm, laplacian, pseudo_solve_oracle
from clique_flow.core.models import WeightedGraph
from clique_flow.core.simulator import CliqueNetwork
from clique_flow.core.sparsify import SpectralSparsifier, spectral_sparsify
from clique_flow.utils.generators import random_connected_graph


def _pinv_solver(matrix: np.ndarray):
    inverse = np.linalg.pinv(matrix)
    return lambda r: inverse @ r


def _triangle() -> WeightedGraph:
    return WeightedGraph.from_edges(3, [(0, 1), (1, 2), (2, 0)])


class ChebyConfigTest(unittest.TestCase):
    def test_iteration_bound_grid(self):
        for kappa in (1, 2, 4, 16, 64):
            for epsilon in (1e-2, 1e-6):
                cheby = ChebyConfig(kappa, epsilon)
                self.assertLessEqual(cheby.planned_iterations, cheby.max_iters)

    def test_invalid_parameters(self):
        with self.assertRaises(ValueError):
            ChebyConfig(0.5, 0.1)
        with self.assertRaises(ValueError):
            ChebyConfig(2.0, 0.75)


class PreconChebyTest(unittest.TestCase):
    def test_perfect_preconditioner(self):
        A = laplacian(WeightedGraph.from_edges(2, [(0, 1)])).dense()
        x, report = precon_cheby(lambda v: A @ v, _pinv_solver(A), np.array([1.0, -1.0]), 1.0, 1e-10)
        np.testing.assert_allclose(x, [0.5, -0.5], atol=1e-9)
        self.assertLessEqual(report.iterations, report.max_iters)

    def test_zero_rhs(self):
        A = laplacian(_triangle()).dense()
        x, report = precon_cheby(lambda v: A @ v, _pinv_solver(A), np.zeros(3), 2.0, 1e-6)
        np.testing.assert_array_equal(x, np.zeros(3))
        self.assertEqual(report.iterations, 0)

    def test_scaled_preconditioner(self):
        L = laplacian(_triangle())
        A = L.dense()
        x, _ = precon_cheby(lambda v: A @ v, _pinv_solver(2.0 * A), np.array([2.0, -1.0, -1.0]), 2.0, 1e-8)
        exact = np.array([2 / 3, -1 / 3, -1 / 3])
        self.assertLessEqual(energy_norm(L, x - exact), 1e-8 * energy_norm(L, exact))

    def test_rounds_charged_per_multiply(self):
        A = laplacian(_triangle()).dense()
        network = CliqueNetwork(3)
        _, report = precon_cheby(lambda v: A @ v, _pinv_solver(2.0 * A), np.array([1.0, 0.0, -1.0]),
                                 2.0, 1e-6, network=network)
        self.assertEqual(network.ledger.per_phase["solver/matvec"], report.iterations)

    def test_violated_sandwich(self):
        A = laplacian(_triangle()).dense()
        with self.assertRaises(NoConvergence):
            precon_cheby(lambda v: A @ v, _pinv_solver(A / 10.0), np.array([1.0, 0.0, -1.0]), 1.0, 0.1)

    def test_operator_sandwich(self):
        g = random_connected_graph(8, seed=5, max_weight=10)
        rng = np.random.default_rng(5)
        h = g.with_weights(g.weights * rng.uniform(1.0, 2.0, size=g.m))
        A = laplacian(g).dense()
        B = laplacian(h).dense()
        epsilon = 1e-2
        columns = []
        for i in range(g.n):
            b = np.zeros(g.n)
            b[i] = 1.0
            b -= b.mean()
            x, _ = precon_cheby(lambda v: A @ v, _pinv_solver(B), b, 2.0, epsilon)
            columns.append(x)
        Z = np.array(columns).T
        values, vectors = np.linalg.eigh(A)
        root = vectors @ np.diag(np.sqrt(np.clip(values, 0.0, None))) @ vectors.T
        M = root @ Z @ root
        spectrum = np.linalg.eigvalsh(0.5 * (M + M.T))
        nonzero = spectrum[spectrum > 0.5]
        self.assertEqual(len(nonzero), g.n - 1)
        self.assertTrue(np.all(nonzero >= 1.0 - epsilon - 1e-9))
        self.assertTrue(np.all(nonzero <= 1.0 + epsilon + 1e-9))


class LaplacianSolveTest(unittest.TestCase):
    def test_identity_sparsifier(self):
        g = WeightedGraph.from_edges(2, [(0, 1)])
        y, report = laplacian_solve(g, SpectralSparsifier(g, 1.0), np.array([1.0, -1.0]), 1e-8)
        np.testing.assert_allclose(y, [0.5, -0.5], atol=1e-8)
        self.assertEqual(report.kappa, 1.0)

    def test_zero_rhs(self):
        g = _triangle()
        y, _ = laplacian_solve(g, SpectralSparsifier(g, 1.0), np.zeros(3), 1e-8)
        np.testing.assert_array_equal(y, np.zeros(3))

    def test_random_graph_against_oracle(self):
        g = random_connected_graph(50, seed=11, max_weight=10)
        sparsifier = spectral_sparsify(g)
        b = np.random.default_rng(11).normal(size=g.n)
        b -= b.mean()
        epsilon = 1e-6
        y, report = laplacian_solve(g, sparsifier, b, epsilon)
        L = laplacian(g)
        exact = pseudo_solve_oracle(L, b)
        self.assertLessEqual(energy_norm(L, y - exact), epsilon * energy_norm(L, exact))
        self.assertAlmostEqual(report.kappa, sparsifier.alpha ** 2)


class SolveDistributedTest(unittest.TestCase):
    def test_unit_edge(self):
        y, _ = solve_distributed(WeightedGraph.from_edges(2, [(0, 1)]), np.array([1.0, -1.0]), 1e-6)
        np.testing.assert_allclose(y, [0.5, -0.5], atol=1e-6)

    def test_two_components(self):
        g = WeightedGraph.from_edges(4, [(0, 1), (2, 3)])
        y, _ = solve_distributed(g, np.array([0.0, 0.0, 1.0, -1.0]), 1e-6)
        np.testing.assert_allclose(y, [0.0, 0.0, 0.5, -0.5], atol=1e-6)

    def test_kernel_direction_strict(self):
        with self.assertRaises(DisconnectedWithInfeasibleB):
            solve_distributed(_triangle(), np.ones(3), 1e-6)

    def test_kernel_direction_projected(self):
        y, report = solve_distributed(_triangle(), np.ones(3), 1e-6, strict=False)
        np.testing.assert_allclose(y, np.zeros(3), atol=1e-12)
        self.assertAlmostEqual(report.projection_residual, np.sqrt(3.0))

    def test_dense_graph_uses_preconditioner(self):
        for n, extra, seed in ((60, 1200, 4), (100, 3000, 5)):
            with self.subTest(n=n):
                g = random_connected_graph(n, seed=seed, max_weight=1, extra_edges=extra)
                b = np.random.default_rng(seed).normal(size=g.n)
                b -= b.mean()
                epsilon = 1e-6
                y, report = solve_distributed(g, b, epsilon)
                self.assertGreater(report.alpha, 1.0)
                self.assertLess(report.sparsifier_edges, g.m)
                self.assertGreater(report.iterations, 1)
                self.assertLessEqual(report.iterations, report.max_iters)
                L = laplacian(g)
                exact = pseudo_solve_oracle(L, b)
                self.assertLessEqual(energy_norm(L, y - exact), epsilon * energy_norm(L, exact))

    def test_rounds_include_sparsifier(self):
        g = random_connected_graph(20, seed=1, max_weight=8)
        b = np.random.default_rng(1).normal(size=g.n)
        b -= b.mean()
        network = CliqueNetwork(g.n)
        y, report = solve_distributed(g, b, 1e-6, network=network)
        self.assertEqual(report.rounds, report.iterations + report.sparsifier_rounds)
        self.assertEqual(network.ledger.rounds_charged, report.rounds)
        L = laplacian(g)
        exact = pseudo_solve_oracle(L, b)
        self.assertLessEqual(energy_norm(L, y - exact), 1e-6 * energy_norm(L, exact))


if __name__ == "__main__":
    unittest.main()
