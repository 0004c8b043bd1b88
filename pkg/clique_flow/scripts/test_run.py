# -*- coding: utf-8 -*-
"""
test_run.py: 命令行入口的端到端测试
"""

import os
import tempfile
import unittest

from clique_flow.scripts.run import MATCH, run


class RunTest(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.ledger = os.path.join(self.tmp.name, "ledger.tsv")

    def tearDown(self):
        self.tmp.cleanup()

    def _write(self, text: str) -> str:
        path = os.path.join(self.tmp.name, "instance.txt")
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        return path

    def _run(self, *argv: str):
        return run(list(argv) + ["--ledger-out", self.ledger])

    def test_orient_generated(self):
        report = self._run("orient", "--generate", "8", "--verify")
        self.assertEqual(report.exit_code, 0)
        self.assertEqual(report.verdict, MATCH)
        self.assertTrue(os.path.exists(self.ledger))
        self.assertEqual(report.rounds, sum(report.ledger.values()))

    def test_max_flow_from_file(self):
        path = self._write("p max 2 1\nn 1 s\nn 2 t\na 1 2 3\n")
        report = self._run("max-flow", path, "--verify")
        self.assertEqual(report.exit_code, 0)
        self.assertEqual(report.result["value"], 3)
        self.assertEqual(report.verdict, MATCH)

    def test_target_above_max_is_infeasible(self):
        path = self._write("p max 2 1\nn 1 s\nn 2 t\na 1 2 3\n")
        report = self._run("max-flow", path, "--target-F", "5")
        self.assertEqual(report.exit_code, 1)
        self.assertIn("error", report.result)

    def test_missing_instance(self):
        report = self._run("orient")
        self.assertEqual(report.exit_code, 2)
        self.assertFalse(os.path.exists(self.ledger))

    def test_parse_error(self):
        path = self._write("a 1 2 3\n")
        self.assertEqual(self._run("max-flow", path).exit_code, 2)

    def test_solve_laplacian_generated(self):
        report = self._run("solve-laplacian", "--generate", "10", "--verify")
        self.assertEqual(report.exit_code, 0)
        self.assertEqual(report.verdict, MATCH)
        self.assertGreater(report.ledger["solver/matvec"], 0)

    def test_round_flow_generated(self):
        report = self._run("round-flow", "--generate", "10", "--verify")
        self.assertEqual(report.exit_code, 0)
        self.assertEqual(report.verdict, MATCH)

    def test_ledger_file_contents(self):
        self._run("orient", "--generate", "6")
        with open(self.ledger, "r", encoding="utf-8") as f:
            rows = [line.rstrip("\n").split("\t") for line in f if line.strip()]
        self.assertTrue(rows)
        self.assertTrue(all(len(row) == 2 and row[1].isdigit() for row in rows))


if __name__ == "__main__":
    unittest.main()
