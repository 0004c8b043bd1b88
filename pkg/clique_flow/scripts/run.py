#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
命令行入口：读取或生成实例，在模拟器中运行指定算法，输出中文报告和轮数账本

用法:
    python -m clique_flow.scripts.run max-flow instance.txt --verify
    python -m clique_flow.scripts.run orient --generate 64 --seed 3 --ledger-out ledger.tsv
"""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from ..config import settings
from ..core.chebyshev import solve_distributed
from ..core.errors import CliqueFlowError, Infeasible, TooLarge, ValidationError
from ..core.euler import orient
from ..core.graph import energy_norm, laplacian, pseudo_solve_oracle
from ..core.maxflow import max_flow, max_flow_value
from ..core.mincostflow import min_cost_flow, min_cost_max_st_flow
from ..core.models import FlowAssignment, LaplacianSystem, RunReport
from ..core.rounding import RoundingTask, round_with_report
from ..core.simulator import CliqueNetwork
from ..core.sparsify import check_sparsifier, spectral_sparsify
from ..utils import generators
from ..utils.file_utils import ParsedInstance, format_report, read_instance, write_ledger
from ..utils.oracles import oracle_max_flow, oracle_min_cost_flow, oracle_min_cost_max_flow

logger = logging.getLogger(__name__)

MATCH, MISMATCH, SKIPPED = "MATCH", "MISMATCH", "SKIPPED"


def _verdict(ok: bool) -> str:
    return MATCH if ok else MISMATCH


def _infer_delta(flow: np.ndarray) -> float:
    """使所有流量都是 Δ 整数倍的最大 Δ = 1/2^k"""
    scale = 1
    while scale < (1 << 30):
        if np.all(np.abs(flow * scale - np.rint(flow * scale)) <= 1e-9):
            return 1.0 / scale
        scale *= 2
    raise ValidationError("流量不是任何 1/2^k 的整数倍")


def generate_instance(command: str, n: int, seed: int, delta: Optional[float] = None) -> ParsedInstance:
    """按子命令生成带种子的随机实例"""
    if command == "solve-laplacian":
        graph = generators.random_connected_graph(n, seed)
        rng = np.random.default_rng(seed)
        b = rng.normal(size=n)
        b -= b.mean()
        return ParsedInstance("lap", graph, system=LaplacianSystem(graph, b))
    if command == "sparsify":
        return ParsedInstance("lap", generators.random_connected_graph(n, seed, max_weight=8))
    if command == "orient":
        return ParsedInstance("euler", generators.random_eulerian_multigraph(n, seed))
    if command == "round-flow":
        instance = generators.random_capacitated_instance(n, 3 * n, 4, seed)
        flow = generators.random_fractional_flow(instance, delta or 1.0 / 64, seed)
        return ParsedInstance("round", instance.graph, instance=instance, flow=flow)
    if command == "max-flow":
        instance = generators.random_capacitated_instance(n, 3 * n, 4, seed)
        return ParsedInstance("max", instance.graph, instance=instance)
    instance = generators.random_unit_cost_instance(n, 3 * n, 16, seed)
    return ParsedInstance("min", instance.graph, instance=instance)


def _run_solve(parsed: ParsedInstance, args: argparse.Namespace, network: CliqueNetwork,
               report: RunReport) -> None:
    if parsed.system is None:
        raise ValidationError("solve-laplacian 需要 lap 实例")
    g, b = parsed.system.graph, parsed.system.b
    y, solve = solve_distributed(g, b, args.epsilon, network=network, r=args.r)
    report.result = {"iterations": solve.iterations, "alpha": round(solve.alpha, 6),
                     "kappa": round(solve.kappa, 6), "sparsifier_edges": solve.sparsifier_edges}
    if args.verify:
        if g.n > settings.ORACLE_CONFIG["dense_max_nodes"]:
            report.verdict = SKIPPED
            return
        L = laplacian(g)
        exact = pseudo_solve_oracle(L, b)
        error = energy_norm(L, y - exact)
        scale = energy_norm(L, exact)
        report.result["relative_error"] = error / scale if scale > 0 else error
        report.verdict = _verdict(error <= args.epsilon * scale + 1e-12)


def _run_sparsify(parsed: ParsedInstance, args: argparse.Namespace, network: CliqueNetwork,
                  report: RunReport) -> None:
    g = parsed.graph
    sparsifier = spectral_sparsify(g, args.r, network=network)
    report.result = {"edges": g.m, "sparsifier_edges": sparsifier.H.m,
                     "alpha": round(sparsifier.alpha, 6), "levels": sparsifier.levels}
    if args.verify:
        if g.n > settings.ORACLE_CONFIG["dense_max_nodes"]:
            report.verdict = SKIPPED
            return
        report.verdict = _verdict(check_sparsifier(g, sparsifier.H, sparsifier.alpha))


def _run_orient(parsed: ParsedInstance, args: argparse.Namespace, network: CliqueNetwork,
                report: RunReport) -> None:
    g = parsed.graph
    orientation, _ = orient(g, network=network)
    report.result = {"edges": g.m, "cycles": len(orientation.cycles), "iterations": orientation.iterations}
    if args.verify:
        report.verdict = _verdict(orientation.is_balanced(g))


def _run_round(parsed: ParsedInstance, args: argparse.Namespace, network: CliqueNetwork,
               report: RunReport) -> None:
    instance, flow = parsed.instance, parsed.flow
    if instance is None or flow is None:
        raise ValidationError("round-flow 需要 round 实例")
    delta = args.delta or _infer_delta(flow)
    rounded, rounding = round_with_report(RoundingTask(instance, flow, delta), network)
    report.result = {"delta": delta, "orientation_calls": rounding.orientation_calls,
                     "closure_edge": rounding.closure_edge}
    if instance.s is not None:
        report.result["value_before"] = FlowAssignment(flow, instance).value()
        report.result["value_after"] = rounded.value()
    report.flags.extend(rounded.flags)
    if args.verify:
        ok = rounded.is_integral() and bool(np.all(np.abs(rounded.values - flow) < 1.0))
        if instance.s is not None:
            ok = ok and report.result["value_after"] >= report.result["value_before"] - 1e-9
        report.verdict = _verdict(ok)


def _run_max_flow(parsed: ParsedInstance, args: argparse.Namespace, network: CliqueNetwork,
                  report: RunReport) -> None:
    instance = parsed.instance
    if instance is None or instance.s is None:
        raise ValidationError("max-flow 需要 s-t 实例")
    if args.target_F is not None:
        result = max_flow(instance, args.target_F, network, r=args.r)
    else:
        result = max_flow_value(instance, network, r=args.r)
    report.result = {"value": result.value, "iterations": result.iterations, "boosts": result.boosts,
                     "augmenting_paths": result.augmenting_paths}
    report.flags.extend(result.flags)
    if args.verify:
        try:
            best = oracle_max_flow(instance)
        except TooLarge:
            report.verdict = SKIPPED
            return
        flow = result.flow
        conserved = np.allclose(np.delete(flow.net_inflow(), [instance.s, instance.t]), 0.0)
        expected = best if args.target_F is None else args.target_F
        ok = (flow.is_integral() and flow.is_capacity_feasible() and conserved
              and result.value == expected and flow.value() == expected and expected <= best)
        report.result["oracle_value"] = best
        report.verdict = _verdict(ok)


def _run_min_cost(parsed: ParsedInstance, args: argparse.Namespace, network: CliqueNetwork,
                  report: RunReport) -> None:
    instance = parsed.instance
    if instance is None or instance.costs is None:
        raise ValidationError("min-cost-flow 需要带费用的实例")
    if instance.s is not None:
        result = min_cost_max_st_flow(instance, network, r=args.r)
    else:
        result = min_cost_flow(instance, network=network, r=args.r)
    report.result = {"value": result.value, "cost": result.cost, "progress_steps": result.progress_steps,
                     "perturbations": result.perturbations, "repair_iterations": result.repair_iterations}
    report.flags.extend(result.flags)
    if args.verify:
        try:
            if instance.s is not None:
                value, cost = oracle_min_cost_max_flow(instance)
                ok = value == result.value and cost == result.cost
            else:
                _, cost = oracle_min_cost_flow(instance)
                ok = cost == result.cost
        except TooLarge:
            report.verdict = SKIPPED
            return
        report.result["oracle_cost"] = cost
        report.verdict = _verdict(ok)


COMMANDS: Dict[str, Callable[[ParsedInstance, argparse.Namespace, CliqueNetwork, RunReport], None]] = {
    "solve-laplacian": _run_solve,
    "sparsify": _run_sparsify,
    "orient": _run_orient,
    "round-flow": _run_round,
    "max-flow": _run_max_flow,
    "min-cost-flow": _run_min_cost,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="拥塞团模型下的拉普拉斯求解与流算法模拟")
    parser.add_argument("command", choices=sorted(COMMANDS), help="要运行的算法")
    parser.add_argument("instance", nargs="?", help="实例文件（与 --generate 二选一）")
    parser.add_argument("--epsilon", type=float, default=1e-6, help="拉普拉斯求解精度")
    parser.add_argument("--r", type=float, default=1.0, help="求解器轮数折中参数")
    parser.add_argument("--delta", type=float, default=None, help="流取整的 Δ，缺省自动推断")
    parser.add_argument("--target-F", dest="target_F", type=int, default=None, help="最大流的目标流值")
    parser.add_argument("--seed", type=int, default=0, help="生成实例的随机种子")
    parser.add_argument("--generate", type=int, default=None, metavar="N", help="生成 N 个顶点的随机实例")
    parser.add_argument("--ledger-out", default=None, help="账本文件路径")
    parser.add_argument("--verify", action="store_true", help="与精确校验器比对")
    parser.add_argument("--verbose", action="store_true", help="输出调试日志")
    return parser


def run(argv: Optional[List[str]] = None) -> RunReport:
    """
    解析参数并执行一次运行

    参数:
        argv: 命令行参数，缺省取 sys.argv

    返回:
        RunReport: exit_code 为 0 成功、1 不可行、2 其他错误
    """
    args = build_parser().parse_args(argv)
    report = RunReport(kind=args.command)
    start = time.perf_counter()
    network = None
    try:
        if args.generate is not None:
            parsed = generate_instance(args.command, args.generate, args.seed, args.delta)
        elif args.instance is not None:
            parsed = read_instance(Path(args.instance))
        else:
            raise ValidationError("需要实例文件或 --generate")
        network = CliqueNetwork(max(parsed.graph.n, 1))
        COMMANDS[args.command](parsed, args, network, report)
    except Infeasible as e:
        logger.error(f"实例不可行: {e}")
        report.result["error"] = str(e)
        report.exit_code = 1
    except CliqueFlowError as e:
        logger.error(f"运行失败: {e}")
        report.result["error"] = str(e)
        report.exit_code = 2
    except Exception as e:
        logger.exception(f"未预期的错误: {e}")
        report.result["error"] = str(e)
        report.exit_code = 2

    if network is not None:
        report.ledger = network.ledger.snapshot()
        report.rounds = network.ledger.rounds_charged
        write_ledger(args.ledger_out or settings.DEFAULT_LEDGER_PATH, network.ledger)
    if report.verdict == MISMATCH and report.exit_code == 0:
        report.exit_code = 2
    report.wall_clock = time.perf_counter() - start
    return report


def main():
    argv = sys.argv[1:]
    log_cfg = settings.LOG_CONFIG
    level = logging.DEBUG if "--verbose" in argv else getattr(logging, log_cfg["level"])
    logging.basicConfig(level=level, format=log_cfg["format"])
    report = run(argv)
    print(format_report(report))
    sys.exit(report.exit_code)


if __name__ == "__main__":
    main()
