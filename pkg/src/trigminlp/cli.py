"""Command-line front end: ``solve``, ``bench``, ``gen`` and ``oracle``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple

from .driver import SolveConfig, csv_row, export_results, solve_global
from .milp import BACKENDS
from .mdppp import (MdpppHeuristic, MdpppInstance, apply_optimality_cuts, build_mdppp_model, export_path,
                    generate_instance, load_instance, save_instance)
from .oracle import dp_oracle
from .refinement import SCHEMES, STRATEGIES, RefinementConfig, StrategyConfig, parse_k

log = logging.getLogger("trigminlp")


def _add_solver_flags(p: argparse.ArgumentParser, sweep: bool = False) -> None:
    if sweep:
        p.add_argument("--schemes", default="bisection,direct,nu2,nu3",
                       help="comma-separated refinement schemes")
        p.add_argument("--strategies", default="complete",
                       help="comma-separated strategies; kworst takes k as kworst:50 or kworst:count:3")
    else:
        p.add_argument("--scheme", choices=SCHEMES, default="nu2")
        p.add_argument("--strategy", choices=STRATEGIES, default="complete")
        p.add_argument("--k", help="k for kworst: a percentage (50 or 50%%) or count:N")
    p.add_argument("--delta1", type=float, default=2.0)
    p.add_argument("--delta2", type=float, default=2.0)
    p.add_argument("--principal-domain", choices=("on", "off"), default="on")
    p.add_argument("--backend", choices=BACKENDS, default="highs")
    p.add_argument("--gap", type=float, default=0.01)
    p.add_argument("--time-limit", type=float, default=3600.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--results-dir", default="results")
    p.add_argument("--run-id")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trigminlp",
                                 description="Global solver for MINLPs with trig and bilinear terms")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one path-planning instance")
    s.add_argument("instance")
    _add_solver_flags(s)

    b = sub.add_parser("bench", help="sweep schemes and strategies over instances")
    b.add_argument("instances", nargs="*")
    b.add_argument("--n", type=int, help="generate instances with n points instead")
    b.add_argument("--count", type=int, default=10)
    b.add_argument("--jobs", type=int, default=1)
    _add_solver_flags(b, sweep=True)

    g = sub.add_parser("gen", help="write seeded random instances")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="output directory (default results/<run-id>/instances)")
    g.add_argument("--results-dir", default="results")
    g.add_argument("--run-id")

    o = sub.add_parser("oracle", help="heading-grid dynamic program on one instance")
    o.add_argument("instance")
    o.add_argument("--grid", type=int, default=256)
    return ap


def _k_value(text: str):
    """``50`` and ``50%`` are percentages of the partitions; ``count:3`` is a count."""
    text = text.strip()
    if text.startswith("count:"):
        return parse_k(text[len("count:"):])
    k = parse_k(text if text.endswith("%") else text + "%")
    if not 0 < float(k[:-1]) <= 100:
        raise ValueError(f"k percentage {text!r} must be in (0, 100]")
    return k


def _strategy(name: str, k: Optional[str]) -> StrategyConfig:
    if name == "kworst":
        if k is None:
            raise ValueError("--strategy kworst needs --k")
        return StrategyConfig("kworst", _k_value(k))
    if k is not None:
        raise ValueError("--k requires --strategy kworst")
    return StrategyConfig("complete")


def _config(args, scheme: str, strategy: StrategyConfig) -> SolveConfig:
    return SolveConfig(gap_tolerance=args.gap, time_limit=args.time_limit,
                       refinement=RefinementConfig(scheme, args.delta1, args.delta2),
                       strategy=strategy, principal_domain=args.principal_domain == "on",
                       backend=args.backend)


def _parse_strategies(text: str) -> List[StrategyConfig]:
    out = []
    for item in text.split(","):
        item = item.strip()
        name, _, k = item.partition(":")
        out.append(_strategy(name, k or None))
    return out


def _strategy_label(s: StrategyConfig) -> str:
    return s.strategy if s.strategy == "complete" else f"kworst{s.k}"


def _stem(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def _run_dir(args, default: str) -> str:
    d = os.path.join(args.results_dir, args.run_id or default)
    for sub in ("instances", "paths"):
        os.makedirs(os.path.join(d, sub), exist_ok=True)
    return d


def _solve_one(job: Tuple[str, dict, SolveConfig, str]):
    name, inst_dict, cfg, out_dir = job
    inst = MdpppInstance.from_dict(inst_dict)
    mm = apply_optimality_cuts(build_mdppp_model(inst))
    res = solve_global(mm.model, cfg, MdpppHeuristic(mm))
    res.prepared = None
    res.solution = None
    if out_dir is not None and res.payload is not None:
        export_path(inst, res.payload, os.path.join(out_dir, "paths", f"{name}.csv"),
                    os.path.join(out_dir, "paths", f"{name}.json"))
    return name, res


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    cfg = _config(args, args.scheme, _strategy(args.strategy, args.k))
    name = _stem(args.instance)
    out = _run_dir(args, f"solve-{name}-{args.scheme}-{args.strategy}")
    save_instance(inst, os.path.join(out, "instances", f"{name}.json"))
    name, res = _solve_one((name, inst.to_dict(), cfg, out))
    export_results([(name, res)], os.path.join(out, "summary.csv"),
                   os.path.join(out, f"{name}.result.json"))
    print(",".join(csv_row(name, res)), f"status={res.status}",
          f"lb={res.lower_bound:.6f}", f"ub={res.upper_bound:.6f}", f"gap={res.gap:.4g}")
    return 0 if res.status in ("optimal", "time_limit", "stalled", "iteration_limit") else 1


def cmd_bench(args) -> int:
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    for s in schemes:
        if s not in SCHEMES:
            raise ValueError(f"unknown scheme {s!r}")
    strategies = _parse_strategies(args.strategies)
    if args.instances and args.n is not None:
        raise ValueError("give instance files or --n, not both")
    if args.instances:
        insts = [(_stem(p), load_instance(p)) for p in args.instances]
    elif args.n is not None:
        insts = [(f"n{args.n}_s{args.seed + i}", generate_instance(args.n, args.seed + i))
                 for i in range(args.count)]
    else:
        raise ValueError("bench needs instance files or --n")
    out = _run_dir(args, f"bench-{'-'.join(schemes)}")
    for name, inst in insts:
        save_instance(inst, os.path.join(out, "instances", f"{name}.json"))
    groups = [(sc, st) for sc in schemes for st in strategies]
    jobs = []
    for sc, st in groups:
        cfg = _config(args, sc, st)
        for name, inst in insts:
            jobs.append((name, inst.to_dict(), cfg, None))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_solve_one, jobs))
    else:
        results = [_solve_one(j) for j in jobs]
    per_group = [results[i * len(insts):(i + 1) * len(insts)] for i in range(len(groups))]
    labels = [f"{sc}/{_strategy_label(st)}" if len(strategies) > 1 else sc for sc, st in groups]
    for label, runs in zip(labels, per_group):
        export_results(runs, os.path.join(out, f"summary_{label.replace('/', '_').replace('%', 'pct')}.csv"))
    with open(os.path.join(out, "summary.csv"), "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["instance"] + [f"{lab} {c}" for lab in labels for c in ("t", "iter", "bin")])
        for i, (name, _) in enumerate(insts):
            row = [name]
            for runs in per_group:
                row += csv_row(name, runs[i][1])[1:]
            wr.writerow(row)
    print(os.path.join(out, "summary.csv"))
    return 0


def cmd_gen(args) -> int:
    out = args.out or os.path.join(_run_dir(args, f"gen-n{args.n}-s{args.seed}"), "instances")
    os.makedirs(out, exist_ok=True)
    for i in range(args.count):
        seed = args.seed + i
        path = os.path.join(out, f"n{args.n}_s{seed}.json")
        save_instance(generate_instance(args.n, seed), path)
        print(path)
    return 0


def cmd_oracle(args) -> int:
    inst = load_instance(args.instance)
    res = dp_oracle(inst, args.grid)
    print(json.dumps({"length": res.length, "headings": res.headings, "grid": res.grid,
                      "slack": res.slack,
                      "words": [leg.word for leg in res.path.legs]}, indent=2))
    return 0


COMMANDS = {"solve": cmd_solve, "bench": cmd_bench, "gen": cmd_gen, "oracle": cmd_oracle}


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command in ("gen", "bench") and args.n is not None and args.n < 2:
            raise ValueError("--n must be at least 2")
        if getattr(args, "jobs", 1) < 1:
            raise ValueError("--jobs must be at least 1")
        if getattr(args, "gap", 1.0) <= 0 or getattr(args, "time_limit", 1.0) <= 0:
            raise ValueError("--gap and --time-limit must be positive")
        if getattr(args, "delta1", 2.0) <= 1 or getattr(args, "delta2", 2.0) <= 1:
            raise ValueError("--delta1 and --delta2 must exceed 1")
        if args.command == "solve":
            _strategy(args.strategy, args.k)
        if args.command == "bench":
            _parse_strategies(args.strategies)
    except ValueError as e:
        ap.print_usage(sys.stderr)
        print(f"trigminlp: error: {e}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except (OSError, ValueError, RuntimeError) as e:
        print(f"trigminlp: {args.command} failed: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())
