"""Outer loop: relax, solve the MILP, bound, refine partitions, repeat."""
from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .assembly import build_relaxation, initial_partitions, owner_descriptors
from .fbbt import fbbt_tighten
from .milp import solve_milp
from .model import FactoredModel
from .partitioning import Partition
from .principal import (AlphaLink, PrincipalReformulation, add_alpha_links,
                        apply_principal_domains, branching_order)
from .refinement import (RefinementConfig, StrategyConfig, partition_measure, refine_partition,
                         select_for_refinement)

log = logging.getLogger(__name__)

FEASIBLE_TOL = 1e-6
CROSSING_TOL = 1e-6

Heuristic = Callable[[Sequence[float]], Optional[Tuple[float, Any]]]


class BoundCrossingError(RuntimeError):
    """Lower bound above the upper bound beyond tolerance."""


@dataclass(frozen=True)
class SolveConfig:
    gap_tolerance: float = 0.01
    time_limit: float = 3600.0
    refinement: RefinementConfig = field(default_factory=RefinementConfig)
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    principal_domain: bool = True
    backend: str = "highs"
    milp_gap: float = 1e-6
    max_iterations: int = 10_000
    objective_cutoff: bool = True  # add "objective <= incumbent" to each MILP

    def __post_init__(self):
        if not self.gap_tolerance > 0:
            raise ValueError("gap tolerance must be positive")
        if not self.time_limit > 0:
            raise ValueError("time limit must be positive")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    lower_bound: float
    upper_bound: float
    gap: float
    binaries_added: int
    time: float
    relaxation_bound: float = -math.inf
    refined: int = 0
    milp_status: str = "optimal"


@dataclass
class Prepared:
    model: FactoredModel
    refs: List[PrincipalReformulation]
    links: List[AlphaLink]
    priorities: List[int]
    partitions: Dict[int, Partition]


@dataclass
class SolveResult:
    status: str
    lower_bound: float
    upper_bound: float
    solution: Optional[List[float]]
    payload: Any
    iterations: List[IterationRecord]
    time: float
    binaries_added: int
    partitions: Dict[int, Partition]
    prepared: Optional[Prepared] = None

    @property
    def gap(self) -> float:
        return relative_gap(min(self.lower_bound, self.upper_bound), self.upper_bound)

    @property
    def timed_out(self) -> bool:
        return self.status == "time_limit"

    def to_dict(self) -> dict:
        return {"status": self.status, "lower_bound": self.lower_bound,
                "upper_bound": self.upper_bound, "gap": self.gap, "time": self.time,
                "iterations": len(self.iterations), "bin": self.binaries_added,
                "log": [r.__dict__ for r in self.iterations]}


def relative_gap(lb: float, ub: float) -> float:
    if math.isinf(ub):
        return math.inf
    if lb > ub + 1e-9 * max(1.0, abs(ub)):
        raise BoundCrossingError(f"lower bound {lb} exceeds upper bound {ub}")
    return max(0.0, ub - lb) / max(abs(ub), 1e-9)


def prepare(model: FactoredModel, principal_domain: bool = True) -> Prepared:
    """Tighten bounds, fold periodic inputs and build the base partitions."""
    model = fbbt_tighten(model)
    refs: List[PrincipalReformulation] = []
    links: List[AlphaLink] = []
    if principal_domain:
        model, refs = apply_principal_domains(model)
        model = fbbt_tighten(model)
        model, links = add_alpha_links(model, refs)
    return Prepared(model, refs, links, branching_order(refs, links), initial_partitions(model))


def _binaries_added(parts: Dict[int, Partition], base: Dict[int, Partition]) -> int:
    return sum(p.cells - base[v].cells for v, p in parts.items())


def _project(model: FactoredModel, x: Sequence[float]) -> Optional[List[float]]:
    y = model.term_values(x)
    return y if model.max_violation(y) <= FEASIBLE_TOL else None


def solve_global(model: FactoredModel, cfg: SolveConfig = SolveConfig(),
                 heuristic: Optional[Heuristic] = None,
                 prepared: Optional[Prepared] = None) -> SolveResult:
    start = time.perf_counter()
    prep = prepared if prepared is not None else prepare(model, cfg.principal_domain)
    m = prep.model
    base = dict(prep.partitions)
    parts = dict(prep.partitions)
    lb, ub = -math.inf, math.inf
    best_x: Optional[List[float]] = None
    payload: Any = None
    records: List[IterationRecord] = []
    warm: Optional[Dict[int, float]] = None
    status = "iteration_limit"

    def finish(st: str) -> SolveResult:
        return SolveResult(st, lb, ub, best_x, payload, records, time.perf_counter() - start,
                           _binaries_added(parts, base), parts, prep)

    for it in range(1, cfg.max_iterations + 1):
        remaining = cfg.time_limit - (time.perf_counter() - start)
        if remaining <= 0:
            status = "time_limit"
            break
        rel = build_relaxation(m, parts, prep.priorities, warm)
        cutoff = None
        if cfg.objective_cutoff and math.isfinite(ub):
            # every optimum of the original problem stays feasible
            cutoff = ub + CROSSING_TOL * max(1.0, abs(ub))
            rel.milp.add_row(m.objective.coefficients, "<=", cutoff - m.objective.constant,
                             "incumbent_cutoff")
        sol = solve_milp(rel.milp, cfg.backend, time_limit=remaining, gap=cfg.milp_gap)
        if sol.status == "infeasible" and cutoff is not None:
            # nothing below the incumbent: the incumbent is optimal
            lb = ub
            records.append(IterationRecord(it, lb, ub, 0.0, _binaries_added(parts, base),
                                           time.perf_counter() - start, cutoff, 0))
            status = "optimal"
            break
        if sol.status == "infeasible":
            status = "infeasible"
            break
        if sol.status not in ("optimal", "time_limit"):
            raise RuntimeError(f"MILP backend failed: {sol.status} {sol.message}")
        if math.isfinite(sol.bound):
            lb = max(lb, sol.bound)
        if not sol.has_solution:
            status = "time_limit"
            break
        x = list(sol.values[:m.n])
        proj = _project(m, x)
        if proj is not None and m.objective.evaluate(proj) < ub:
            ub, best_x, payload = m.objective.evaluate(proj), proj, None
        if heuristic is not None:
            h = heuristic(x)
            if h is not None and h[0] < ub:
                ub, payload = h
        if lb > ub:
            if lb - ub > CROSSING_TOL * max(1.0, abs(ub)):
                raise BoundCrossingError(f"iteration {it}: lower bound {lb} above upper bound {ub}")
            lb = ub
        gap = relative_gap(lb, ub)
        refined = 0
        if gap > cfg.gap_tolerance and sol.status == "optimal":
            keys = sorted(parts)
            measures = []
            for v in keys:
                p = parts[v]
                xv = min(max(x[v], p.lower), p.upper)
                if p.nearest_point_distance(xv) <= cfg.refinement.on_point_tol:
                    measures.append(0.0)
                else:
                    measures.append(partition_measure(p, x, owner_descriptors(m, p)))
            for i in select_for_refinement(keys, measures, cfg.strategy):
                v = keys[i]
                p = parts[v]
                q = refine_partition(p, min(max(x[v], p.lower), p.upper), cfg.refinement)
                if q.points != p.points:
                    parts[v] = q
                    refined += 1
        records.append(IterationRecord(it, lb, ub, gap, _binaries_added(parts, base),
                                       time.perf_counter() - start, sol.bound, refined, sol.status))
        log.info("iter %d lb %.6g ub %.6g gap %.3g refined %d", it, lb, ub, gap, refined)
        if gap <= cfg.gap_tolerance:
            status = "optimal"
            break
        if sol.status == "time_limit":
            status = "time_limit"
            break
        if refined == 0:
            status = "stalled"
            break
        warm = {j: x[j] for j in range(m.n)}
    return finish(status)


CSV_COLUMNS = ("instance", "t", "iter", "bin")


def csv_row(instance: str, result: SolveResult) -> List[str]:
    t = "**" if result.timed_out else f"{result.time:.2f}"
    return [instance, t, str(len(result.iterations)), str(result.binaries_added)]


def export_results(runs: Sequence[Tuple[str, SolveResult]], csv_path, json_path=None) -> None:
    """One row per instance: instance, t, iter, bin; ``**`` marks a time-out."""
    with open(csv_path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(CSV_COLUMNS)
        for name, res in runs:
            wr.writerow(csv_row(name, res))
    if json_path is not None:
        with open(json_path, "w") as fh:
            json.dump({name: res.to_dict() for name, res in runs}, fh, indent=2, default=str)
            fh.write("\n")
