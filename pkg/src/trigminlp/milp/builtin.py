"""Reference branch-and-bound with LP bounds.

Incremental blocks are branched on their active cell: a node keeps, per chain
of ordered binaries, a range of admissible cells and splits it in two.  Integer
variables with a priority (the principal-domain offsets) are branched first, in
priority order.  Node LPs are solved with HiGHS through ``scipy.optimize.linprog``.
"""
from __future__ import annotations

import heapq
import itertools
import math
import time
from typing import List, Optional

import numpy as np
from scipy.optimize import linprog

from .model import INT_TOL, MilpModel, MilpSolution


def _lp(c, A_ub, b_ub, A_eq, b_eq, lo, hi):
    bounds = [(None if math.isinf(a) else a, None if math.isinf(b) else b)
              for a, b in zip(lo, hi)]
    res = linprog(c, A_ub=A_ub if A_ub.shape[0] else None, b_ub=b_ub if A_ub.shape[0] else None,
                  A_eq=A_eq if A_eq.shape[0] else None, b_eq=b_eq if A_eq.shape[0] else None,
                  bounds=bounds, method="highs")
    if res.status == 0:
        return "optimal", float(res.fun), res.x
    if res.status == 2:
        return "infeasible", math.inf, None
    if res.status == 3:
        return "unbounded", -math.inf, None
    return "error", math.inf, None


def _frac(v: float) -> float:
    return abs(v - round(v))


class _Search:
    def __init__(self, model: MilpModel, gap: float):
        self.model = model
        self.c, self.A_ub, self.b_ub, self.A_eq, self.b_eq, lo, hi = model.dense()
        ints = model.integer_indices()
        self.is_int = np.zeros(model.n, dtype=bool)
        self.is_int[ints] = True
        lo = lo.copy()
        hi = hi.copy()
        lo[ints] = np.ceil(lo[ints] - INT_TOL)
        hi[ints] = np.floor(hi[ints] + INT_TOL)
        self.root = (lo, hi)
        self.gap = gap
        in_chain = {j for ch in model.chains for j in ch}
        self.prio = sorted(((p, j) for j, p in model.priorities.items()), key=lambda t: (-t[0], t[1]))
        self.others = [j for j in ints if j not in in_chain and j not in model.priorities]
        self.warm = model.warm_start

    def branch(self, x, lo, hi):
        """Two child bound pairs, preferred child first; None when ``x`` is integral."""
        for _, j in self.prio:
            if _frac(x[j]) > INT_TOL:
                return self._split_var(j, x[j], lo, hi)
        for chain in self.model.chains:
            vals = [x[j] for j in chain]
            if all(_frac(v) <= INT_TOL for v in vals):
                continue
            # cells passed for sure / possibly; split the fractional stretch in half
            first = next(k for k, v in enumerate(vals) if v < 1 - INT_TOL)
            last = max(k for k, v in enumerate(vals) if v > INT_TOL)
            s = (first + last) // 2
            down_lo, down_hi = lo.copy(), hi.copy()
            for j in chain[s:]:
                down_hi[j] = 0.0
            up_lo, up_hi = lo.copy(), hi.copy()
            for j in chain[:s + 1]:
                up_lo[j] = 1.0
            children = [(down_lo, down_hi), (up_lo, up_hi)]
            w = self.warm.get(chain[s])
            if w is not None and w > 0.5 or w is None and vals[s] > 0.5:
                children.reverse()
            return children
        best, pick = INT_TOL, None
        for j in self.others:
            f = _frac(x[j])
            if f > best + 1e-12:
                best, pick = f, j
        if pick is None:
            return None
        return self._split_var(pick, x[pick], lo, hi)

    def _split_var(self, j, v, lo, hi):
        down_lo, down_hi = lo.copy(), hi.copy()
        down_hi[j] = math.floor(v)
        up_lo, up_hi = lo.copy(), hi.copy()
        up_lo[j] = math.ceil(v)
        children = [(down_lo, down_hi), (up_lo, up_hi)]
        target = self.warm.get(j, v)
        if target > v:
            children.reverse()
        return children


def solve_builtin(model: MilpModel, time_limit: Optional[float] = None, gap: float = 1e-9,
                  node_limit: Optional[int] = None) -> MilpSolution:
    start = time.monotonic()
    names = tuple(model.names())
    s = _Search(model, gap)
    counter = itertools.count()
    lo, hi = s.root
    if np.any(lo > hi + 1e-9):
        return MilpSolution("infeasible", names=names, time=time.monotonic() - start)
    status, val, x = _lp(s.c, s.A_ub, s.b_ub, s.A_eq, s.b_eq, lo, hi)
    if status == "infeasible":
        return MilpSolution("infeasible", names=names, time=time.monotonic() - start, nodes=1)
    if status != "optimal":
        return MilpSolution("error", names=names, message=f"root LP {status}",
                            time=time.monotonic() - start, nodes=1)
    heap = [(val, 0, next(counter), lo, hi, x)]
    inc_val, inc_x = math.inf, None
    nodes = 1
    timed_out = False

    def prune_level():
        return inc_val - max(1e-9, gap * abs(inc_val)) if math.isfinite(inc_val) else math.inf

    while heap:
        if time_limit is not None and time.monotonic() - start > time_limit:
            timed_out = True
            break
        if node_limit is not None and nodes >= node_limit:
            timed_out = True
            break
        bound, depth, _, lo, hi, x = heapq.heappop(heap)
        if bound >= prune_level():
            continue
        children = s.branch(x, lo, hi)
        if children is None:
            inc_val, inc_x = bound, x
            continue
        for clo, chi in children:
            if np.any(clo > chi + 1e-9):
                continue
            st, v, cx = _lp(s.c, s.A_ub, s.b_ub, s.A_eq, s.b_eq, clo, chi)
            nodes += 1
            if st == "optimal" and v < prune_level():
                heapq.heappush(heap, (v, depth - 1, next(counter), clo, chi, cx))
    elapsed = time.monotonic() - start
    open_bound = min((h[0] for h in heap), default=math.inf)
    bound = min(open_bound, inc_val)
    if inc_x is not None:
        vals = [float(round(v)) if s.is_int[j] else float(v) for j, v in enumerate(inc_x)]
        obj = model.objective_value(vals)
    else:
        vals, obj = None, math.inf
    if timed_out:
        return MilpSolution("time_limit", obj, vals, bound + model.objective_constant
                            if math.isfinite(bound) else bound, elapsed, nodes,
                            "time or node limit reached", names)
    if inc_x is None:
        return MilpSolution("infeasible", names=names, time=elapsed, nodes=nodes)
    return MilpSolution("optimal", obj, vals, obj, elapsed, nodes, "", names)
