"""MILP backend on the HiGHS solver bundled with scipy."""
from __future__ import annotations

import math
import time
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

from .model import MilpModel, MilpSolution


def solve_highs(model: MilpModel, time_limit: Optional[float] = None,
                gap: float = 1e-9) -> MilpSolution:
    start = time.monotonic()
    names = tuple(model.names())
    c, A_ub, b_ub, A_eq, b_eq, lo, hi = model.dense()
    A = sparse.vstack([A_ub, A_eq]).tocsr()
    row_lo = np.concatenate([np.full(len(b_ub), -np.inf), b_eq])
    row_hi = np.concatenate([b_ub, b_eq])
    integrality = np.array([1 if v.is_integer else 0 for v in model.variables])
    options = {"mip_rel_gap": gap, "presolve": True}
    if time_limit is not None:
        options["time_limit"] = max(float(time_limit), 1e-3)
    constraints = [LinearConstraint(A, row_lo, row_hi)] if A.shape[0] else []
    try:
        res = milp(c, constraints=constraints, integrality=integrality,
                   bounds=Bounds(lo, hi), options=options)
    except Exception as exc:  # pragma: no cover - solver crash
        return MilpSolution("error", message=repr(exc), names=names,
                            time=time.monotonic() - start)
    elapsed = time.monotonic() - start
    const = model.objective_constant
    dual = getattr(res, "mip_dual_bound", None)
    bound = -math.inf if dual is None or not np.isfinite(dual) else float(dual) + const
    vals = None
    if res.x is not None:
        vals = [float(round(v)) if model.variables[j].is_integer else float(v)
                for j, v in enumerate(res.x)]
    nodes = int(getattr(res, "mip_node_count", 0) or 0)
    if res.status == 0:
        obj = model.objective_value(vals)
        return MilpSolution("optimal", obj, vals, min(bound, obj) if math.isfinite(bound) else obj,
                            elapsed, nodes, res.message, names)
    if res.status == 2:
        return MilpSolution("infeasible", names=names, time=elapsed, nodes=nodes,
                            message=res.message)
    if res.status == 1:
        obj = model.objective_value(vals) if vals is not None else math.inf
        return MilpSolution("time_limit", obj, vals, bound, elapsed, nodes, res.message, names)
    return MilpSolution("error", names=names, time=elapsed, message=res.message)
