"""MILP container, LP-format I/O and solver backends."""
from __future__ import annotations

from typing import Optional

from .lpformat import read_lp, read_lp_string, serialize_lp, write_lp_string
from .model import (BINARY, CONTINUOUS, FEAS_TOL, INT_TOL, INTEGER, MilpModel, MilpRow,
                    MilpSolution, MilpVar)

BACKENDS = ("highs", "builtin", "subprocess")


def solve_milp(model: MilpModel, backend: str = "highs", time_limit: Optional[float] = None,
               gap: float = 1e-9) -> MilpSolution:
    """Solve ``model`` to optimality (relative gap ``gap``) or until ``time_limit``."""
    if backend == "builtin":
        from .builtin import solve_builtin
        return solve_builtin(model, time_limit=time_limit, gap=gap)
    if backend == "highs":
        from .highs import solve_highs
        return solve_highs(model, time_limit=time_limit, gap=gap)
    if backend == "subprocess":
        from .external import solve_external
        return solve_external(model, time_limit=time_limit, gap=gap)
    raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")


__all__ = [
    "BACKENDS", "BINARY", "CONTINUOUS", "FEAS_TOL", "INTEGER", "INT_TOL", "MilpModel",
    "MilpRow", "MilpSolution", "MilpVar", "read_lp", "read_lp_string", "serialize_lp",
    "solve_milp", "write_lp_string",
]
