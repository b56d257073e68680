"""MILP backend that runs an external solver executable on an LP file.

Configuration comes from the environment:

``TRIGMINLP_SOLVER``          solver executable (default: ``cbc`` on PATH, then the
                              CBC binary bundled with PuLP if installed)
``TRIGMINLP_SOLVER_ARGS``     argument template; ``{lp}``, ``{sol}``, ``{time}`` and
                              ``{gap}`` are substituted
``TRIGMINLP_SOLVER_DIALECT``  solution file dialect: ``cbc`` or ``plain``

The ``plain`` dialect is one status word on the first line followed by
``name value`` lines.  CBC omits columns whose value is zero, so missing
values are read as zero in both dialects.
"""
from __future__ import annotations

import math
import os
import re
import shlex
import shutil
import subprocess
import tempfile
import time
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .lpformat import serialize_lp
from .model import MilpModel, MilpSolution

DEFAULT_ARGS = "{lp} sec {time} ratio {gap} solve solu {sol}"


class SolverNotFound(RuntimeError):
    pass


def find_solver() -> str:
    exe = os.environ.get("TRIGMINLP_SOLVER")
    if exe:
        return exe
    exe = shutil.which("cbc")
    if exe:
        return exe
    try:
        import warnings

        import pulp

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DeprecationWarning)
            path = pulp.PULP_CBC_CMD().path
        if path and os.path.exists(path):
            return path
    except Exception:
        pass
    raise SolverNotFound("no solver executable: set TRIGMINLP_SOLVER or install CBC")


def parse_cbc_solution(text: str) -> Tuple[str, Optional[float], Dict[str, float]]:
    lines = text.splitlines()
    if not lines:
        return "error", None, {}
    head = lines[0].strip()
    low = head.lower()
    if low.startswith("optimal"):
        status = "optimal"
    elif "infeasible" in low:
        status = "infeasible"
    elif "stopped" in low:
        status = "time_limit"
    else:
        status = "error"
    m = re.search(r"objective value\s+(\S+)", head)
    obj = float(m.group(1)) if m else None
    values: Dict[str, float] = {}
    for line in lines[1:]:
        parts = line.split()
        if len(parts) >= 3 and parts[0].startswith("**"):
            parts = parts[1:]
        if len(parts) >= 3:
            try:
                values[parts[1]] = float(parts[2])
            except ValueError:
                continue
    return status, obj, values


def parse_plain_solution(text: str) -> Tuple[str, Optional[float], Dict[str, float]]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        return "error", None, {}
    status = lines[0].split()[0].lower()
    if status not in ("optimal", "infeasible", "time_limit"):
        status = "error"
    values = {}
    for line in lines[1:]:
        name, val = line.split()[:2]
        values[name] = float(val)
    return status, None, values


def _log_bound(log: str) -> Optional[float]:
    m = re.search(r"Lower bound:\s+(\S+)", log)
    if m:
        try:
            return float(m.group(1))
        except ValueError:
            return None
    return None


def solve_external(model: MilpModel, time_limit: Optional[float] = None,
                   gap: float = 1e-9, workdir: Optional[str] = None) -> MilpSolution:
    start = time.monotonic()
    names = tuple(model.names())
    try:
        exe = find_solver()
    except SolverNotFound as exc:
        return MilpSolution("error", names=names, message=str(exc))
    template = os.environ.get("TRIGMINLP_SOLVER_ARGS", DEFAULT_ARGS)
    dialect = os.environ.get("TRIGMINLP_SOLVER_DIALECT", "cbc")
    limit = 1e7 if time_limit is None else max(1.0, math.ceil(time_limit))
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        lp = Path(tmp) / "model.lp"
        sol = Path(tmp) / "model.sol"
        lp_names = serialize_lp(model, lp)
        args = [a.format(lp=lp, sol=sol, time=limit, gap=gap) for a in shlex.split(template)]
        try:
            proc = subprocess.run([exe] + args, capture_output=True, text=True,
                                  timeout=None if time_limit is None else limit + 60)
        except (OSError, subprocess.TimeoutExpired) as exc:
            return MilpSolution("error", names=names, message=repr(exc),
                                time=time.monotonic() - start)
        if not sol.exists():
            return MilpSolution("error", names=names, time=time.monotonic() - start,
                                message=f"exit {proc.returncode}: {proc.stdout[-2000:]}{proc.stderr[-2000:]}")
        text = sol.read_text()
    parse = parse_plain_solution if dialect == "plain" else parse_cbc_solution
    status, obj, raw = parse(text)
    elapsed = time.monotonic() - start
    if status in ("infeasible", "error"):
        return MilpSolution(status, names=names, time=elapsed, message=text[:2000])
    vals: List[float] = []
    for j, n in enumerate(lp_names):
        v = raw.get(n, 0.0)
        vals.append(float(round(v)) if model.variables[j].is_integer else v)
    objective = model.objective_value(vals)
    if status == "optimal":
        return MilpSolution("optimal", objective, vals, objective, elapsed, 0, "", names)
    lb = _log_bound(proc.stdout)
    bound = lb + model.objective_constant if lb is not None else -math.inf
    return MilpSolution("time_limit", objective, vals, bound, elapsed, 0, "time limit", names)
