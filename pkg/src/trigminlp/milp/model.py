"""In-memory MILP: variables, linear rows, objective and solver hints."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

CONTINUOUS, INTEGER, BINARY = "continuous", "integer", "binary"

FEAS_TOL = 1e-6
INT_TOL = 1e-6


@dataclass
class MilpVar:
    name: str
    lower: float = 0.0
    upper: float = math.inf
    integrality: str = CONTINUOUS

    @property
    def is_integer(self) -> bool:
        return self.integrality in (INTEGER, BINARY)


@dataclass
class MilpRow:
    coefficients: Dict[int, float]
    sense: str
    rhs: float
    name: str = ""

    def activity(self, x: Sequence[float]) -> float:
        return sum(c * x[j] for j, c in self.coefficients.items())

    def violation(self, x: Sequence[float]) -> float:
        a = self.activity(x)
        if self.sense == "<=":
            return max(0.0, a - self.rhs)
        if self.sense == ">=":
            return max(0.0, self.rhs - a)
        return abs(a - self.rhs)


class MilpModel:
    """Minimization MILP.

    ``chains`` lists the ordered binaries of each incremental block; the builtin
    backend branches on cell ranges of a chain instead of on single binaries.
    ``priorities`` maps variable index to a branching priority (higher first).
    """

    def __init__(self, name: str = "milp"):
        self.name = name
        self.variables: List[MilpVar] = []
        self.rows: List[MilpRow] = []
        self.objective: Dict[int, float] = {}
        self.objective_constant = 0.0
        self.priorities: Dict[int, int] = {}
        self.warm_start: Dict[int, float] = {}
        self.chains: List[List[int]] = []
        self._names: Dict[str, int] = {}

    @property
    def n(self) -> int:
        return len(self.variables)

    def add_var(self, name: str, lower: float = 0.0, upper: float = math.inf,
                integrality: str = CONTINUOUS) -> int:
        if name in self._names:
            raise ValueError(f"duplicate variable name {name!r}")
        if integrality == BINARY:
            lower, upper = max(lower, 0.0), min(upper, 1.0)
        self.variables.append(MilpVar(name, float(lower), float(upper), integrality))
        self._names[name] = len(self.variables) - 1
        return len(self.variables) - 1

    def add_row(self, coefficients: Mapping[int, float], sense: str, rhs: float,
                name: str = "") -> int:
        if sense not in ("<=", "=", ">="):
            raise ValueError(f"bad sense {sense!r}")
        coeffs: Dict[int, float] = {}
        for j, c in coefficients.items():
            if not 0 <= j < self.n:
                raise IndexError(f"row {name!r} references unknown variable {j}")
            coeffs[j] = coeffs.get(j, 0.0) + float(c)
        coeffs = {j: c for j, c in coeffs.items() if c != 0.0}
        self.rows.append(MilpRow(coeffs, sense, float(rhs), name or f"r{len(self.rows)}"))
        return len(self.rows) - 1

    def set_objective(self, coefficients: Mapping[int, float], constant: float = 0.0) -> None:
        self.objective = {j: float(c) for j, c in coefficients.items() if c != 0.0}
        self.objective_constant = float(constant)

    def index(self, name: str) -> int:
        return self._names[name]

    def names(self) -> List[str]:
        return [v.name for v in self.variables]

    def integer_indices(self) -> List[int]:
        return [j for j, v in enumerate(self.variables) if v.is_integer]

    def objective_value(self, x: Sequence[float]) -> float:
        return self.objective_constant + sum(c * x[j] for j, c in self.objective.items())

    def max_violation(self, x: Sequence[float], integrality: bool = True) -> float:
        worst = 0.0
        for v, xi in zip(self.variables, x):
            worst = max(worst, v.lower - xi, xi - v.upper)
            if integrality and v.is_integer:
                worst = max(worst, abs(xi - round(xi)))
        for r in self.rows:
            worst = max(worst, r.violation(x))
        return worst

    def dense(self):
        """Arrays ``(c, A_ub, b_ub, A_eq, b_eq, lower, upper)`` (``>=`` rows negated)."""
        import numpy as np
        from scipy import sparse

        n = self.n
        c = np.zeros(n)
        for j, v in self.objective.items():
            c[j] = v
        ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
        for r in self.rows:
            if r.sense == "=":
                eq_rows.append(r.coefficients)
                eq_rhs.append(r.rhs)
            elif r.sense == "<=":
                ub_rows.append(r.coefficients)
                ub_rhs.append(r.rhs)
            else:
                ub_rows.append({j: -a for j, a in r.coefficients.items()})
                ub_rhs.append(-r.rhs)

        def mat(rows):
            data, ri, ci = [], [], []
            for i, coeffs in enumerate(rows):
                for j, a in coeffs.items():
                    data.append(a)
                    ri.append(i)
                    ci.append(j)
            return sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), n))

        lower = np.array([v.lower for v in self.variables], dtype=float)
        upper = np.array([v.upper for v in self.variables], dtype=float)
        return (c, mat(ub_rows), np.array(ub_rhs, dtype=float), mat(eq_rows),
                np.array(eq_rhs, dtype=float), lower, upper)


@dataclass
class MilpSolution:
    status: str  # optimal | infeasible | time_limit | error
    objective: float = math.inf
    values: Optional[List[float]] = None
    bound: float = -math.inf
    time: float = 0.0
    nodes: int = 0
    message: str = ""
    names: Tuple[str, ...] = field(default=(), repr=False)

    @property
    def has_solution(self) -> bool:
        return self.values is not None

    def value_map(self) -> Dict[str, float]:
        if self.values is None:
            return {}
        return dict(zip(self.names, self.values))

    def __getitem__(self, j: int) -> float:
        if self.values is None:
            raise KeyError("solution has no values")
        return self.values[j]
