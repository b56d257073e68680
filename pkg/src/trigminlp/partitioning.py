"""Partitions of a variable's interval, shared by the terms that use the variable."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, List, Optional, Sequence, Tuple

from .functions import convexity

SLOPE_TOL = 1e-9
POINT_TOL = 1e-9


@dataclass(frozen=True)
class Partition:
    points: Tuple[float, ...]
    owners: Tuple[str, ...] = ()
    var: Optional[int] = None
    functions: Tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError("a partition needs at least two points")
        if any(b <= a for a, b in zip(self.points, self.points[1:])):
            raise ValueError(f"partition points not strictly increasing: {self.points}")

    @property
    def lower(self) -> float:
        return self.points[0]

    @property
    def upper(self) -> float:
        return self.points[-1]

    @property
    def interval(self) -> Tuple[float, float]:
        return self.points[0], self.points[-1]

    @property
    def cells(self) -> int:
        return len(self.points) - 1

    def sub_intervals(self) -> List[Tuple[float, float]]:
        return list(zip(self.points, self.points[1:]))

    def locate(self, x: float) -> int:
        """Index ``i`` of the sub-interval ``[x_i, x_{i+1}]`` containing ``x``."""
        pts = self.points
        if x <= pts[0]:
            return 0
        for i in range(len(pts) - 1):
            if x <= pts[i + 1]:
                return i
        return len(pts) - 2

    def nearest_point_distance(self, x: float) -> float:
        return min(abs(x - p) for p in self.points)

    def with_points(self, points: Iterable[float]) -> "Partition":
        return replace(self, points=tuple(points))


def _functions(terms) -> Tuple:
    out = []
    for t in terms:
        f = getattr(t, "function", t)
        if f not in out:
            out.append(f)
    return tuple(out)


def _dedupe(points: Iterable[float], lo: float, hi: float) -> List[float]:
    out: List[float] = [lo]
    for p in sorted(points):
        if p - out[-1] > POINT_TOL and hi - p > POINT_TOL:
            out.append(p)
    out.append(hi)
    return out


def slope_violations(functions: Sequence, points: Sequence[float],
                     tol: float = SLOPE_TOL) -> List[int]:
    """Indices ``i`` whose sub-interval has equal end slopes for some function."""
    bad = []
    for i in range(len(points) - 1):
        a, b = points[i], points[i + 1]
        if any(abs(f.deriv(a) - f.deriv(b)) <= tol for f in functions):
            bad.append(i)
    return bad


def missing_inflections(functions: Sequence, points: Sequence[float]) -> List[float]:
    lo, hi = points[0], points[-1]
    missing = []
    for f in functions:
        for b in f.inflection_points(lo, hi):
            if min(abs(b - p) for p in points) > POINT_TOL:
                missing.append(b)
    return missing


def is_admissible(p: Partition) -> bool:
    return not missing_inflections(p.functions, p.points) and not slope_violations(
        p.functions, p.points)


def _repair_slopes(functions, points: List[float], max_insertions: int = 10_000) -> List[float]:
    for _ in range(max_insertions):
        bad = slope_violations(functions, points)
        if not bad:
            return points
        new = list(points)
        for i in reversed(bad):
            a, b = points[i], points[i + 1]
            if b - a <= 2 * POINT_TOL:
                raise ValueError(f"cannot satisfy slope condition on [{a}, {b}]")
            new.insert(i + 1, 0.5 * (a + b))
        points = new
    raise ValueError("slope repair did not terminate")


def base_partition(terms, domain: Tuple[float, float], var: Optional[int] = None,
                   owners: Sequence[str] = ()) -> Partition:
    """Smallest admissible partition of ``domain`` for all ``terms`` at once.

    ``terms`` may hold trig terms or bare function objects.  The result holds both
    endpoints and every interior inflection point; midpoints are added only where
    some function has equal slopes at the two ends of a sub-interval.
    """
    lo, hi = float(domain[0]), float(domain[1])
    if not hi > lo:
        raise ValueError(f"degenerate domain [{lo}, {hi}]")
    functions = _functions(terms)
    inflections = []
    for f in functions:
        inflections.extend(f.inflection_points(lo, hi))
    points = _repair_slopes(functions, _dedupe(inflections, lo, hi))
    return Partition(tuple(points), tuple(owners), var, functions)


def merge_partitions(a: Partition, b: Partition) -> Partition:
    if abs(a.lower - b.lower) > POINT_TOL or abs(a.upper - b.upper) > POINT_TOL:
        raise ValueError(f"interval mismatch: {a.interval} vs {b.interval}")
    functions = _functions(list(a.functions) + list(b.functions))
    points = _dedupe(list(a.points[1:-1]) + list(b.points[1:-1]), a.lower, a.upper)
    points = _repair_slopes(functions, points)
    owners = tuple(dict.fromkeys(a.owners + b.owners))
    return Partition(tuple(points), owners, a.var if a.var is not None else b.var, functions)


def contains_points(q_points: Sequence[float], p_points: Sequence[float]) -> bool:
    return all(min(abs(x - y) for y in q_points) <= POINT_TOL for x in p_points)


def check_refinement(p: Partition, q: Partition) -> bool:
    """True iff ``q`` strictly refines ``p`` and keeps the slope condition."""
    if abs(p.lower - q.lower) > POINT_TOL or abs(p.upper - q.upper) > POINT_TOL:
        return False
    if len(q.points) <= len(p.points) or not contains_points(q.points, p.points):
        return False
    functions = _functions(list(p.functions) + list(q.functions))
    return not slope_violations(functions, q.points) and not missing_inflections(
        functions, q.points)


def cell_convexities(f, p: Partition) -> List[str]:
    return [convexity(f, a, b) for a, b in p.sub_intervals()]
