"""Refinement schemes for a single partition and strategies for picking partitions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Mapping, Optional, Sequence, Union

from .partitioning import POINT_TOL, Partition, missing_inflections, slope_violations

SCHEMES = ("bisection", "direct", "nu2", "nu3")
STRATEGIES = ("complete", "kworst")
ON_CURVE_TOL = 1e-9


@dataclass(frozen=True)
class RefinementConfig:
    scheme: str = "nu2"
    delta1: float = 2.0
    delta2: float = 2.0
    epsilon_rel: float = 1e-4  # below this share of the width, bisect the largest cell
    on_point_tol: float = 1e-8

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not (self.delta1 > 1 and self.delta2 > 1):
            raise ValueError("delta1 and delta2 must exceed 1")
        if not self.epsilon_rel > 0:
            raise ValueError("epsilon must be positive")

    def epsilon_len(self, p: Partition) -> float:
        return self.epsilon_rel * (p.upper - p.lower)


@dataclass(frozen=True)
class StrategyConfig:
    strategy: str = "complete"
    k: Optional[Union[int, str]] = None  # count, or "50%"

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.strategy == "kworst":
            if self.k is None:
                raise ValueError("k-worst needs k")
            if isinstance(self.k, str) and self.k.endswith("%"):
                if not float(self.k[:-1]) > 0:
                    raise ValueError("k must be positive")
            elif int(self.k) < 1:
                raise ValueError("k must be at least 1")

    def count(self, n: int) -> int:
        if self.strategy == "complete":
            return n
        if isinstance(self.k, str) and self.k.endswith("%"):
            return min(n, max(1, math.ceil(float(self.k[:-1]) / 100.0 * n - 1e-9)))
        return min(n, int(self.k))


def parse_k(text: str) -> Union[int, str]:
    text = text.strip()
    if text.endswith("%"):
        float(text[:-1])
        return text
    return int(text)


def _keeps_slope(p: Partition, points: Sequence[float]) -> bool:
    return not slope_violations(p.functions, points) and not missing_inflections(p.functions, points)


def _insert(p: Partition, new: Sequence[float], tol: float) -> List[float]:
    pts = list(p.points)
    for x in sorted(new):
        if p.lower < x < p.upper and min(abs(x - q) for q in pts) > max(tol, POINT_TOL):
            pts.append(x)
            pts.sort()
    return pts


def _bisect_largest(p: Partition) -> List[float]:
    widths = [b - a for a, b in p.sub_intervals()]
    i = max(range(len(widths)), key=lambda k: (widths[k], -k))
    a, b = p.points[i], p.points[i + 1]
    return sorted(list(p.points) + [0.5 * (a + b)])


def scheme_points(p: Partition, x_star: float, cfg: RefinementConfig) -> List[float]:
    i = p.locate(x_star)
    a, b = p.points[i], p.points[i + 1]
    if cfg.scheme == "bisection":
        return [0.5 * (a + b)]
    if cfg.scheme == "direct":
        return [x_star]
    pts = [x_star - (x_star - a) / cfg.delta1, x_star + (b - x_star) / cfg.delta2]
    if cfg.scheme == "nu3":
        pts.append(x_star)
    return pts


def refine_partition(p: Partition, x_star: float, cfg: RefinementConfig) -> Partition:
    """Valid refinement of ``p`` driven by the relaxation value ``x_star``.

    Returns ``p`` itself when ``x_star`` sits on a partition point.
    """
    if not (p.lower - cfg.on_point_tol <= x_star <= p.upper + cfg.on_point_tol):
        raise ValueError(f"x* = {x_star} outside [{p.lower}, {p.upper}]")
    if p.nearest_point_distance(x_star) <= cfg.on_point_tol:
        return p
    i = p.locate(x_star)
    if p.points[i + 1] - p.points[i] < cfg.epsilon_len(p):
        return p.with_points(_bisect_largest(p))
    pts = _insert(p, scheme_points(p, x_star, cfg), cfg.on_point_tol)
    if len(pts) > len(p.points) and _keeps_slope(p, pts):
        return p.with_points(pts)
    # a scheme point next to a tangent-parallel spot; fall back to the midpoint
    a, b = p.points[i], p.points[i + 1]
    pts = sorted(list(p.points) + [0.5 * (a + b)])
    if _keeps_slope(p, pts):
        return p.with_points(pts)
    return p.with_points(_bisect_largest(p))


def partition_measure(p: Partition, values: Union[Sequence[float], Mapping[int, float]],
                      owners: Sequence) -> float:
    """Largest curve violation among the terms owning ``p``.

    ``owners`` holds, per owner term, either ``(f, x_var, y_var)`` for a trig term
    or ``("bilinear", x_var, y_var, z_var)``.
    """
    worst = 0.0
    for o in owners:
        if o[0] == "bilinear":
            _, xv, yv, zv = o
            worst = max(worst, abs(values[xv] * values[yv] - values[zv]))
        else:
            f, xv, yv = o
            worst = max(worst, abs(f.value(values[xv]) - values[yv]))
    return worst


def select_for_refinement(partitions: Sequence, measures: Sequence[float],
                          cfg: StrategyConfig, tol: float = ON_CURVE_TOL) -> List[int]:
    """Indices of the partitions to refine, in index order."""
    live = [i for i, mu in enumerate(measures) if mu > tol]
    if cfg.strategy == "complete":
        return live
    k = cfg.count(len(partitions))
    ranked = sorted(live, key=lambda i: (-measures[i], i))
    return sorted(ranked[:k])
