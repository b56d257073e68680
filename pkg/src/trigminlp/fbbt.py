"""Feasibility-based bounds tightening by interval propagation.

Linear rows are propagated in both directions, trig terms only forward (range
image of the input interval), bilinear terms forward and, when the divisor
interval excludes zero, backward by interval division.
"""
from __future__ import annotations

import math
from typing import List, Tuple

from .model import FactoredModel

Interval = Tuple[float, float]


class InfeasibleModelError(ValueError):
    """Raised when propagation empties some variable domain."""


def _mul(a: Interval, b: Interval) -> Interval:
    prods = []
    for x in a:
        for y in b:
            if (x == 0.0 and math.isinf(y)) or (y == 0.0 and math.isinf(x)):
                prods.append(0.0)
            else:
                prods.append(x * y)
    return min(prods), max(prods)


def _div(a: Interval, b: Interval):
    """``a / b`` for ``b`` bounded away from zero, else None."""
    if b[0] <= 0.0 <= b[1]:
        return None
    return _mul(a, (1.0 / b[1], 1.0 / b[0]))


class _Bounds:
    def __init__(self, model: FactoredModel):
        self.model = model
        self.lo = [v.lower for v in model.variables]
        self.hi = [v.upper for v in model.variables]
        self.integer = [v.is_integer for v in model.variables]

    def tighten(self, j: int, lo: float, hi: float) -> None:
        if self.integer[j]:
            if math.isfinite(lo):
                lo = math.ceil(lo - 1e-9)
            if math.isfinite(hi):
                hi = math.floor(hi + 1e-9)
        cur_lo, cur_hi = self.lo[j], self.hi[j]
        if lo > cur_lo + 1e-10 * max(1.0, abs(lo)):
            cur_lo = lo
        if hi < cur_hi - 1e-10 * max(1.0, abs(hi)):
            cur_hi = hi
        if cur_lo > cur_hi:
            if cur_lo - cur_hi > 1e-8 * max(1.0, abs(cur_lo), abs(cur_hi)):
                name = self.model.variables[j].name
                raise InfeasibleModelError(
                    f"domain of {name} became empty: [{cur_lo}, {cur_hi}]")
            mid = 0.5 * (cur_lo + cur_hi)
            cur_lo = cur_hi = mid
        self.lo[j], self.hi[j] = cur_lo, cur_hi

    def sweep(self) -> None:
        m = self.model
        for c in m.constraints:
            self._linear(c)
        for t in m.trig_terms:
            x = t.input
            lo, hi = t.function.range(self.lo[x], self.hi[x])
            self.tighten(t.output, lo, hi)
        for b in m.bilinear_terms:
            xl, yl, zl = b.left, b.right, b.output
            X = (self.lo[xl], self.hi[xl])
            Y = (self.lo[yl], self.hi[yl])
            self.tighten(zl, *_mul(X, Y))
            Z = (self.lo[zl], self.hi[zl])
            q = _div(Z, Y)
            if q is not None:
                self.tighten(xl, *q)
                X = (self.lo[xl], self.hi[xl])
            q = _div(Z, X)
            if q is not None:
                self.tighten(yl, *q)

    def _linear(self, c) -> None:
        row_lo = c.rhs if c.sense in (">=", "=") else -math.inf
        row_hi = c.rhs if c.sense in ("<=", "=") else math.inf
        items = list(c.coefficients.items())
        tmin, tmax = [], []
        for j, a in items:
            lo, hi = _mul((a, a), (self.lo[j], self.hi[j]))
            tmin.append(lo)
            tmax.append(hi)
        fin_min = sum(v for v in tmin if math.isfinite(v))
        fin_max = sum(v for v in tmax if math.isfinite(v))
        inf_min = sum(1 for v in tmin if not math.isfinite(v))
        inf_max = sum(1 for v in tmax if not math.isfinite(v))
        for k, (j, a) in enumerate(items):
            # bounds on a*x_j from the rest of the row
            if math.isfinite(tmax[k]):
                rest_max = fin_max - tmax[k] if inf_max == 0 else math.inf
            else:
                rest_max = fin_max if inf_max == 1 else math.inf
            if math.isfinite(tmin[k]):
                rest_min = fin_min - tmin[k] if inf_min == 0 else -math.inf
            else:
                rest_min = fin_min if inf_min == 1 else -math.inf
            lo_ax = row_lo - rest_max if math.isfinite(row_lo) and math.isfinite(rest_max) else -math.inf
            hi_ax = row_hi - rest_min if math.isfinite(row_hi) and math.isfinite(rest_min) else math.inf
            if a > 0:
                self.tighten(j, lo_ax / a, hi_ax / a)
            else:
                self.tighten(j, hi_ax / a, lo_ax / a)

    def snapshot(self) -> List[Tuple[float, float]]:
        return list(zip(self.lo, self.hi))


def fbbt_bounds(model: FactoredModel, max_rounds: int = 10) -> Tuple[List[Interval], int]:
    """Tightened bounds and the number of sweeps performed."""
    state = _Bounds(model)
    for j in range(model.n):
        state.tighten(j, state.lo[j], state.hi[j])
    rounds = 0
    for _ in range(max_rounds):
        before = state.snapshot()
        state.sweep()
        rounds += 1
        if state.snapshot() == before:
            break
    return state.snapshot(), rounds


def fbbt_tighten(model: FactoredModel, max_rounds: int = 10) -> FactoredModel:
    """Return a copy of ``model`` with tightened variable domains.

    Raises :class:`InfeasibleModelError` if some domain becomes empty.
    """
    bounds, _ = fbbt_bounds(model, max_rounds)
    return model.with_bounds(bounds)
