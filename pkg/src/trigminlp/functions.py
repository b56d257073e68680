"""Univariate differentiable functions that can be relaxed with triangle cells."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Tuple

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Sinusoid:
    """``amplitude * sin(frequency * x + phase)`` (or ``cos``)."""

    kind: str = "sin"
    amplitude: float = 1.0
    phase: float = 0.0
    frequency: float = 1.0

    def __post_init__(self):
        if self.kind not in ("sin", "cos"):
            raise ValueError(f"unknown sinusoid kind {self.kind!r}")
        if self.frequency == 0.0:
            raise ValueError("frequency must be nonzero")
        if self.amplitude == 0.0:
            raise ValueError("amplitude must be nonzero")

    @property
    def _shift(self) -> float:
        # cos(u) == sin(u + pi/2)
        return self.phase + (0.5 * math.pi if self.kind == "cos" else 0.0)

    @property
    def period(self) -> float:
        return TWO_PI / abs(self.frequency)

    def value(self, x: float) -> float:
        u = self.frequency * x + self.phase
        return self.amplitude * (math.sin(u) if self.kind == "sin" else math.cos(u))

    def deriv(self, x: float) -> float:
        u = self.frequency * x + self.phase
        d = math.cos(u) if self.kind == "sin" else -math.sin(u)
        return self.amplitude * self.frequency * d

    def second(self, x: float) -> float:
        return -self.frequency ** 2 * self.value(x)

    def _roots(self, offset: float, lo: float, hi: float) -> List[float]:
        # solutions of frequency*x + shift = offset + k*pi inside [lo, hi]
        w, s = self.frequency, self._shift
        a, b = sorted(((w * lo + s - offset) / math.pi, (w * hi + s - offset) / math.pi))
        out = []
        for k in range(math.ceil(a - 1e-12), math.floor(b + 1e-12) + 1):
            x = (offset + k * math.pi - s) / w
            if lo - 1e-12 <= x <= hi + 1e-12:
                out.append(min(max(x, lo), hi))
        return sorted(out)

    def inflection_points(self, lo: float, hi: float) -> List[float]:
        return self._roots(0.0, lo, hi)

    def critical_points(self, lo: float, hi: float) -> List[float]:
        return self._roots(0.5 * math.pi, lo, hi)

    def range(self, lo: float, hi: float) -> Tuple[float, float]:
        pts = [lo, hi] + self.critical_points(lo, hi)
        vals = [self.value(p) for p in pts]
        a = abs(self.amplitude)
        return max(min(vals), -a), min(max(vals), a)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "amplitude": self.amplitude, "phase": self.phase,
                "frequency": self.frequency}


@dataclass(frozen=True)
class UserFunction:
    """A user-supplied differentiable function.

    ``inflections(lo, hi)`` must return the (finitely many) points in ``[lo, hi]``
    where the function switches between convex and concave.  ``second`` is optional;
    without it convexity of a sub-interval is decided by a chord test.
    """

    f: Callable[[float], float]
    df: Callable[[float], float]
    inflections: Callable[[float, float], Iterable[float]]
    d2f: Optional[Callable[[float], float]] = None
    period: Optional[float] = None
    name: str = field(default="user", compare=False)
    kind: str = field(default="user", init=False)

    def value(self, x: float) -> float:
        return float(self.f(x))

    def deriv(self, x: float) -> float:
        return float(self.df(x))

    def second(self, x: float) -> float:
        if self.d2f is not None:
            return float(self.d2f(x))
        h = 1e-5 * max(1.0, abs(x))
        return (self.deriv(x + h) - self.deriv(x - h)) / (2 * h)

    def inflection_points(self, lo: float, hi: float) -> List[float]:
        pts = sorted(float(p) for p in self.inflections(lo, hi))
        if len(pts) > 10_000:
            raise ValueError(f"{self.name}: too many inflection points on [{lo}, {hi}]")
        return [p for p in pts if lo <= p <= hi]

    def range(self, lo: float, hi: float) -> Tuple[float, float]:
        # dense sampling plus slope-based padding keeps the bound conservative
        n = 512
        xs = [lo + (hi - lo) * i / n for i in range(n + 1)]
        vals = [self.value(x) for x in xs]
        slope = max(abs(self.deriv(x)) for x in xs)
        pad = slope * (hi - lo) / n
        return min(vals) - pad, max(vals) + pad

    def to_dict(self) -> dict:
        raise TypeError("user functions are not serializable")


def convexity(f, lo: float, hi: float) -> str:
    """'convex' or 'concave' for a sub-interval free of interior inflection points."""
    mid = 0.5 * (lo + hi)
    c = f.second(mid)
    if abs(c) > 1e-14:
        return "convex" if c > 0 else "concave"
    chord = 0.5 * (f.value(lo) + f.value(hi))
    return "convex" if f.value(mid) <= chord else "concave"


def make_function(kind: str, amplitude: float = 1.0, phase: float = 0.0,
                  frequency: float = 1.0):
    return Sinusoid(kind, amplitude, phase, frequency)
