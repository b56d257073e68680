"""Shortest curvature-bounded paths between two oriented points (Dubins paths).

Each of the six words LSL, RSR, LSR, RSL, RLR, LRL has a closed-form solution in
normalized coordinates; every candidate is checked by integrating it from the
start configuration, so a formula slip can never produce a wrong endpoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

TWO_PI = 2.0 * math.pi
WORDS = ("LSL", "RSR", "LSR", "RSL", "RLR", "LRL")
ENDPOINT_TOL = 1e-6
ZERO_SEGMENT = 1e-12


def mod2pi(a: float) -> float:
    r = math.fmod(a, TWO_PI)
    if r < 0:
        r += TWO_PI
    # fmod can land exactly on 2*pi after the correction
    return 0.0 if r >= TWO_PI else r


@dataclass(frozen=True)
class Configuration:
    x: float
    y: float
    heading: float

    def __post_init__(self):
        object.__setattr__(self, "heading", mod2pi(float(self.heading)))

    def as_tuple(self) -> Tuple[float, float, float]:
        return self.x, self.y, self.heading


@dataclass(frozen=True)
class DubinsPath:
    word: str
    segment_lengths: Tuple[float, float, float]
    radius: float

    @property
    def total_length(self) -> float:
        return sum(self.segment_lengths)

    @property
    def is_ccc(self) -> bool:
        return self.word in ("RLR", "LRL")


def _normalized(q0: Configuration, q1: Configuration, rho: float):
    dx, dy = q1.x - q0.x, q1.y - q0.y
    d = math.hypot(dx, dy) / rho
    phi = math.atan2(dy, dx) if d > 0 else 0.0
    return d, mod2pi(q0.heading - phi), mod2pi(q1.heading - phi)


def _word_params(word: str, d: float, a: float, b: float) -> List[Tuple[float, float, float]]:
    """Candidate normalized (t, p, q) triples for ``word``; empty if infeasible."""
    sa, sb, ca, cb = math.sin(a), math.sin(b), math.cos(a), math.cos(b)
    cab = math.cos(a - b)
    if word == "LSL":
        p2 = 2 + d * d - 2 * cab + 2 * d * (sa - sb)
        if p2 < 0:
            return []
        tmp = math.atan2(cb - ca, d + sa - sb)
        return [(mod2pi(tmp - a), math.sqrt(p2), mod2pi(b - tmp))]
    if word == "RSR":
        p2 = 2 + d * d - 2 * cab + 2 * d * (sb - sa)
        if p2 < 0:
            return []
        tmp = math.atan2(ca - cb, d - sa + sb)
        return [(mod2pi(a - tmp), math.sqrt(p2), mod2pi(tmp - b))]
    if word == "LSR":
        p2 = -2 + d * d + 2 * cab + 2 * d * (sa + sb)
        if p2 < 0:
            return []
        p = math.sqrt(p2)
        tmp = math.atan2(-ca - cb, d + sa + sb) - math.atan2(-2.0, p)
        return [(mod2pi(tmp - a), p, mod2pi(tmp - b))]
    if word == "RSL":
        p2 = d * d - 2 + 2 * cab - 2 * d * (sa + sb)
        if p2 < 0:
            return []
        p = math.sqrt(p2)
        tmp = math.atan2(ca + cb, d - sa - sb) - math.atan2(2.0, p)
        return [(mod2pi(a - tmp), p, mod2pi(b - tmp))]
    if word == "RLR":
        c = (6 - d * d + 2 * cab + 2 * d * (sa - sb)) / 8
        if abs(c) > 1:
            return []
        out = []
        for p in {mod2pi(TWO_PI - math.acos(c)), math.acos(c)}:
            t = mod2pi(a - math.atan2(ca - cb, d - sa + sb) + p / 2)
            out.append((t, p, mod2pi(a - b - t + p)))
        return out
    if word == "LRL":
        c = (6 - d * d + 2 * cab + 2 * d * (sb - sa)) / 8
        if abs(c) > 1:
            return []
        out = []
        for p in {mod2pi(TWO_PI - math.acos(c)), math.acos(c)}:
            t = mod2pi(-a + math.atan2(cb - ca, d + sa - sb) + p / 2)
            out.append((t, p, mod2pi(b - a - t + p)))
        return out
    raise ValueError(f"unknown word {word!r}")


def _step(x: float, y: float, h: float, kind: str, length: float, rho: float):
    if kind == "S":
        return x + length * math.cos(h), y + length * math.sin(h), h
    phi = length / rho
    if kind == "L":
        cx, cy = x - rho * math.sin(h), y + rho * math.cos(h)
        h2 = h + phi
        return cx + rho * math.sin(h2), cy - rho * math.cos(h2), h2
    cx, cy = x + rho * math.sin(h), y - rho * math.cos(h)
    h2 = h - phi
    return cx - rho * math.sin(h2), cy + rho * math.cos(h2), h2


def reconstruct_endpoint(q0: Configuration, path: DubinsPath) -> Configuration:
    x, y, h = q0.x, q0.y, q0.heading
    for kind, length in zip(path.word, path.segment_lengths):
        x, y, h = _step(x, y, h, kind, length, path.radius)
    return Configuration(x, y, h)


def endpoint_error(q0: Configuration, q1: Configuration, path: DubinsPath) -> float:
    e = reconstruct_endpoint(q0, path)
    dh = abs(mod2pi(e.heading - q1.heading + math.pi) - math.pi)
    return max(math.hypot(e.x - q1.x, e.y - q1.y), path.radius * dh)


def word_path(word: str, q0: Configuration, q1: Configuration, rho: float) -> Optional[DubinsPath]:
    """Shortest valid path of the given word, or None when the word is infeasible."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    d, a, b = _normalized(q0, q1, rho)
    best = None
    for t, p, q in _word_params(word, d, a, b):
        # mod2pi can turn a zero-length arc into a full circle
        segs = []
        for kind, s in zip(word, (t, p, q)):
            if s * rho < ZERO_SEGMENT or kind != "S" and s > TWO_PI - 1e-10:
                s = 0.0
            segs.append(s * rho)
        segs = tuple(segs)
        path = DubinsPath(word, segs, rho)
        if endpoint_error(q0, q1, path) > ENDPOINT_TOL:
            continue
        if best is None or path.total_length < best.total_length:
            best = path
    return best


def dubins_candidates(q0: Configuration, q1: Configuration, rho: float) -> List[DubinsPath]:
    out = []
    for w in WORDS:
        p = word_path(w, q0, q1, rho)
        if p is not None:
            out.append(p)
    return out


def dubins_shortest_path(q0: Configuration, q1: Configuration, rho: float) -> DubinsPath:
    cands = dubins_candidates(q0, q1, rho)
    if not cands:  # pragma: no cover - some CSC word always exists
        raise RuntimeError(f"no Dubins path between {q0} and {q1}")
    return min(cands, key=lambda p: (p.total_length, WORDS.index(p.word)))


def dubins_length(q0: Configuration, q1: Configuration, rho: float) -> float:
    return dubins_shortest_path(q0, q1, rho).total_length


def sample_path(q0: Configuration, path: DubinsPath, step: float = 0.05) -> List[Tuple[float, float]]:
    """Polyline samples along ``path`` roughly ``step`` apart, endpoints included."""
    pts = [(q0.x, q0.y)]
    x, y, h = q0.x, q0.y, q0.heading
    for kind, length in zip(path.word, path.segment_lengths):
        n = max(1, int(math.ceil(length / step)))
        for k in range(1, n + 1):
            px, py, _ = _step(x, y, h, kind, length * k / n, path.radius)
            pts.append((px, py))
        x, y, h = _step(x, y, h, kind, length, path.radius)
    return pts


# ---------------------------------------------------------------------------
# vectorized lengths for the dynamic-programming oracle
# ---------------------------------------------------------------------------

def _vmod(a):
    r = np.mod(a, TWO_PI)
    return np.where(r > TWO_PI - 1e-10, 0.0, r)


def dubins_lengths_batch(x0, y0, h0, x1, y1, h1, rho: float) -> np.ndarray:
    """Shortest Dubins lengths for broadcastable arrays of start/end configurations."""
    x0, y0, h0, x1, y1, h1 = np.broadcast_arrays(*(np.asarray(v, dtype=float)
                                                    for v in (x0, y0, h0, x1, y1, h1)))
    dx, dy = x1 - x0, y1 - y0
    d = np.hypot(dx, dy) / rho
    phi = np.where(d > 0, np.arctan2(dy, dx), 0.0)
    a, b = _vmod(h0 - phi), _vmod(h1 - phi)
    sa, sb, ca, cb = np.sin(a), np.sin(b), np.cos(a), np.cos(b)
    cab = np.cos(a - b)
    best = np.full(d.shape, np.inf)
    with np.errstate(invalid="ignore"):
        p2 = 2 + d * d - 2 * cab + 2 * d * (sa - sb)
        tmp = np.arctan2(cb - ca, d + sa - sb)
        L = _vmod(tmp - a) + np.sqrt(p2) + _vmod(b - tmp)
        best = np.where(p2 >= 0, np.minimum(best, L), best)

        p2 = 2 + d * d - 2 * cab + 2 * d * (sb - sa)
        tmp = np.arctan2(ca - cb, d - sa + sb)
        L = _vmod(a - tmp) + np.sqrt(p2) + _vmod(tmp - b)
        best = np.where(p2 >= 0, np.minimum(best, L), best)

        p2 = -2 + d * d + 2 * cab + 2 * d * (sa + sb)
        p = np.sqrt(p2)
        tmp = np.arctan2(-ca - cb, d + sa + sb) - np.arctan2(-2.0, p)
        L = _vmod(tmp - a) + p + _vmod(tmp - b)
        best = np.where(p2 >= 0, np.minimum(best, L), best)

        p2 = d * d - 2 + 2 * cab - 2 * d * (sa + sb)
        p = np.sqrt(p2)
        tmp = np.arctan2(ca + cb, d - sa - sb) - np.arctan2(2.0, p)
        L = _vmod(a - tmp) + p + _vmod(b - tmp)
        best = np.where(p2 >= 0, np.minimum(best, L), best)

        c = (6 - d * d + 2 * cab + 2 * d * (sa - sb)) / 8
        p = _vmod(TWO_PI - np.arccos(c))
        t = _vmod(a - np.arctan2(ca - cb, d - sa + sb) + p / 2)
        L = t + p + _vmod(a - b - t + p)
        best = np.where(np.abs(c) <= 1, np.minimum(best, L), best)

        c = (6 - d * d + 2 * cab + 2 * d * (sb - sa)) / 8
        p = _vmod(TWO_PI - np.arccos(c))
        t = _vmod(-a + np.arctan2(cb - ca, d + sa - sb) + p / 2)
        L = t + p + _vmod(b - a - t + p)
        best = np.where(np.abs(c) <= 1, np.minimum(best, L), best)
    return best * rho


def path_through(points: Sequence[Tuple[float, float]], headings: Sequence[float],
                 rho: float) -> List[DubinsPath]:
    """Per-leg shortest paths through ``points`` with the given heading at each point."""
    if len(points) != len(headings):
        raise ValueError("one heading per point")
    legs = []
    for (p, hp), (q, hq) in zip(zip(points, headings), zip(points[1:], headings[1:])):
        legs.append(dubins_shortest_path(Configuration(p[0], p[1], hp),
                                         Configuration(q[0], q[1], hq), rho))
    return legs
