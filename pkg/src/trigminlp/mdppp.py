"""Shortest curvature-bounded path through an ordered list of waypoints.

Each stage (leg between consecutive waypoints) is modelled as an L-R-S-L-R
sequence of segments with lengths ``xi_1..xi_5``; any Dubins word is a
sub-sequence of it.  Headings at the end of each turn are chained linearly
and enter the displacement rows through their sines and cosines.
"""
from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .dubins import (Configuration, DubinsPath, dubins_shortest_path, mod2pi, path_through,
                     sample_path)
from .model import (BINARY, CONTINUOUS, FactoredModel, LinearConstraint, ModelBuilder,
                    VarDomain)

TWO_PI = 2.0 * math.pi
ANGLES = (0, 1, 2, 4, 5)
THETA_DOMAINS = {0: (0.0, TWO_PI), 1: (0.0, 2 * TWO_PI), 2: (-TWO_PI, 2 * TWO_PI),
                 4: (-TWO_PI, 2 * TWO_PI), 5: (-2 * TWO_PI, 2 * TWO_PI)}
# which of the five slots each Dubins word occupies
WORD_SLOTS = {"LSL": (1, 3, 4), "LSR": (1, 3, 5), "RSL": (2, 3, 4), "RSR": (2, 3, 5),
              "LRL": (1, 2, 4), "RLR": (2, 4, 5)}


@dataclass(frozen=True)
class MdpppInstance:
    points: Tuple[Tuple[float, float], ...]
    rho: float = 1.0
    theta_start: float = 0.0
    theta_end: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "points", tuple((float(x), float(y)) for x, y in self.points))
        if len(self.points) < 2:
            raise ValueError("need at least two points")
        if not self.rho > 0:
            raise ValueError("rho must be positive")

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def stages(self) -> int:
        return len(self.points) - 1

    def spacing(self, i: int) -> float:
        """Distance between the endpoints of stage ``i`` (0-based)."""
        (a, b), (c, d) = self.points[i], self.points[i + 1]
        return math.hypot(c - a, d - b)

    def to_dict(self) -> dict:
        return {"points": [list(p) for p in self.points], "rho": self.rho,
                "theta_start": self.theta_start, "theta_end": self.theta_end}

    @classmethod
    def from_dict(cls, d: dict) -> "MdpppInstance":
        return cls(tuple(tuple(p) for p in d["points"]), float(d.get("rho", 1.0)),
                   float(d.get("theta_start", 0.0)), float(d.get("theta_end", 0.0)))


def save_instance(inst: MdpppInstance, path) -> None:
    with open(path, "w") as fh:
        json.dump(inst.to_dict(), fh, indent=2)
        fh.write("\n")


def load_instance(path) -> MdpppInstance:
    with open(path) as fh:
        return MdpppInstance.from_dict(json.load(fh))


@dataclass
class StageVars:
    xi: Dict[int, int]
    theta: Dict[int, int]
    w: Dict[int, int]
    z: Dict[int, int]
    mu: int
    nu: int
    beta: Dict[int, int] = field(default_factory=dict)
    big_m: Dict[int, float] = field(default_factory=dict)


@dataclass
class MdpppModel:
    instance: MdpppInstance
    model: FactoredModel
    stages: List[StageVars]
    cuts: bool = False


def build_mdppp_model(inst: MdpppInstance) -> MdpppModel:
    rho = inst.rho
    b = ModelBuilder(f"mdppp_n{inst.n}")
    stages: List[StageVars] = []
    for i in range(inst.stages):
        s = i + 1
        big_m = {j: TWO_PI * rho for j in (1, 2, 4, 5)}
        big_m[3] = inst.spacing(i) + 4 * rho
        xi = {j: b.var(f"xi{s}_{j}", 0.0, big_m[j]) for j in range(1, 6)}
        theta = {}
        for j in ANGLES:
            lo, hi = THETA_DOMAINS[j]
            theta[j] = b.var(f"th{s}_{j}", lo, hi)
        w = {j: b.var(f"w{s}_{j}", -1.0, 1.0) for j in ANGLES}
        z = {j: b.var(f"z{s}_{j}", -1.0, 1.0) for j in ANGLES}
        m3 = big_m[3]
        mu = b.var(f"mu{s}", -m3, m3)
        nu = b.var(f"nu{s}", -m3, m3)
        stages.append(StageVars(xi, theta, w, z, mu, nu, big_m=big_m))
    # boundary headings
    first, last = stages[0], stages[-1]
    th0 = mod2pi(inst.theta_start)
    b.variables[first.theta[0]] = replace(b.variables[first.theta[0]], lower=th0, upper=th0)
    for var, val in ((last.w[5], math.sin(inst.theta_end)), (last.z[5], math.cos(inst.theta_end))):
        b.variables[var] = replace(b.variables[var], lower=val, upper=val)
    for i, st in enumerate(stages):
        s = i + 1
        (x0, y0), (x1, y1) = inst.points[i], inst.points[i + 1]
        b.constrain({st.w[0]: -rho, st.w[1]: 2 * rho, st.w[2]: -2 * rho, st.w[4]: 2 * rho,
                     st.w[5]: -rho, st.mu: 1.0}, "=", x1 - x0, f"dx{s}")
        b.constrain({st.z[0]: rho, st.z[1]: -2 * rho, st.z[2]: 2 * rho, st.z[4]: -2 * rho,
                     st.z[5]: rho, st.nu: 1.0}, "=", y1 - y0, f"dy{s}")
        for j in ANGLES:
            b.trig(st.w[j], st.theta[j], "sin")
            b.trig(st.z[j], st.theta[j], "cos")
        b.bilinear(st.mu, st.xi[3], st.z[2], "left")
        b.bilinear(st.nu, st.xi[3], st.w[2], "left")
        # heading after each turn: left turns add, right turns subtract
        for src, dst, seg, sign in ((0, 1, 1, 1.0), (1, 2, 2, -1.0), (2, 4, 4, 1.0), (4, 5, 5, -1.0)):
            b.constrain({st.theta[dst]: 1.0, st.theta[src]: -1.0, st.xi[seg]: -sign / rho},
                        "=", 0.0, f"turn{s}_{dst}")
            b.link(st.theta[src], st.theta[dst], st.xi[seg], sign / rho)
    for i in range(len(stages) - 1):
        a, c = stages[i], stages[i + 1]
        b.constrain({c.w[0]: 1.0, a.w[5]: -1.0}, "=", 0.0, f"wcont{i + 1}")
        b.constrain({c.z[0]: 1.0, a.z[5]: -1.0}, "=", 0.0, f"zcont{i + 1}")
    b.minimize({st.xi[j]: 1.0 for st in stages for j in range(1, 6)})
    return MdpppModel(inst, b.build(), stages, cuts=False)


def _extend(model: FactoredModel, variables: Sequence[VarDomain],
            rows: Sequence[LinearConstraint]) -> FactoredModel:
    return replace(model, variables=model.variables + tuple(variables),
                   constraints=model.constraints + tuple(rows))


def csc_stage(inst: MdpppInstance, i: int) -> bool:
    return inst.spacing(i) >= 4 * inst.rho - 1e-12


def apply_optimality_cuts(mm: MdpppModel) -> MdpppModel:
    """Segment-count binaries and, where waypoints are far apart, CSC structure."""
    if mm.cuts:
        return mm
    inst, model = mm.instance, mm.model
    rho = inst.rho
    new_vars: List[VarDomain] = []
    rows: List[LinearConstraint] = []
    stages = []
    n = model.n
    for i, st in enumerate(mm.stages):
        s = i + 1
        beta = {}
        for j in range(1, 6):
            beta[j] = n + len(new_vars)
            new_vars.append(VarDomain(f"beta{s}_{j}", 0.0, 1.0, BINARY))
        rows.append(LinearConstraint({beta[j]: 1.0 for j in range(1, 6)}, "<=", 3.0, f"card{s}"))
        for j in range(1, 6):
            rows.append(LinearConstraint({st.xi[j]: 1.0, beta[j]: -st.big_m[j]}, "<=", 0.0,
                                         f"use{s}_{j}"))
        if csc_stage(inst, i):
            rows.append(LinearConstraint({beta[1]: 1.0, beta[2]: 1.0}, "<=", 1.0, f"csc{s}_first"))
            rows.append(LinearConstraint({beta[3]: 1.0}, "=", 1.0, f"csc{s}_straight"))
            rows.append(LinearConstraint({beta[4]: 1.0, beta[5]: 1.0}, "<=", 1.0, f"csc{s}_last"))
        stages.append(replace(st, beta=beta))
    for i in range(len(stages) - 1):
        if not (csc_stage(inst, i) and csc_stage(inst, i + 1)):
            continue
        a, c = stages[i], stages[i + 1]
        s = i + 1
        rows.append(LinearConstraint({a.beta[4]: 1.0, c.beta[1]: -1.0}, "=", 0.0, f"turnkind{s}_l"))
        rows.append(LinearConstraint({a.beta[5]: 1.0, c.beta[2]: -1.0}, "=", 0.0, f"turnkind{s}_r"))
        rows.append(LinearConstraint({a.xi[4]: 1.0, c.xi[1]: -1.0}, "=", 0.0, f"turnlen{s}_l"))
        rows.append(LinearConstraint({a.xi[5]: 1.0, c.xi[2]: -1.0}, "=", 0.0, f"turnlen{s}_r"))
        rows.append(LinearConstraint({c.xi[1]: 1.0, c.xi[2]: 1.0}, "<=", math.pi * rho,
                                     f"halfturn{s + 1}"))
    return MdpppModel(inst, _extend(model, new_vars, rows), stages, cuts=True)


def generate_instance(n: int, seed: int, grid: float = 10.0, rho: float = 1.0,
                      max_tries: int = 100_000) -> MdpppInstance:
    """Random waypoints in a ``grid`` square, consecutive ones at least ``4 rho`` apart."""
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = random.Random(seed)
    tries = 0
    points = [(rng.uniform(0, grid), rng.uniform(0, grid))]
    while len(points) < n:
        tries += 1
        if tries > max_tries:
            raise RuntimeError(f"could not place {n} points after {max_tries} tries")
        p = (rng.uniform(0, grid), rng.uniform(0, grid))
        if math.dist(p, points[-1]) >= 4 * rho:
            points.append(p)
    return MdpppInstance(tuple(points), rho, rng.uniform(0, TWO_PI), rng.uniform(0, TWO_PI))


# ---------------------------------------------------------------------------
# upper bounds and solution reconstruction
# ---------------------------------------------------------------------------

@dataclass
class MdpppPath:
    headings: List[float]
    legs: List[DubinsPath]

    @property
    def length(self) -> float:
        return sum(leg.total_length for leg in self.legs)


def heading_heuristic(mm: MdpppModel, values: Sequence[float]) -> MdpppPath:
    """Dubins legs through the stage-start headings of a relaxation solution."""
    inst = mm.instance
    heads = [inst.theta_start]
    heads += [values[st.theta[0]] for st in mm.stages[1:]]
    heads.append(inst.theta_end)
    legs = path_through(inst.points, heads, inst.rho)
    return MdpppPath([mod2pi(h) for h in heads], legs)


class MdpppHeuristic:
    """Upper-bound callback for the driver."""

    def __init__(self, mm: MdpppModel):
        self.mm = mm

    def __call__(self, values: Sequence[float]):
        path = heading_heuristic(self.mm, values)
        return path.length, path


def path_values(mm: MdpppModel, path: MdpppPath) -> List[float]:
    """Full variable vector of the (cut) model for a path of Dubins legs.

    Values of variables appended after the path model (e.g. by the principal
    domain fold) are not set.
    """
    model = mm.model
    x = [0.0] * model.n
    rho = mm.instance.rho
    for st, leg, h0 in zip(mm.stages, path.legs, path.headings):
        xi = {j: 0.0 for j in range(1, 6)}
        for slot, length in zip(WORD_SLOTS[leg.word], leg.segment_lengths):
            xi[slot] = length
        th = {0: h0}
        th[1] = th[0] + xi[1] / rho
        th[2] = th[1] - xi[2] / rho
        th[4] = th[2] + xi[4] / rho
        th[5] = th[4] - xi[5] / rho
        for j in range(1, 6):
            x[st.xi[j]] = xi[j]
        for j in ANGLES:
            x[st.theta[j]] = th[j]
            x[st.w[j]] = math.sin(th[j])
            x[st.z[j]] = math.cos(th[j])
        x[st.mu] = xi[3] * math.cos(th[2])
        x[st.nu] = xi[3] * math.sin(th[2])
        for j, bj in st.beta.items():
            x[bj] = 1.0 if xi[j] > 0 else 0.0
    return x


def integrate_stage(start: Tuple[float, float], values: Sequence[float], st: StageVars,
                    rho: float) -> Tuple[float, float]:
    """Endpoint of the L-R-S-L-R path encoded by a stage's values."""
    x, y = start
    th = {j: values[st.theta[j]] for j in ANGLES}
    xi = {j: values[st.xi[j]] for j in range(1, 6)}
    x += rho * (math.sin(th[1]) - math.sin(th[0]))
    y += rho * (math.cos(th[0]) - math.cos(th[1]))
    x += rho * (math.sin(th[1]) - math.sin(th[2]))
    y += rho * (math.cos(th[2]) - math.cos(th[1]))
    x += xi[3] * math.cos(th[2])
    y += xi[3] * math.sin(th[2])
    x += rho * (math.sin(th[4]) - math.sin(th[2]))
    y += rho * (math.cos(th[2]) - math.cos(th[4]))
    x += rho * (math.sin(th[4]) - math.sin(th[5]))
    y += rho * (math.cos(th[5]) - math.cos(th[4]))
    return x, y


def export_path(inst: MdpppInstance, path: MdpppPath, csv_path, json_path=None,
                step: float = 0.05) -> None:
    """Polyline samples as CSV and per-stage words and lengths as JSON."""
    with open(csv_path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["stage", "x", "y"])
        for s, (p, h, leg) in enumerate(zip(inst.points, path.headings, path.legs), start=1):
            for x, y in sample_path(Configuration(p[0], p[1], h), leg, step):
                wr.writerow([s, f"{x:.6f}", f"{y:.6f}"])
    if json_path is not None:
        doc = {"length": path.length, "stages": [
            {"word": leg.word, "segments": list(leg.segment_lengths),
             "start_heading": h, "length": leg.total_length}
            for h, leg in zip(path.headings, path.legs)]}
        with open(json_path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
