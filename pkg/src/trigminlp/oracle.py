"""Dynamic program over a heading grid at the intermediate waypoints.

Gives an upper bound on the shortest path through the waypoints that is within
``2 * (2 pi / K) * rho`` per intermediate point of the true optimum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .dubins import dubins_lengths_batch, path_through
from .mdppp import MdpppInstance, MdpppPath

DEFAULT_HEADINGS = 256


@dataclass
class OracleResult:
    length: float
    headings: List[float]
    grid: int
    slack: float
    path: MdpppPath


def discretization_slack(inst: MdpppInstance, grid: int = DEFAULT_HEADINGS) -> float:
    return 2.0 * (2.0 * math.pi / grid) * inst.rho * max(0, inst.n - 2)


def dp_oracle(inst: MdpppInstance, grid: int = DEFAULT_HEADINGS) -> OracleResult:
    pts = np.asarray(inst.points, dtype=float)
    grid_h = 2.0 * np.pi * np.arange(grid) / grid
    n = len(pts)
    if n == 2:
        heads = [inst.theta_start, inst.theta_end]
    else:
        # cost[k]: best length to point j arriving with heading grid_h[k]
        cost = dubins_lengths_batch(pts[0, 0], pts[0, 1], inst.theta_start,
                                    pts[1, 0], pts[1, 1], grid_h, inst.rho)
        back = []
        for j in range(1, n - 2):
            step = dubins_lengths_batch(pts[j, 0], pts[j, 1], grid_h[:, None],
                                        pts[j + 1, 0], pts[j + 1, 1], grid_h[None, :], inst.rho)
            total = cost[:, None] + step
            arg = np.argmin(total, axis=0)
            back.append(arg)
            cost = total[arg, np.arange(grid)]
        last = dubins_lengths_batch(pts[n - 2, 0], pts[n - 2, 1], grid_h,
                                    pts[n - 1, 0], pts[n - 1, 1], inst.theta_end, inst.rho)
        k = int(np.argmin(cost + last))
        ks = [k]
        for arg in reversed(back):
            k = int(arg[k])
            ks.append(k)
        heads = [inst.theta_start] + [float(grid_h[k]) for k in reversed(ks)] + [inst.theta_end]
    legs = path_through(inst.points, heads, inst.rho)
    path = MdpppPath(heads, legs)
    return OracleResult(path.length, heads, grid, discretization_slack(inst, grid), path)
