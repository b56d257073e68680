"""Polyhedral cells around trig curves and bilinear surfaces, and their
incremental MILP encodings.

A trig term over a partition becomes one triangle per sub-interval (the two end
tangents and the secant).  A bilinear term ``z = x*y`` with ``x`` partitioned
becomes one tetrahedron per sub-rectangle.  Either list of cells is encoded with
ordered binaries ``u`` (``u_k = 1`` iff cell ``k`` has been passed) and step
variables ``delta`` in ``[0, 1]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .functions import convexity
from .milp.model import BINARY, MilpModel
from .partitioning import SLOPE_TOL, Partition

MEMBER_TOL = 1e-9

Point2 = Tuple[float, float]
Point3 = Tuple[float, float, float]


class DegenerateCellError(ValueError):
    pass


@dataclass(frozen=True)
class TriangleCell:
    v_left: Point2
    v_apex: Point2
    v_right: Point2
    sub_interval: Tuple[float, float]
    convexity: str

    @property
    def vertices(self) -> Tuple[Point2, Point2, Point2]:
        return self.v_left, self.v_apex, self.v_right


@dataclass(frozen=True)
class TetraCell:
    """Vertices ``(x_i, yL), (x_i, yU), (x_{i+1}, yU), (x_{i+1}, yL)`` lifted onto z = xy."""

    vertices: Tuple[Point3, Point3, Point3, Point3]
    sub_rectangle: Tuple[Tuple[float, float], Tuple[float, float]]


def tangent_apex(f, a: float, b: float) -> Point2:
    da, db = f.deriv(a), f.deriv(b)
    if abs(da - db) <= SLOPE_TOL:
        raise DegenerateCellError(f"parallel tangents on [{a}, {b}]")
    fa, fb = f.value(a), f.value(b)
    x = (fb - fa + da * a - db * b) / (da - db)
    return x, fa + da * (x - a)


def triangle_cells(f, p: Partition) -> List[TriangleCell]:
    cells = []
    for a, b in p.sub_intervals():
        apex = tangent_apex(f, a, b)
        cells.append(TriangleCell((a, f.value(a)), apex, (b, f.value(b)), (a, b),
                                  convexity(f, a, b)))
    return cells


def tetra_cells(p_x: Partition, y_domain: Tuple[float, float]) -> List[TetraCell]:
    yl, yu = float(y_domain[0]), float(y_domain[1])
    if not yu > yl:
        raise DegenerateCellError("degenerate y domain; the product is linear in x")
    cells = []
    for a, b in p_x.sub_intervals():
        verts = ((a, yl, a * yl), (a, yu, a * yu), (b, yu, b * yu), (b, yl, b * yl))
        cells.append(TetraCell(verts, ((a, b), (yl, yu))))
    return cells


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------

def _in_triangle(verts, pt, tol: float) -> bool:
    (ax, ay), (bx, by), (cx, cy) = verts
    px, py = pt
    area = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    if area == 0.0:
        return False
    sign = 1.0 if area > 0 else -1.0
    for (ux, uy), (vx, vy) in (((ax, ay), (bx, by)), ((bx, by), (cx, cy)), ((cx, cy), (ax, ay))):
        ex, ey = vx - ux, vy - uy
        length = (ex * ex + ey * ey) ** 0.5
        # signed distance of pt from edge u->v, positive on the interior side
        d = sign * (ex * (py - uy) - ey * (px - ux)) / length
        if d < -tol:
            return False
    return True


def _in_tetra(verts, pt, tol: float) -> bool:
    V = np.asarray(verts, dtype=float)
    P = np.asarray(pt, dtype=float)
    for skip in range(4):
        face = [V[k] for k in range(4) if k != skip]
        n = np.cross(face[1] - face[0], face[2] - face[0])
        norm = np.linalg.norm(n)
        if norm == 0.0:
            return False
        n = n / norm
        if np.dot(n, V[skip] - face[0]) < 0:
            n = -n
        if np.dot(n, P - face[0]) < -tol:
            return False
    return True


def cell_membership(cell, point, tol: float = MEMBER_TOL) -> bool:
    """True iff ``point`` lies in the convex hull of the cell's vertices."""
    if isinstance(cell, TriangleCell):
        return _in_triangle(cell.vertices, point, tol)
    return _in_tetra(cell.vertices, point, tol)


def owning_cell(cells: Sequence, x: float) -> int:
    """Index of the first cell whose x-range contains ``x``."""
    for k, c in enumerate(cells):
        lo, hi = c.sub_interval if isinstance(c, TriangleCell) else c.sub_rectangle[0]
        if lo <= x <= hi:
            return k
    raise ValueError(f"{x} outside all cells")


# ---------------------------------------------------------------------------
# incremental encodings
# ---------------------------------------------------------------------------

@dataclass
class RelaxationBlock:
    u: List[int]
    deltas: List[Tuple[int, ...]]
    rows: List[int] = field(default_factory=list)
    output_row: Optional[int] = None
    cells: list = field(default_factory=list, repr=False)

    @property
    def cell_vars(self) -> Dict[int, Tuple[Optional[int], Tuple[int, ...]]]:
        """cell index -> (binary that says the cell was passed, its deltas)."""
        return {k: (self.u[k] if k < len(self.u) else None, d) for k, d in enumerate(self.deltas)}


def _make_u(milp: MilpModel, m: int, prefix: str) -> List[int]:
    return [milp.add_var(f"{prefix}_u{k}", 0, 1, BINARY) for k in range(1, m)]


def _link_rows(milp: MilpModel, u: List[int], deltas, prefix: str) -> List[int]:
    rows = [milp.add_row({d: 1.0 for d in deltas[0]}, "<=", 1.0, f"{prefix}_first")]
    for i in range(1, len(deltas)):
        coeffs = {d: 1.0 for d in deltas[i]}
        coeffs[u[i - 1]] = -1.0
        rows.append(milp.add_row(coeffs, "<=", 0.0, f"{prefix}_in{i + 1}"))
        rows.append(milp.add_row({u[i - 1]: 1.0, deltas[i - 1][-1]: -1.0}, "<=", 0.0,
                                 f"{prefix}_pass{i}"))
    return rows


def build_trig_block(milp: MilpModel, cells: Sequence[TriangleCell], x_var: int, y_var: int,
                     u: Optional[List[int]] = None, prefix: str = "t") -> RelaxationBlock:
    m = len(cells)
    if m < 1:
        raise ValueError("need at least one cell")
    if u is None:
        u = _make_u(milp, m, prefix)
    if len(u) != m - 1:
        raise ValueError(f"{m} cells need {m - 1} binaries, got {len(u)}")
    deltas = [(milp.add_var(f"{prefix}_d{i}_1", 0, 1), milp.add_var(f"{prefix}_d{i}_2", 0, 1))
              for i in range(1, m + 1)]
    x_row = {x_var: 1.0}
    y_row = {y_var: 1.0}
    for (d1, d2), c in zip(deltas, cells):
        (lx, ly), (ax, ay), (rx, ry) = c.vertices
        x_row[d1] = -(ax - lx)
        x_row[d2] = -(rx - lx)
        y_row[d1] = -(ay - ly)
        y_row[d2] = -(ry - ly)
    x0, y0 = cells[0].v_left
    rows = [milp.add_row(x_row, "=", x0, f"{prefix}_x"), milp.add_row(y_row, "=", y0, f"{prefix}_y")]
    rows += _link_rows(milp, u, deltas, prefix)
    return RelaxationBlock(list(u), deltas, rows, rows[1], list(cells))


def build_bilinear_block(milp: MilpModel, cells: Sequence[TetraCell], x_var: int, y_var: int,
                         z_var: int, u: Optional[List[int]] = None,
                         prefix: str = "b") -> RelaxationBlock:
    """``x_var`` is the partitioned factor; ``y_var`` keeps its whole interval."""
    m = len(cells)
    if m < 1:
        raise ValueError("need at least one cell")
    if u is None:
        u = _make_u(milp, m, prefix)
    if len(u) != m - 1:
        raise ValueError(f"{m} cells need {m - 1} binaries, got {len(u)}")
    deltas = [tuple(milp.add_var(f"{prefix}_d{i}_{k}", 0, 1) for k in (1, 2, 3))
              for i in range(1, m + 1)]
    rows_xyz = [{x_var: 1.0}, {y_var: 1.0}, {z_var: 1.0}]
    for ds, c in zip(deltas, cells):
        v0 = c.vertices[0]
        for d, v in zip(ds, c.vertices[1:]):
            for axis in range(3):
                step = v[axis] - v0[axis]
                if step != 0.0:
                    rows_xyz[axis][d] = -step
    base = cells[0].vertices[0]
    rows = [milp.add_row(r, "=", base[axis], f"{prefix}_{'xyz'[axis]}")
            for axis, r in enumerate(rows_xyz)]
    rows += _link_rows(milp, u, deltas, prefix)
    return RelaxationBlock(list(u), deltas, rows, rows[2], list(cells))


def incremental_assignment(cells: Sequence, point) -> Dict[str, list]:
    """Values of ``u`` and ``delta`` that place ``point`` in the block, or raise.

    Useful to certify that a point of the curve (or surface) is feasible for
    the encoding: the returned values satisfy every row of the block.
    """
    k = None
    for i, c in enumerate(cells):
        if cell_membership(c, point):
            k = i
            break
    if k is None:
        raise ValueError(f"{point} lies in no cell")
    c = cells[k]
    V = np.asarray(c.vertices, dtype=float)
    A = (V[1:] - V[0]).T
    coef, *_ = np.linalg.lstsq(A, np.asarray(point, dtype=float) - V[0], rcond=None)
    m = len(cells)
    u = [1.0 if j < k else 0.0 for j in range(m - 1)]
    dim = len(c.vertices) - 1
    deltas = []
    for i in range(m):
        if i < k:
            deltas.append([0.0] * (dim - 1) + [1.0])
        elif i == k:
            deltas.append([float(v) for v in np.clip(coef, 0.0, 1.0)])
        else:
            deltas.append([0.0] * dim)
    return {"cell": k, "u": u, "deltas": deltas}
