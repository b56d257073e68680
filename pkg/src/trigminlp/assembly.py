"""Assemble the MILP relaxation of a factored model from its partitions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .milp.model import BINARY, MilpModel
from .model import BilinearTerm, FactoredModel
from .partitioning import Partition, base_partition
from .relaxation import (RelaxationBlock, build_bilinear_block, build_trig_block, tetra_cells,
                         triangle_cells)


def trig_id(k: int) -> str:
    return f"t{k}"


def bilinear_id(k: int) -> str:
    return f"b{k}"


def _fixed(model: FactoredModel, j: int) -> bool:
    v = model.variables[j]
    return v.lower == v.upper


def choose_partitioned_side(model: FactoredModel, b: BilinearTerm) -> str:
    """Explicit side, else the factor shared with other bilinear terms, else the wider one."""
    if b.partitioned_side in ("left", "right"):
        return b.partitioned_side
    uses: Dict[int, int] = {}
    for t in model.bilinear_terms:
        for j in (t.left, t.right):
            uses[j] = uses.get(j, 0) + 1
    if uses[b.left] != uses[b.right]:
        return "left" if uses[b.left] > uses[b.right] else "right"
    wl = model.variables[b.left].width
    wr = model.variables[b.right].width
    return "left" if wl >= wr else "right"


def bilinear_factors(model: FactoredModel, b: BilinearTerm) -> Tuple[int, int]:
    """(partitioned factor, other factor)."""
    if choose_partitioned_side(model, b) == "left":
        return b.left, b.right
    return b.right, b.left


def initial_partitions(model: FactoredModel) -> Dict[int, Partition]:
    """One shared partition per partitioned variable with a nonzero width."""
    trig_owners: Dict[int, List[int]] = {}
    for k, t in enumerate(model.trig_terms):
        if not _fixed(model, t.input):
            trig_owners.setdefault(t.input, []).append(k)
    bil_owners: Dict[int, List[int]] = {}
    for k, b in enumerate(model.bilinear_terms):
        px, other = bilinear_factors(model, b)
        if _fixed(model, px) or _fixed(model, other):
            continue
        bil_owners.setdefault(px, []).append(k)
    parts: Dict[int, Partition] = {}
    for var in sorted(set(trig_owners) | set(bil_owners)):
        v = model.variables[var]
        owners = tuple(trig_id(k) for k in trig_owners.get(var, [])) + \
            tuple(bilinear_id(k) for k in bil_owners.get(var, []))
        terms = [model.trig_terms[k] for k in trig_owners.get(var, [])]
        if terms:
            p = base_partition(terms, (v.lower, v.upper), var, owners)
        else:
            p = Partition((v.lower, v.upper), owners, var)
        parts[var] = p
    return parts


def owner_descriptors(model: FactoredModel, p: Partition) -> List[tuple]:
    out = []
    for o in p.owners:
        k = int(o[1:])
        if o[0] == "t":
            t = model.trig_terms[k]
            out.append((t.function, t.input, t.output))
        else:
            b = model.bilinear_terms[k]
            px, other = bilinear_factors(model, b)
            out.append(("bilinear", px, other, b.output))
    return out


@dataclass
class Relaxation:
    milp: MilpModel
    blocks: Dict[str, RelaxationBlock] = field(default_factory=dict)
    shared_u: Dict[int, List[int]] = field(default_factory=dict)


def build_relaxation(model: FactoredModel, partitions: Dict[int, Partition],
                     priorities: Sequence[int] = (), warm_start: Optional[Dict[int, float]] = None
                     ) -> Relaxation:
    """MILP whose first ``model.n`` variables are the model's own variables."""
    milp = MilpModel(model.name)
    for v in model.variables:
        milp.add_var(v.name, v.lower, v.upper, v.integrality)
    for c in model.constraints:
        milp.add_row(c.coefficients, c.sense, c.rhs, c.name)
    milp.set_objective(model.objective.coefficients, model.objective.constant)
    rel = Relaxation(milp)
    covered = set()
    for var in sorted(partitions):
        p = partitions[var]
        u = [milp.add_var(f"p{var}_u{k}", 0, 1, BINARY) for k in range(1, p.cells)]
        if u:
            milp.chains.append(u)
        rel.shared_u[var] = u
        for o in p.owners:
            k = int(o[1:])
            if o[0] == "t":
                t = model.trig_terms[k]
                cells = triangle_cells(t.function, p)
                rel.blocks[o] = build_trig_block(milp, cells, t.input, t.output, u, f"t{k}")
            else:
                b = model.bilinear_terms[k]
                px, other = bilinear_factors(model, b)
                ov = model.variables[other]
                cells = tetra_cells(p, (ov.lower, ov.upper))
                rel.blocks[o] = build_bilinear_block(milp, cells, px, other, b.output, u, f"b{k}")
            covered.add(o)
    # terms whose inputs are fixed are exact linear rows
    for k, t in enumerate(model.trig_terms):
        if trig_id(k) in covered:
            continue
        x0 = model.variables[t.input].lower
        if not _fixed(model, t.input):
            raise ValueError(f"trig term {k} has no partition")
        milp.add_row({t.output: 1.0}, "=", t.function.value(x0), f"t{k}_fixed")
    for k, b in enumerate(model.bilinear_terms):
        if bilinear_id(k) in covered:
            continue
        px, other = bilinear_factors(model, b)
        if _fixed(model, other):
            milp.add_row({b.output: 1.0, px: -model.variables[other].lower}, "=", 0.0,
                         f"b{k}_fixed")
        elif _fixed(model, px):
            milp.add_row({b.output: 1.0, other: -model.variables[px].lower}, "=", 0.0,
                         f"b{k}_fixed")
        else:
            raise ValueError(f"bilinear term {k} has no partition")
    n = len(priorities)
    for rank, j in enumerate(priorities):
        milp.priorities[j] = n - rank
    if warm_start:
        milp.warm_start = {j: v for j, v in warm_start.items() if j < model.n}
    return rel


def count_relaxation_vars(rel: Relaxation) -> Tuple[int, int]:
    """(binaries added by partitions, step variables per block summed)."""
    binaries = sum(len(u) for u in rel.shared_u.values())
    deltas = sum(len(b.deltas) * len(b.deltas[0]) for b in rel.blocks.values())
    return binaries, deltas


__all__ = ["Relaxation", "bilinear_factors", "build_relaxation", "choose_partitioned_side",
           "count_relaxation_vars", "initial_partitions", "owner_descriptors"]
