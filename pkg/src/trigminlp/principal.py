"""Folding periodic trig inputs onto a one-period window.

An input ``x`` whose interval is not already inside the window ``[a, a + T]``
gets a copy ``x_hat`` in the window and an integer offset ``alpha`` with
``x_hat = x - alpha * T``.  All trig terms on ``x`` then read ``x_hat``, so
their partitions cover a single period and every refinement applies to all
shifted copies at once.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .model import INTEGER, FactoredModel, LinearConstraint, VarDomain

log = logging.getLogger(__name__)

TOL = 1e-9


@dataclass(frozen=True)
class PrincipalReformulation:
    original_var: int
    hat_var: int
    alpha_var: Optional[int]
    period: float
    principal: Tuple[float, float]
    original_domain: Tuple[float, float]
    alpha_lower: int
    alpha_upper: int
    row: Optional[int] = None

    @property
    def identity(self) -> bool:
        return self.alpha_var is None


@dataclass(frozen=True)
class AlphaLink:
    alpha_1: int
    alpha_2: int
    lower: Optional[int]
    upper: Optional[int]


def alpha_bounds(original: Tuple[float, float], principal: Tuple[float, float],
                 T: float) -> Tuple[int, int]:
    xl, xu = original
    hl, hu = principal
    if abs((hu - hl) - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"principal width {hu - hl} differs from the period {T}")
    lo = math.floor((xl - hl) / T + TOL)
    hi = math.ceil((xu - hu) / T - TOL)
    # keep only offsets whose shifted window meets the original interval
    lo = max(lo, math.ceil((xl - hu) / T - TOL))
    hi = min(hi, math.floor((xu - hl) / T + TOL))
    return lo, hi


def _period_of(model: FactoredModel, var: int) -> Optional[float]:
    periods = []
    for t in model.trig_terms:
        if t.input == var:
            p = getattr(t.function, "period", None)
            if p is None:
                return None
            periods.append(p)
    if not periods or max(periods) - min(periods) > 1e-12 * max(periods):
        return None
    return periods[0]


def _contains(outer: Tuple[float, float], inner: Tuple[float, float]) -> bool:
    return outer[0] - TOL <= inner[0] and inner[1] <= outer[1] + TOL


def reformulate_variable(model: FactoredModel, var: int, principal: Tuple[float, float],
                         period: Optional[float] = None
                         ) -> Tuple[FactoredModel, PrincipalReformulation]:
    T = period if period is not None else _period_of(model, var)
    if T is None:
        raise ValueError(f"trig terms on variable {var} do not share a period")
    principal = (float(principal[0]), float(principal[1]))
    if abs(principal[1] - principal[0] - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"principal width {principal[1] - principal[0]} differs from period {T}")
    v = model.variables[var]
    dom = (v.lower, v.upper)
    if not v.bounded:
        raise ValueError(f"variable {v.name} is unbounded")
    if _contains(principal, dom):
        return model, PrincipalReformulation(var, var, None, T, principal, dom, 0, 0)
    a_lo, a_hi = alpha_bounds(dom, principal, T)
    n = model.n
    hat = VarDomain(f"{v.name}_hat", principal[0], principal[1])
    alpha = VarDomain(f"{v.name}_alpha", float(a_lo), float(a_hi), INTEGER)
    row = LinearConstraint({var: 1.0, n: -1.0, n + 1: -T}, "=", 0.0, f"{v.name}_fold")
    trig = tuple(replace(t, input=n) if t.input == var else t for t in model.trig_terms)
    new = replace(model, variables=model.variables + (hat, alpha),
                  constraints=model.constraints + (row,), trig_terms=trig)
    ref = PrincipalReformulation(var, n, n + 1, T, principal, dom, a_lo, a_hi,
                                 len(new.constraints) - 1)
    return new, ref


def reformulate_periodic_term(term_index: int, principal: Tuple[float, float],
                              model: FactoredModel
                              ) -> Tuple[FactoredModel, PrincipalReformulation]:
    """Fold the input of trig term ``term_index`` (and of every term sharing it)."""
    return reformulate_variable(model, model.trig_terms[term_index].input, principal)


def apply_principal_domains(model: FactoredModel,
                            overrides: Optional[Dict[int, Tuple[float, float]]] = None
                            ) -> Tuple[FactoredModel, List[PrincipalReformulation]]:
    """Fold every periodic trig input; the window defaults to ``[0, T]``."""
    overrides = overrides or {}
    refs = []
    inputs = list(dict.fromkeys(t.input for t in model.trig_terms))
    for var in inputs:
        T = _period_of(model, var)
        if T is None:
            log.info("variable %s: no common period, left unfolded", model.variables[var].name)
            continue
        if not model.variables[var].bounded:
            continue
        principal = overrides.get(var, (0.0, T))
        model, ref = reformulate_variable(model, var, principal, T)
        refs.append(ref)
    return model, refs


def link_alphas(ref1: PrincipalReformulation, ref2: PrincipalReformulation, K1: float,
                K2: float, theta1_domain: Tuple[float, float],
                theta2_domain: Optional[Tuple[float, float]] = None) -> AlphaLink:
    """Integer bounds on ``alpha_2 - alpha_1`` when ``theta_2 = h(theta_1)``, ``K1 <= h <= K2``.

    A side is only emitted when its ``K`` lies in the domain of ``theta_2``.
    """
    if ref1.alpha_var is None or ref2.alpha_var is None:
        raise ValueError("both variables need an offset variable")
    if abs(ref1.period - ref2.period) > 1e-12 or ref1.principal != ref2.principal:
        raise ValueError("linked variables must share period and window")
    T = ref1.period
    t2 = theta2_domain if theta2_domain is not None else ref2.original_domain
    gamma_u = K2 - theta1_domain[1]
    gamma_l = theta1_domain[0] - K1
    upper = math.ceil(gamma_u / T - TOL) if t2[0] - TOL <= K2 <= t2[1] + TOL else None
    lower = -math.ceil(gamma_l / T - TOL) if t2[0] - TOL <= K1 <= t2[1] + TOL else None
    if lower is not None and upper is not None and lower > upper:
        raise ValueError(f"empty offset link [{lower}, {upper}]")
    return AlphaLink(ref1.alpha_var, ref2.alpha_var, lower, upper)


def add_alpha_links(model: FactoredModel, refs: Sequence[PrincipalReformulation]
                    ) -> Tuple[FactoredModel, List[AlphaLink]]:
    """Emit offset-link rows for every declared angle link between folded inputs."""
    by_var = {r.original_var: r for r in refs if not r.identity}
    links, rows = [], []
    for al in model.angle_links:
        r1, r2 = by_var.get(al.source), by_var.get(al.target)
        if r1 is None or r2 is None:
            continue
        v1, v2, s = model.variables[al.source], model.variables[al.target], model.variables[al.step]
        d1 = (v1.lower, v1.upper)
        d2 = (v2.lower, v2.upper)
        if not _contains(d2, d1):
            log.info("angle link %s -> %s: domains not nested, no offset link",
                     v1.name, v2.name)
            continue
        steps = (al.coefficient * s.lower, al.coefficient * s.upper)
        K1 = d1[0] + min(steps)
        K2 = d1[1] + max(steps)
        link = link_alphas(r1, r2, K1, K2, d1, d2)
        links.append(link)
        if link.lower is not None:
            rows.append(LinearConstraint({link.alpha_2: 1.0, link.alpha_1: -1.0}, ">=",
                                         float(link.lower), f"{v2.name}_link_lo"))
        if link.upper is not None:
            rows.append(LinearConstraint({link.alpha_2: 1.0, link.alpha_1: -1.0}, "<=",
                                         float(link.upper), f"{v2.name}_link_hi"))
    return replace(model, constraints=model.constraints + tuple(rows)), links


def branching_order(refs: Sequence[PrincipalReformulation],
                    links: Sequence[AlphaLink] = ()) -> List[int]:
    """Offset variables ordered along the link chains (sources before targets)."""
    alphas = [r.alpha_var for r in refs if r.alpha_var is not None]
    if len(alphas) > 1 and not links:
        log.warning("offset variables are not linked; using declaration order")
    pos = {a: i for i, a in enumerate(alphas)}
    indeg = {a: 0 for a in alphas}
    succ: Dict[int, List[int]] = {a: [] for a in alphas}
    for ln in links:
        if ln.alpha_1 in pos and ln.alpha_2 in pos:
            succ[ln.alpha_1].append(ln.alpha_2)
            indeg[ln.alpha_2] += 1
    order: List[int] = []
    ready = sorted((a for a in alphas if indeg[a] == 0), key=pos.get)
    while ready:
        a = ready.pop(0)
        order.append(a)
        for b in succ[a]:
            indeg[b] -= 1
            if indeg[b] == 0:
                ready.append(b)
                ready.sort(key=pos.get)
    if len(order) < len(alphas):  # cycle; fall back to declaration order
        log.warning("offset links contain a cycle; using declaration order")
        return alphas
    return order
