import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from trigminlp.fbbt import InfeasibleModelError, fbbt_bounds, fbbt_tighten
from trigminlp.model import INTEGER, ModelBuilder


def chain_model():
    b = ModelBuilder()
    x = b.var("x", 0, 10)
    y = b.var("y", -100, 100)
    s = b.var("s", -5, 5)
    z = b.var("z", -100, 100)
    b.constrain({y: 1, x: -2}, "=", 1)     # y = 2x + 1
    b.trig(s, x, "sin")
    b.bilinear(z, x, s)
    return b.build(), (x, y, s, z)


def test_linear_and_trig_images():
    m, (x, y, s, z) = chain_model()
    t = fbbt_tighten(m)
    assert t.variables[y].lower == pytest.approx(1) and t.variables[y].upper == pytest.approx(21)
    assert t.variables[s].lower == pytest.approx(-1) and t.variables[s].upper == pytest.approx(1)
    assert t.variables[z].lower == pytest.approx(-10) and t.variables[z].upper == pytest.approx(10)


def test_integer_bounds_round_inward():
    b = ModelBuilder()
    k = b.var("k", -10, 10, INTEGER)
    b.constrain({k: 2.0}, "<=", 5.0)
    t = fbbt_tighten(b.build())
    assert t.variables[k].upper == 2


def test_infeasible_model_raises():
    b = ModelBuilder()
    x = b.var("x", 0, 1)
    b.constrain({x: 1.0}, ">=", 2.0)
    with pytest.raises(InfeasibleModelError):
        fbbt_tighten(b.build())


def test_rounds_are_reported():
    m, _ = chain_model()
    bounds, rounds = fbbt_bounds(m)
    assert 1 <= rounds <= 10 and len(bounds) == m.n


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_tightening_never_cuts_feasible_points(seed):
    # random feasible point first, then a model built around it
    rng = random.Random(seed)
    b = ModelBuilder()
    n = 4
    pt = [rng.uniform(-3, 3) for _ in range(n)]
    xs = [b.var(f"x{i}", pt[i] - rng.uniform(0, 4), pt[i] + rng.uniform(0, 4)) for i in range(n)]
    s = b.var("s", -2, 2)
    w = b.var("w", -50, 50)
    b.trig(s, xs[0], rng.choice(["sin", "cos"]))
    b.bilinear(w, xs[1], xs[2])
    pt += [b.trig_terms[0].function.value(pt[0]), pt[1] * pt[2]]
    for _ in range(3):
        coeffs = {j: rng.uniform(-2, 2) for j in rng.sample(range(n + 2), 3)}
        act = sum(c * pt[j] for j, c in coeffs.items())
        sense = rng.choice(["<=", ">=", "="])
        rhs = act + (rng.uniform(0, 1) if sense == "<=" else -rng.uniform(0, 1) if sense == ">=" else 0.0)
        b.constrain(coeffs, sense, rhs)
    bounds, _ = fbbt_bounds(b.build())
    for j, (lo, hi) in enumerate(bounds):
        assert lo - 1e-7 <= pt[j] <= hi + 1e-7
