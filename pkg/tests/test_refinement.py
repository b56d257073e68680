import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from trigminlp.functions import Sinusoid
from trigminlp.partitioning import Partition, base_partition, check_refinement
from trigminlp.refinement import (RefinementConfig, StrategyConfig, parse_k, partition_measure,
                                  refine_partition, scheme_points, select_for_refinement)
from trigminlp.relaxation import cell_membership, triangle_cells

PI = math.pi
SIN = Sinusoid("sin")


def sin_partition():
    return base_partition([SIN], (0, 2 * PI))


@pytest.mark.parametrize("scheme,expected", [
    ("bisection", [PI / 4]),
    ("direct", [1.0]),
    ("nu2", [0.5, 1.0 + (PI / 2 - 1.0) / 2]),
    ("nu3", [0.5, 1.0 + (PI / 2 - 1.0) / 2, 1.0]),
])
def test_scheme_points(scheme, expected):
    p = Partition((0.0, PI / 2, PI), functions=(SIN,))
    assert scheme_points(p, 1.0, RefinementConfig(scheme)) == pytest.approx(expected)


def test_nonuniform_deltas():
    p = Partition((0.0, 3.0), functions=(SIN,))
    pts = scheme_points(p, 1.0, RefinementConfig("nu2", 4.0, 2.0))
    assert pts == pytest.approx([0.75, 2.0])


def test_bad_configs_rejected():
    with pytest.raises(ValueError):
        RefinementConfig("trisection")
    with pytest.raises(ValueError):
        RefinementConfig("nu2", delta1=1.0)
    with pytest.raises(ValueError):
        StrategyConfig("kworst")
    with pytest.raises(ValueError):
        StrategyConfig("kworst", 0)


def test_on_point_is_skipped():
    p = sin_partition()
    assert refine_partition(p, PI, RefinementConfig()) is p


def test_outside_interval_raises():
    with pytest.raises(ValueError):
        refine_partition(sin_partition(), 7.0, RefinementConfig())


def test_rule_one_bisects_the_largest_interval():
    p = Partition((0.0, 1e-6 * 2 * PI, PI / 2, PI), functions=(SIN,))
    q = refine_partition(p, 0.5e-6, RefinementConfig("nu2"))
    # the x* interval is below epsilon, so the widest one [pi/2, pi] is halved
    assert any(abs(x - 3 * PI / 4) < 1e-12 for x in q.points)
    assert len(q.points) == len(p.points) + 1


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10 ** 6), scheme=st.sampled_from(["bisection", "direct", "nu2", "nu3"]))
def test_refinement_is_valid(seed, scheme):
    rng = random.Random(seed)
    f = Sinusoid(rng.choice(["sin", "cos"]))
    lo = rng.uniform(-8, 8)
    p = base_partition([f], (lo, lo + rng.uniform(0.5, 12)))
    cfg = RefinementConfig(scheme, rng.uniform(1.1, 4), rng.uniform(1.1, 4))
    for _ in range(rng.randint(1, 6)):
        x = rng.uniform(p.lower, p.upper)
        q = refine_partition(p, x, cfg)
        if q is p:
            assert p.nearest_point_distance(x) <= cfg.on_point_tol
            continue
        assert check_refinement(p, q)
        p = q


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10 ** 6), scheme=st.sampled_from(["direct", "nu3"]))
def test_direct_and_nu3_cut_off_the_relaxation_point(seed, scheme):
    rng = random.Random(seed)
    f = Sinusoid(rng.choice(["sin", "cos"]))
    p = base_partition([f], (0, 2 * PI))
    i = rng.randrange(p.cells)
    a, b = p.points[i], p.points[i + 1]
    x = a + (b - a) * rng.uniform(0.05, 0.95)
    cell = triangle_cells(f, p)[i]
    # a point of the old cell strictly off the curve
    lo, hi = sorted((f.value(x), 2 * cell.v_apex[1] - f.value(x)))
    for _ in range(100):
        y = rng.uniform(min(lo, cell.v_apex[1]), max(hi, cell.v_apex[1]))
        if abs(y - f.value(x)) > 1e-6 and cell_membership(cell, (x, y), 0.0):
            break
    else:
        return
    q = refine_partition(p, x, RefinementConfig(scheme))
    assert not any(cell_membership(c, (x, y), 1e-12) for c in triangle_cells(f, q))


def test_measure_uses_worst_owner():
    p = sin_partition()
    vals = [1.0, 0.0, 0.5, 2.0, 1.5]
    owners = [(SIN, 0, 1), ("bilinear", 0, 3, 4)]
    assert partition_measure(p, vals, owners) == pytest.approx(max(math.sin(1.0), 0.5))


def test_kworst_selection():
    measures = [0.1, 0.0, 0.5, 0.3]
    assert select_for_refinement(range(4), measures, StrategyConfig()) == [0, 2, 3]
    assert select_for_refinement(range(4), measures, StrategyConfig("kworst", 2)) == [2, 3]
    assert select_for_refinement(range(4), measures, StrategyConfig("kworst", "50%")) == [2, 3]
    assert select_for_refinement(range(4), measures, StrategyConfig("kworst", "25%")) == [2]


def test_k_percentages_round_up():
    assert StrategyConfig("kworst", "50%").count(5) == 3
    assert StrategyConfig("kworst", "25%").count(1) == 1
    assert StrategyConfig("kworst", 10).count(3) == 3
    assert parse_k("25%") == "25%" and parse_k("3") == 3
