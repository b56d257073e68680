import math

import pytest
from hypothesis import given, settings, strategies as st

from trigminlp.functions import Sinusoid
from trigminlp.partitioning import (Partition, base_partition, check_refinement,
                                    contains_points, is_admissible, merge_partitions,
                                    missing_inflections, slope_violations)

PI = math.pi
SIN, COS = Sinusoid("sin"), Sinusoid("cos")


def test_shared_sin_cos_base_on_four_periods():
    p = base_partition([SIN, COS], (-4 * PI, 4 * PI))
    assert p.points == pytest.approx([k * PI / 2 for k in range(-8, 9)])
    assert p.cells == 16


def test_base_on_principal_window():
    p = base_partition([SIN, COS], (0, 2 * PI))
    assert p.points == pytest.approx([0, PI / 2, PI, 3 * PI / 2, 2 * PI])


def test_near_period_window_is_admissible():
    f = Sinusoid("sin")
    p = base_partition([f], (0.3, 0.3 + 2 * PI - 1e-3))
    assert not slope_violations((f,), p.points)
    assert is_admissible(p)


def test_parallel_end_tangents_are_detected():
    # sin has slope 0 at both -pi/2 and pi/2
    assert slope_violations((Sinusoid("sin"),), [-PI / 2, PI / 2]) == [0]
    assert slope_violations((COS,), [0.0, PI / 2, PI, 3 * PI / 2, 2 * PI]) == []


def test_repair_adds_midpoint_for_parallel_tangents():
    # the inflection at -pi splits the window
    p = base_partition([Sinusoid("sin")], (-PI / 2 - PI, -PI / 2))
    assert not slope_violations(p.functions, p.points)
    assert p.cells > 1


def test_partition_validation():
    with pytest.raises(ValueError):
        Partition((1.0,))
    with pytest.raises(ValueError):
        Partition((0.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        base_partition([SIN], (1.0, 1.0))


def test_locate_and_distance():
    p = Partition((0.0, 1.0, 3.0))
    assert p.locate(-1) == 0 and p.locate(0.5) == 0 and p.locate(1.0) == 0
    assert p.locate(2.0) == 1 and p.locate(9) == 1
    assert p.nearest_point_distance(2.5) == pytest.approx(0.5)


def test_merge_unions_points():
    a = base_partition([SIN], (0, 2 * PI))
    b = base_partition([COS], (0, 2 * PI))
    m = merge_partitions(a, b)
    assert m.points == pytest.approx([0, PI / 2, PI, 3 * PI / 2, 2 * PI])
    with pytest.raises(ValueError):
        merge_partitions(a, base_partition([COS], (0, PI)))


def test_check_refinement():
    p = base_partition([SIN], (0, 2 * PI))
    q = p.with_points(sorted(p.points + (1.0,)))
    assert check_refinement(p, q)
    assert not check_refinement(q, p)
    assert not check_refinement(p, p)


def test_missing_inflection_detected():
    assert missing_inflections((SIN,), [0.0, 2 * PI]) == pytest.approx([PI])


@settings(max_examples=60, deadline=None)
@given(lo=st.floats(-15, 15), w=st.floats(0.05, 20),
       kinds=st.sets(st.sampled_from(["sin", "cos"]), min_size=1))
def test_base_partition_is_admissible_and_minimal(lo, w, kinds):
    fs = [Sinusoid(k) for k in sorted(kinds)]
    p = base_partition(fs, (lo, lo + w))
    assert p.lower == lo and p.upper == pytest.approx(lo + w)
    assert is_admissible(p)
    infl = sorted({x for f in fs for x in f.inflection_points(lo, lo + w)})
    assert contains_points(p.points, [x for x in infl if lo < x < lo + w])
