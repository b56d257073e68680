import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from trigminlp.milp import (BINARY, CONTINUOUS, INTEGER, MilpModel, read_lp, read_lp_string,
                            serialize_lp, solve_milp, write_lp_string)
from trigminlp.milp.external import find_solver, parse_cbc_solution

try:
    find_solver()
    HAVE_CBC = True
except Exception:
    HAVE_CBC = False


def random_milp(seed, n_int=4, n_cont=3, rows=4):
    rng = random.Random(seed)
    m = MilpModel(f"r{seed}")
    for i in range(n_int):
        if rng.random() < 0.5:
            m.add_var(f"b{i}", 0, 1, BINARY)
        else:
            m.add_var(f"k{i}", rng.randint(-2, 0), rng.randint(0, 2), INTEGER)
    for i in range(n_cont):
        m.add_var(f"x{i}", rng.uniform(-3, 0), rng.uniform(0, 3))
    for r in range(rows):
        coeffs = {j: rng.choice([-3, -2, -1, 1, 2, 3]) * rng.random() for j in rng.sample(range(m.n), 3)}
        m.add_row(coeffs, rng.choice(["<=", ">=", "="]) if r else "<=", rng.uniform(-1, 2), f"r{r}")
    m.set_objective({j: rng.uniform(-2, 2) for j in range(m.n)}, rng.uniform(-1, 1))
    return m


def enumerate_optimum(m):
    """Independent oracle: enumerate every integer assignment, LP over the rest."""
    c, A_ub, b_ub, A_eq, b_eq, lo, hi = m.dense()
    ints = m.integer_indices()
    best = math.inf
    ranges = [range(int(math.ceil(lo[j])), int(math.floor(hi[j])) + 1) for j in ints]
    for combo in itertools.product(*ranges):
        l2, h2 = lo.copy(), hi.copy()
        l2[ints] = combo
        h2[ints] = combo
        res = linprog(c, A_ub=A_ub.toarray() if A_ub.shape[0] else None, b_ub=b_ub if A_ub.shape[0] else None,
                      A_eq=A_eq.toarray() if A_eq.shape[0] else None, b_eq=b_eq if A_eq.shape[0] else None,
                      bounds=list(zip(l2, h2)), method="highs")
        if res.status == 0:
            best = min(best, res.fun + m.objective_constant)
    return best


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_builtin_matches_enumeration(seed):
    m = random_milp(seed)
    ref = enumerate_optimum(m)
    sol = solve_milp(m, "builtin")
    if math.isinf(ref):
        assert sol.status == "infeasible"
        return
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(ref, abs=1e-6)
    assert m.max_violation(sol.values) <= 1e-6
    assert sol.bound <= sol.objective + 1e-9


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_highs_matches_enumeration(seed):
    m = random_milp(seed)
    ref = enumerate_optimum(m)
    sol = solve_milp(m, "highs")
    if math.isinf(ref):
        assert sol.status == "infeasible"
    else:
        assert sol.objective == pytest.approx(ref, abs=1e-6)


@pytest.mark.skipif(not HAVE_CBC, reason="no external MILP solver found")
@pytest.mark.parametrize("seed", range(8))
def test_subprocess_matches_enumeration(seed):
    m = random_milp(seed)
    ref = enumerate_optimum(m)
    sol = solve_milp(m, "subprocess")
    if math.isinf(ref):
        assert sol.status == "infeasible"
    else:
        # the solution file carries about eight significant digits
        assert sol.objective == pytest.approx(ref, rel=1e-6, abs=1e-6)


def test_chain_branching_on_incremental_block():
    # pick the best of five cells through an ordered chain of binaries
    m = MilpModel("chain")
    vals = [3.0, 1.0, 4.0, 0.5, 2.0]
    u = [m.add_var(f"u{k}", 0, 1, BINARY) for k in range(4)]
    for a, b in zip(u[1:], u):
        m.add_row({a: 1, b: -1}, "<=", 0)
    z = m.add_var("z", -10, 10)
    # z >= vals[k] when exactly k chain binaries are on
    for k, v in enumerate(vals):
        coeffs = {z: 1.0}
        for j in range(k):
            coeffs[u[j]] = -20.0
        if k < 4:
            coeffs[u[k]] = 20.0
        m.add_row(coeffs, ">=", v - 20.0 * k)
    m.chains.append(u)
    m.set_objective({z: 1.0})
    assert solve_milp(m, "builtin").objective == pytest.approx(0.5)
    assert solve_milp(m, "highs").objective == pytest.approx(0.5, abs=1e-5)


def test_unique_variable_names_and_row_validation():
    m = MilpModel()
    m.add_var("x")
    with pytest.raises(ValueError):
        m.add_var("x")
    with pytest.raises((ValueError, IndexError)):
        m.add_row({5: 1.0}, "<=", 0)


def test_lp_round_trip_is_byte_stable(tmp_path):
    m = random_milp(11)
    m.add_var("free var!", -math.inf, math.inf)
    m.add_var("fixed", 2.5, 2.5)
    text = write_lp_string(m)
    back = read_lp_string(text)
    assert write_lp_string(back) == text
    assert back.n == m.n and len(back.rows) == len(m.rows)
    assert back.objective_constant == pytest.approx(m.objective_constant)
    path = tmp_path / "m.lp"
    serialize_lp(m, path)
    assert write_lp_string(read_lp(path)) == text


def test_lp_reader_handles_exponents_and_wrapping():
    text = "\\ demo\nMinimize\n obj: 1e-05 x + 2.5E+2 y\nSubject To\n c1: x + y\n  >= 1\nBounds\n 0 <= x <= 4\n y free\nGeneral\n x\nEnd\n"
    m = read_lp_string(text)
    assert m.objective[m.index("x")] == pytest.approx(1e-5)
    assert m.objective[m.index("y")] == pytest.approx(250.0)
    assert m.rows[0].sense == ">=" and m.rows[0].rhs == 1
    assert m.variables[m.index("x")].integrality == INTEGER


def test_cbc_solution_parser():
    text = ("Optimal - objective value 3.5\n"
            "      0 x                      1.5                       0\n"
            "      1 y                        2                       0\n")
    status, obj, vals = parse_cbc_solution(text)
    assert status == "optimal" and obj == 3.5 and vals == {"x": 1.5, "y": 2.0}


def test_time_limited_solution_is_flagged():
    m = random_milp(5)
    sol = solve_milp(m, "builtin", time_limit=1e-9)
    assert sol.status in ("time_limit", "optimal", "infeasible")
