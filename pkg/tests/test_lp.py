import numpy as np
import pytest

import oracles
from dynfl.lp import (LinearProgram, LpStatus, PivotLimitError, certificate_errors,
                      lp_text, solve_lp)

CERT_TOL = 1e-6


def test_single_lower_bound():
    lp = LinearProgram(c=[1.0], A=[[1.0]], senses=[">="], b=[3.0])
    sol = solve_lp(lp)
    assert sol.status is LpStatus.OPTIMAL
    assert sol.objective_value == pytest.approx(3.0, abs=1e-9)
    assert sol.values[0] == pytest.approx(3.0, abs=1e-9)


def test_miniature_opening_link():
    # min 5y subject to x <= y and x = 1: forced to open fully
    lp = LinearProgram(c=[5.0, 0.0],
                       A=[[-1.0, 1.0], [0.0, 1.0]],
                       senses=["<=", "="], b=[0.0, 1.0])
    sol = solve_lp(lp)
    assert sol.status is LpStatus.OPTIMAL
    assert sol.objective_value == pytest.approx(5.0, abs=1e-9)
    assert sol.values == pytest.approx([1.0, 1.0], abs=1e-9)


def test_infeasible_detected():
    lp = LinearProgram(c=[1.0], A=[[1.0], [1.0]], senses=[">=", "<="], b=[3.0, 1.0])
    assert solve_lp(lp).status is LpStatus.INFEASIBLE


def test_unbounded_detected():
    lp = LinearProgram(c=[-1.0], A=[[0.0]], senses=["<="], b=[1.0])
    assert solve_lp(lp).status is LpStatus.UNBOUNDED


def test_no_constraints_optimum_at_origin():
    lp = LinearProgram(c=np.ones(3), A=np.zeros((0, 3)), senses=[], b=[])
    sol = solve_lp(lp)
    assert sol.status is LpStatus.OPTIMAL
    assert sol.objective_value == pytest.approx(0.0, abs=1e-12)


def test_degenerate_cycling_prone_program():
    # Beale's cycling example; Bland fallback must terminate at -0.05.
    lp = LinearProgram(
        c=[-0.75, 150.0, -0.02, 6.0],
        A=[[0.25, -60.0, -1.0 / 25.0, 9.0],
           [0.5, -90.0, -1.0 / 50.0, 3.0],
           [0.0, 0.0, 1.0, 0.0]],
        senses=["<=", "<=", "<="], b=[0.0, 0.0, 1.0])
    for rule in ("dantzig-bland", "bland"):
        sol = solve_lp(lp, pivot_rule=rule)
        assert sol.status is LpStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(-0.05, abs=1e-9)


def test_vertex_enumeration_agreement():
    rng = np.random.default_rng(42)
    checked = 0
    for _ in range(20):
        lp = oracles.random_feasible_lp(rng)
        sol = solve_lp(lp)
        assert sol.status is LpStatus.OPTIMAL
        oracle_value, found = oracles.vertex_enumeration_optimum(lp)
        assert found
        assert sol.objective_value == pytest.approx(oracle_value, abs=1e-7)
        checked += 1
    assert checked == 20


def test_scipy_cross_check():
    scipy_opt = pytest.importorskip("scipy.optimize")
    rng = np.random.default_rng(77)
    for _ in range(20):
        lp = oracles.random_feasible_lp(rng)
        sol = solve_lp(lp)
        A_ub, b_ub, A_eq, b_eq = [], [], [], []
        for r, sense in enumerate(lp.senses):
            if sense.value == "<=":
                A_ub.append(lp.A[r]); b_ub.append(lp.b[r])
            elif sense.value == ">=":
                A_ub.append(-lp.A[r]); b_ub.append(-lp.b[r])
            else:
                A_eq.append(lp.A[r]); b_eq.append(lp.b[r])
        ref = scipy_opt.linprog(
            lp.c, A_ub=np.array(A_ub) if A_ub else None,
            b_ub=np.array(b_ub) if b_ub else None,
            A_eq=np.array(A_eq) if A_eq else None,
            b_eq=np.array(b_eq) if b_eq else None,
            bounds=(0, None), method="highs")
        assert ref.status == 0
        assert sol.objective_value == pytest.approx(ref.fun, abs=1e-7)


def test_weak_duality_certificate_on_random_programs():
    rng = np.random.default_rng(4242)
    for _ in range(30):
        lp = oracles.random_feasible_lp(rng)
        sol = solve_lp(lp)
        err = certificate_errors(lp, sol)
        assert max(err.primal, err.dual, err.gap) <= CERT_TOL


def test_deterministic_resolve():
    rng = np.random.default_rng(5)
    lp = oracles.random_feasible_lp(rng)
    a = solve_lp(lp)
    b = solve_lp(lp)
    assert a.objective_value == b.objective_value
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.dual, b.dual)
    assert a.iterations == b.iterations


def test_pivot_limit_raises():
    lp = LinearProgram(c=[1.0, 1.0], A=[[1.0, 1.0]], senses=[">="], b=[1.0])
    with pytest.raises(PivotLimitError):
        solve_lp(lp, max_iterations=0)


def test_lp_text_layout():
    lp = LinearProgram(c=[5.0, -1.0], A=[[-1.0, 1.0], [0.0, 1.0]],
                       senses=["<=", "="], b=[0.0, 1.0])
    text = lp_text(lp, names=["open_a", "serve_a"])
    assert text.splitlines()[0] == "Minimize"
    assert "Subject To" in text
    assert " c0: -1 open_a + 1 serve_a <= 0" in text
    assert "0 <= serve_a" in text
    assert text.rstrip().endswith("End")
