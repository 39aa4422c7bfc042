from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from chsh_atlas.exact_lp import (LpProblem, as_fraction, format_fraction, parse_fraction, solve_lp,
                                 solve_lp_feasibility, verify_farkas)

F = Fraction


def test_trivial_feasible():
    f = solve_lp_feasibility(LpProblem.build(1, [[1]], [1]))
    assert f.feasible and f.point == (F(1),)


def test_trivial_infeasible():
    p = LpProblem.build(1, [[1]], [-1])
    f = solve_lp_feasibility(p)
    assert not f.feasible and verify_farkas(p, f.certificate)


def test_inequality_infeasible():
    # x + y <= 1 and x + y >= 3
    p = LpProblem.build(2, a_ub=[[1, 1], [-1, -1]], b_ub=[1, -3])
    f = solve_lp_feasibility(p)
    assert not f.feasible and verify_farkas(p, f.certificate)


def test_bad_certificates_rejected():
    p = LpProblem.build(1, [[1]], [1])
    assert not verify_farkas(p, [F(-1)])
    assert not verify_farkas(p, [F(1), F(1)])


def test_decimal_conversion_exact():
    assert as_fraction("0.1") == F(1, 10)
    assert as_fraction(0.5) == F(1, 2)
    assert parse_fraction(format_fraction(F(-7, 3))) == F(-7, 3)
    with pytest.raises(ValueError):
        as_fraction(float("nan"))


def test_unbounded():
    assert solve_lp(LpProblem.build(1), [-1]).status == "unbounded"


def test_maximize_with_duals():
    # max x + y, x + 2y <= 4, 3x + y <= 6
    p = LpProblem.build(2, a_ub=[[1, 2], [3, 1]], b_ub=[4, 6])
    s = solve_lp(p, [1, 1], maximize=True)
    assert s.status == "optimal" and s.objective == F(14, 5) and s.x == (F(8, 5), F(6, 5))


def _dual_certifies(p, c, sol) -> bool:
    """Weak duality check in rationals: A^T y <= c, y_ub <= 0, b @ y = objective."""
    y = sol.dual
    rows = list(p.a_eq) + list(p.a_ub)
    rhs = list(p.b_eq) + list(p.b_ub)
    if any(v > 0 for v in y[p.m_eq:]):
        return False
    for j in range(p.n):
        if sum(y[i] * rows[i][j] for i in range(len(rows))) > c[j]:
            return False
    return sum(a * b for a, b in zip(y, rhs)) == sol.objective


small = st.integers(-4, 4)


@given(st.lists(st.lists(small, min_size=4, max_size=4), min_size=1, max_size=3),
       st.lists(small, min_size=3, max_size=3),
       st.lists(st.lists(small, min_size=4, max_size=4), min_size=0, max_size=2),
       st.lists(st.integers(0, 5), min_size=2, max_size=2),
       st.lists(st.integers(0, 5), min_size=4, max_size=4))
def test_matches_scipy_oracle(a_eq, b_eq, a_ub, b_ub, c):
    b_eq = b_eq[: len(a_eq)]
    b_ub = b_ub[: len(a_ub)]
    p = LpProblem.build(4, a_eq, b_eq, a_ub, b_ub)
    sol = solve_lp(p, c)  # c >= 0 keeps every feasible instance bounded
    ref = linprog(c, A_ub=np.array(a_ub).reshape(-1, 4) if a_ub else None, b_ub=b_ub or None,
                  A_eq=np.array(a_eq), b_eq=b_eq, bounds=[(0, None)] * 4, method="highs")
    if ref.status == 2:
        assert sol.status == "infeasible" and verify_farkas(p, sol.farkas)
    else:
        assert ref.status == 0
        assert sol.status == "optimal"
        assert p.residual_ok(sol.x)
        assert float(sol.objective) == pytest.approx(ref.fun, abs=1e-7)
        assert _dual_certifies(p, [F(v) for v in c], sol)


def test_degenerate_cycling_example():
    """Beale's example cycles under the textbook rule; Bland's rule terminates."""
    c = [F(-3, 4), 150, F(-1, 50), 6]
    a = [[F(1, 4), -60, F(-1, 25), 9], [F(1, 2), -90, F(-1, 50), 3], [0, 0, 1, 0]]
    s = solve_lp(LpProblem.build(4, a_ub=a, b_ub=[0, 0, 1]), c)
    assert s.status == "optimal" and s.objective == F(-1, 20)
