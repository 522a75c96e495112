import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import piece, row, vec
from polyvar.errors import DimensionMismatchError
from polyvar.lp import maximize, minimize, solve_lp, strict_solution


def test_bounded_minimum():
    result = minimize(vec(1), [row(-1, -1)])
    assert result.optimal
    assert result.value == 1
    assert result.point == vec(1)


def test_unbounded_returns_point_and_ray():
    result = minimize(vec(1), [row(1, 0)])
    assert result.status == "unbounded"
    assert result.point is not None
    assert result.ray[0] < 0


def test_infeasible():
    assert minimize(vec(1), [row(1, 0), row(-1, -1)]).status == "infeasible"


def test_equalities_and_free_variables():
    result = minimize(vec(1, 1), [row(-1, 0, 0), row(0, -1, 0)], [row(1, 1, 2)])
    assert result.value == 2


def test_maximize_on_simplex():
    result = maximize(vec(1, 2), [row(-1, 0, 0), row(0, -1, 0), row(1, 1, 1)])
    assert result.value == 2
    assert result.point == vec(0, 1)


def test_solve_lp_over_a_piece():
    simplex = piece(2, [(-1, 0, 0), (0, -1, 0), (1, 1, 1)])
    result = solve_lp(vec(1, 2), simplex)
    assert result.value == 0
    assert result.point == vec(0, 0)
    with pytest.raises(DimensionMismatchError):
        solve_lp(vec(1), simplex)


def test_strict_solution_needs_room():
    assert strict_solution(1, [], [], [row(1, 0), row(-1, 0)]) is None
    point = strict_solution(1, [], [], [row(1, 1), row(-1, 0)])
    assert 0 < point[0] < 1


@settings(deadline=None, max_examples=40)
@given(st.fractions(min_value=-10, max_value=10), st.fractions(min_value=-10, max_value=10))
def test_interval_bounds(low, high):
    result = minimize(vec(1), [(vec(-1), -low), (vec(1), high)])
    if low <= high:
        assert result.value == low
    else:
        assert result.status == "infeasible"
