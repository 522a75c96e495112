from fractions import Fraction

import pytest

from conftest import piece, union, vec
from polyvar.arrangement import set_equal
from polyvar.calculus import Status
from polyvar.errors import InfiniteValueError, MembershipError
from polyvar.mappings import PLFunction
from polyvar.marginal import (
    check_marginal_cq,
    level_set_map,
    marginal_function,
    nonzero_element,
    solution_set,
    value_function,
)
from polyvar.polyhedron import PolyhedralSet
from polyvar.variational import ConeKind


@pytest.fixture
def distance_to_parameter() -> PLFunction:
    """f(x, y) = |x - y|, so theta is identically zero."""
    return PLFunction.max_affine([(vec(1, -1), Fraction(0)), (vec(-1, 1), Fraction(0))])


@pytest.fixture
def constrained_linear() -> PLFunction:
    """f(x, y) = x on x >= y, so theta(y) = y."""
    return PLFunction.max_affine([(vec(1, 0), Fraction(0))], union(2, piece(2, [(-1, 1, 0)])))


def test_value_function(constrained_linear, distance_to_parameter):
    theta = value_function(constrained_linear, 1)
    assert theta.value(vec(2)) == 2
    assert theta.value(vec(-3)) == -3
    assert value_function(distance_to_parameter, 1).value(vec(5)) == 0


def test_solution_set(constrained_linear, distance_to_parameter):
    assert set_equal(solution_set(constrained_linear, 1, vec(2), Fraction(2)), PolyhedralSet.singleton(vec(2)))
    assert solution_set(distance_to_parameter, 1, vec(1), Fraction(0)).contains(vec(1))


def test_level_set_map(distance_to_parameter):
    level = level_set_map(distance_to_parameter, 1)
    assert (level.m, level.n) == (2, 1)
    assert level.contains(vec(0, 1), vec(1))
    assert not level.contains(vec(0, 1), vec(2))


def test_nonzero_element(orthant):
    element = nonzero_element(orthant)
    assert element is not None and orthant.contains(element) and any(element)
    assert nonzero_element(PolyhedralSet.singleton(vec(0, 0))) is None


def test_flat_value_function(distance_to_parameter):
    report = marginal_function(distance_to_parameter, vec(0), ConeKind.TANGENT)
    assert report.values["value"] == 0
    assert report.status != Status.VIOLATED
    flat = union(2, piece(2, [(0, -1, 0)]))
    assert set_equal(report.lhs, flat)


def test_regular_subgradient_of_constrained_value(constrained_linear):
    report = marginal_function(constrained_linear, vec(0), ConeKind.REGULAR_NORMAL)
    assert set_equal(report.lhs, PolyhedralSet.singleton(vec(1)))
    assert report.status != Status.VIOLATED


@pytest.mark.parametrize("kind", [ConeKind.LIMITING_NORMAL, ConeKind.REGULAR_NORMAL])
def test_subgradients_of_flat_value(distance_to_parameter, kind):
    report = marginal_function(distance_to_parameter, vec(0), kind)
    assert report.lhs.is_origin()
    assert report.status != Status.VIOLATED


def test_directional_subgradients(distance_to_parameter):
    report = marginal_function(distance_to_parameter, vec(0), ConeKind.DIRECTIONAL, vec(1, 0))
    assert report.status != Status.VIOLATED
    with pytest.raises(MembershipError):
        marginal_function(distance_to_parameter, vec(0), ConeKind.DIRECTIONAL, vec(1, -1))


def test_marginal_constraint_qualification(distance_to_parameter):
    assert check_marginal_cq(distance_to_parameter, 1, vec(0, 0)).verdict


def test_unbounded_inner_problem():
    f = PLFunction.max_affine([(vec(1, 0), Fraction(0))])
    with pytest.raises(InfiniteValueError):
        marginal_function(f, vec(0), ConeKind.TANGENT)


def test_parameter_outside_the_domain():
    f = PLFunction.max_affine([(vec(1, 0), Fraction(0)), (vec(-1, 0), Fraction(0))], union(2, piece(2, [(0, -1, -1)])))
    with pytest.raises(MembershipError):
        marginal_function(f, vec(0), ConeKind.TANGENT)
