from fractions import Fraction

import pytest

from conftest import piece, union, vec
from polyvar.arrangement import set_equal
from polyvar.errors import NotEpigraphError, OffGraphError
from polyvar.mappings import (
    PLFunction,
    PolyMap,
    compose,
    derivative_of,
    directional_limiting_coderivative,
    directional_subdifferential,
    graphical_derivative,
    image_representatives,
    limiting_coderivative,
    limiting_subdifferential,
    regular_coderivative,
    regular_subdifferential,
    require_on_graph,
    singular_directional_subdifferential,
    singular_subdifferential,
    subderivative,
)
from polyvar.polyhedron import PolyhedralSet
from polyvar.rational import INF
from polyvar.variational import ConeKind


def affine(a, c) -> PolyMap:
    return PolyMap.from_affine(((Fraction(a),),), vec(c))


def test_affine_map_values():
    mapping = affine(2, 1)
    assert mapping.contains(vec(1), vec(3))
    assert mapping.image_at(vec(1)).contains(vec(3))
    assert mapping.inverse().contains(vec(3), vec(1))
    assert mapping.is_single_valued()


def test_bowtie_map_is_set_valued(m1):
    assert not m1.is_single_valued()
    assert set_equal(m1.image_at(vec(2)), union(1, piece(1, [(1, 2), (-1, 2)])))
    assert m1.image_at(vec(0)).is_origin()


def test_composition_of_affine_maps():
    composed = compose(affine(2, 1), affine(3, 0))
    assert composed.contains(vec(1), vec(9))
    assert not composed.contains(vec(1), vec(3))


def test_graphical_derivative_of_a_cone_graph(m1):
    assert set_equal(graphical_derivative(m1, vec(0), vec(0)).graph, m1.graph)


def test_coderivative_of_bowtie_at_zero(m1):
    coderivative = limiting_coderivative(m1, vec(0), vec(0))
    assert coderivative.image_at(vec(0)).is_origin()
    assert coderivative.image_at(vec(1)).contains(vec(1))
    assert coderivative.image_at(vec(1)).contains(vec(-1))


def test_off_graph_points_are_rejected(m1):
    with pytest.raises(OffGraphError) as info:
        require_on_graph(m1, vec(0), vec(1))
    assert info.value.distance == Fraction(1, 2)


def test_directional_derivative_needs_a_graph_direction(m1):
    with pytest.raises(ValueError):
        derivative_of(m1, vec(0), vec(0), ConeKind.DIRECTIONAL)
    derivative = derivative_of(m1, vec(0), vec(0), ConeKind.DIRECTIONAL, vec(1, 0))
    assert derivative.m == 1 and derivative.n == 1


def test_function_values(abs_value):
    assert abs_value.value(vec(-2)) == 2
    assert abs_value.finite_value(vec(3)) == 3
    indicator = PLFunction.indicator(union(1, piece(1, [(-1, 0)])))
    assert indicator.value(vec(-1)) == INF
    assert PLFunction(PolyhedralSet.whole(2), 1).value(vec(0)) == -INF


def test_epigraph_must_recede_upwards():
    with pytest.raises(NotEpigraphError):
        PLFunction(union(2, piece(2, [(0, 1, 0)])), 1)


def test_subdifferentials_of_abs(abs_value):
    regular = regular_subdifferential(abs_value, vec(0))
    assert set_equal(regular, union(1, piece(1, [(1, 1), (-1, 1)])))
    assert singular_subdifferential(abs_value, vec(0)).is_origin()


def test_limiting_subgradients_of_negative_abs():
    negative_abs = PLFunction.from_pieces(
        1, [(piece(1, [(-1, 0)]), vec(-1), Fraction(0)), (piece(1, [(1, 0)]), vec(1), Fraction(0))]
    )
    assert regular_subdifferential(negative_abs, vec(0)).is_empty()
    limiting = limiting_subdifferential(negative_abs, vec(0))
    assert limiting.contains(vec(1)) and limiting.contains(vec(-1))
    assert not limiting.contains(vec(0))


def test_directional_subdifferentials_of_abs(abs_value):
    directional = directional_subdifferential(abs_value, vec(0), vec(1), Fraction(1))
    assert set_equal(directional, union(1, piece(1, eqs=[(1, 1)])))
    assert singular_directional_subdifferential(abs_value, vec(0), vec(1), Fraction(1)).is_origin()


def test_map_plumbing(m1, nonnegative):
    assert set_equal(m1.domain(), PolyhedralSet.whole(1))
    restricted = m1.restrict(nonnegative)
    assert restricted.contains(vec(1), vec(1))
    assert not restricted.contains(vec(-1), vec(0))
    assert affine(2, 1).translate(vec(1), vec(0)).contains(vec(2), vec(3))
    assert image_representatives(affine(2, 1), vec(1)) == [vec(3)]
    for x in image_representatives(m1, vec(1)):
        assert m1.contains(vec(1), x)


def test_regular_and_directional_coderivatives_of_bowtie(m1):
    assert regular_coderivative(m1, vec(0), vec(0)).graph.is_origin()
    assert directional_limiting_coderivative(m1, vec(0), vec(0), vec(1), vec(0)).graph.is_origin()
    along_diagonal = directional_limiting_coderivative(m1, vec(0), vec(0), vec(1), vec(1))
    assert along_diagonal.contains(vec(-1), vec(-1))
    assert not along_diagonal.contains(vec(1), vec(1))


def test_subderivative_of_abs_is_abs(abs_value):
    derivative = subderivative(abs_value, vec(0))
    assert derivative.value(vec(2)) == 2
    assert derivative.value(vec(-3)) == 3
