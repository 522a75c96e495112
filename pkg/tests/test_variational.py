from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import piece, union, vec
from polyvar.arrangement import set_equal, set_subset
from polyvar.errors import HypothesisViolatedError, MembershipError
from polyvar.generators import random_set
from polyvar.polyhedron import PolyhedralSet
from polyvar.variational import (
    ConeKind,
    ConeResult,
    cone_of,
    directional_limiting_normal_cone,
    directional_normal_set,
    limiting_normal_set,
    preimage_cones,
    product_cones,
    regular_normal_set,
    tangent_cone,
    tangent_directions,
    tangent_set,
    union_decomposition,
)

DIAGONALS = [vec(1, 1), vec(1, -1), vec(-1, 1), vec(-1, -1)]


def test_orthant_cones(orthant):
    negative = union(2, piece(2, [(1, 0, 0), (0, 1, 0)]))
    assert set_equal(tangent_set(orthant, vec(0, 0)), orthant)
    assert set_equal(regular_normal_set(orthant, vec(0, 0)), negative)
    assert set_equal(limiting_normal_set(orthant, vec(0, 0)), negative)


def test_tangent_at_an_edge_point(orthant):
    assert set_equal(tangent_set(orthant, vec(1, 0)), union(2, piece(2, [(0, -1, 0)])))
    assert regular_normal_set(orthant, vec(1, 0)).contains(vec(0, -3))


def test_bowtie_normals(bowtie):
    assert set_equal(tangent_set(bowtie, vec(0, 0)), bowtie)
    assert regular_normal_set(bowtie, vec(0, 0)).is_origin()
    limiting = limiting_normal_set(bowtie, vec(0, 0))
    for d in DIAGONALS:
        assert limiting.contains(d)
    assert not limiting.contains(vec(1, 0))
    assert not limiting.contains(vec(0, 1))


def test_bowtie_directional_normals(bowtie):
    assert directional_normal_set(bowtie, vec(0, 0), vec(1, 0)).is_origin()
    along_diagonal = directional_normal_set(bowtie, vec(0, 0), vec(1, 1))
    assert along_diagonal.contains(vec(-1, 1))
    assert not along_diagonal.contains(vec(1, 1))


def test_axes_are_their_own_limiting_normals(axes):
    assert regular_normal_set(axes, vec(0, 0)).is_origin()
    assert set_equal(limiting_normal_set(axes, vec(0, 0)), axes)


def test_point_must_belong(orthant):
    with pytest.raises(MembershipError):
        tangent_set(orthant, vec(-1, 0))


def test_directional_kind_needs_direction(orthant):
    with pytest.raises(ValueError):
        cone_of(ConeKind.DIRECTIONAL, orthant, vec(0, 0))
    result = cone_of(ConeKind.DIRECTIONAL, orthant, vec(0, 0), vec(1, 0))
    assert result.direction == vec(1, 0)


def test_limiting_normals_decompose(bowtie, halfplanes, axes):
    for target in (bowtie, halfplanes, axes):
        assert set_equal(union_decomposition(target, vec(0, 0)), limiting_normal_set(target, vec(0, 0)))


def test_tangent_directions_cover_every_cell(bowtie):
    directions = tangent_directions(bowtie, vec(0, 0))
    assert directions
    assert all(bowtie.contains(d) for d in directions)
    assert any(d[0] < 0 for d in directions) and any(d[0] > 0 for d in directions)


def test_tangent_directions_of_the_whole_plane_span_it():
    directions = tangent_directions(PolyhedralSet.whole(2), vec(0, 0))
    assert sorted(directions) == [vec(0, 1), vec(1, 0)]


def test_preimage_change_of_coordinates(nonnegative):
    a = ((Fraction(1), Fraction(1)),)
    result = preimage_cones(a, vec(0), nonnegative, vec(0, 0), ConeKind.REGULAR_NORMAL)
    assert result.cone.contains(vec(-1, -1))
    assert not result.cone.contains(vec(-1, 0))
    with pytest.raises(HypothesisViolatedError):
        preimage_cones(((Fraction(0), Fraction(0)),), vec(0), nonnegative, vec(0, 0), ConeKind.TANGENT)


def test_product_of_tangent_cones(nonnegative):
    product = product_cones([(nonnegative, vec(0), None), (nonnegative, vec(0), None)], ConeKind.TANGENT)
    assert product.equal


@settings(deadline=None, max_examples=15)
@given(st.integers(min_value=0, max_value=10_000))
def test_local_conicity_on_random_sets(seed):
    target = random_set(seed, 2, 2)
    origin = vec(0, 0)
    tangent = tangent_set(target, origin)
    assert tangent.is_cone()
    assert set_subset(regular_normal_set(target, origin), limiting_normal_set(target, origin))
    small = Fraction(1, 1000)
    for direction in tangent_directions(target, origin):
        scale = small / max(abs(x) for x in direction)
        assert target.contains(tuple(scale * x for x in direction))


def test_cone_results_record_their_query(orthant, bowtie):
    tangent = tangent_cone(orthant, vec(0, 0))
    assert tangent.kind == ConeKind.TANGENT
    assert tangent.base_point == vec(0, 0)
    assert tangent.direction is None
    directional = directional_limiting_normal_cone(bowtie, vec(0, 0), vec(1, 1))
    assert directional.direction == vec(1, 1)
    assert directional.cone.contains(vec(-1, 1))
    with pytest.raises(ValueError):
        ConeResult(tangent.cone, ConeKind.TANGENT, vec(0, 0), vec(1, 0))
