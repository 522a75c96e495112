from fractions import Fraction

import pytest

from conftest import piece, row, union, vec
from polyvar.arrangement import set_equal
from polyvar.config import LimitsConfig
from polyvar.errors import DimensionMismatchError, EmptyPolyhedronError, EmptySetError, LimitExceededError
from polyvar.polyhedron import (
    ConvexPolyhedron,
    PolyhedralSet,
    affine_image,
    affine_preimage,
    canonicalize,
    cartesian_product,
    distance_inf,
    enforce_limits,
    fix_coordinates,
    intersect,
    minkowski_sum,
    negate,
    project,
)


def test_infeasible_system_has_no_piece():
    assert canonicalize(1, [row(1, 0), row(-1, -1)], []) is None
    with pytest.raises(EmptyPolyhedronError):
        ConvexPolyhedron.from_constraints(1, [row(1, 0), row(-1, -1)])


def test_implicit_equalities_are_detected():
    p = piece(2, [(1, 0, 0), (-1, 0, 0), (0, 1, 1)])
    assert len(p.eqs) == 1
    assert p.affine_dim == 1


def test_redundant_constraints_are_dropped():
    assert piece(1, [(1, 1), (1, 2), (2, 2)]) == piece(1, [(1, 1)])


def test_contained_pieces_are_absorbed(orthant):
    combined = orthant.union(PolyhedralSet.whole(2))
    assert len(combined.pieces) == 1
    assert combined.contains(vec(-5, 3))


def test_contains_checks_dimension(orthant):
    assert orthant.contains(vec(0, 1))
    assert not orthant.contains(vec(-1, 1))
    with pytest.raises(DimensionMismatchError):
        orthant.contains(vec(1))


def test_projection_of_simplex():
    simplex = union(2, piece(2, [(1, 1, 1), (-1, 0, 0), (0, -1, 0)]))
    shadow = project(simplex, [0])
    assert shadow.contains(vec(0)) and shadow.contains(vec(1))
    assert not shadow.contains(vec(Fraction(3, 2)))


def test_image_of_a_rank_deficient_map(orthant):
    image = affine_image(orthant, ((Fraction(1), Fraction(1)),), vec(1))
    assert set_equal(image, union(1, piece(1, [(-1, -1)])))


def test_preimage_under_a_linear_functional(nonnegative):
    shifted = affine_preimage(nonnegative, ((Fraction(1), Fraction(1)),), vec(-1))
    assert shifted.contains(vec(1, 0))
    assert not shifted.contains(vec(0, 0))
    with pytest.raises(DimensionMismatchError):
        affine_preimage(nonnegative, ((Fraction(1), Fraction(1)),), vec(0, 0))


def test_product_and_intersection(orthant, nonnegative):
    cube = cartesian_product(orthant, nonnegative)
    assert cube.dim == 3
    assert cube.contains(vec(1, 2, 3))
    assert not cube.contains(vec(1, 2, -3))
    line = union(2, piece(2, eqs=[(1, -1, 0)]))
    ray = intersect(orthant, line)
    assert ray.contains(vec(2, 2)) and not ray.contains(vec(-1, -1))


def test_minkowski_sum_and_negation(orthant):
    assert set_equal(minkowski_sum(orthant, negate(orthant)), PolyhedralSet.whole(2))


def test_distance_in_the_infinity_norm(orthant):
    assert distance_inf(vec(-3, -1), orthant) == 3
    assert distance_inf(vec(2, 5), orthant) == 0
    with pytest.raises(EmptySetError):
        distance_inf(vec(0, 0), PolyhedralSet.empty(2))


def test_fixing_coordinates(bowtie):
    assert set_equal(fix_coordinates(bowtie, 0, vec(2)), union(1, piece(1, [(1, 2), (-1, 2)])))
    assert fix_coordinates(bowtie, 0, vec(0)).is_origin()


def test_limits_are_enforced(bowtie):
    with pytest.raises(LimitExceededError):
        enforce_limits(bowtie, LimitsConfig(max_pieces=1), "bowtie")
    with pytest.raises(LimitExceededError):
        enforce_limits(bowtie, LimitsConfig(max_dim=1), "bowtie")
    enforce_limits(bowtie, LimitsConfig(), "bowtie")
