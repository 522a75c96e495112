from fractions import Fraction

import pytest

from polyvar.mappings import PLFunction, PolyMap
from polyvar.polyhedron import ConvexPolyhedron, PolyhedralSet


def vec(*values) -> tuple[Fraction, ...]:
    return tuple(Fraction(v) for v in values)


def row(*values) -> tuple[tuple[Fraction, ...], Fraction]:
    """(a_1, ..., a_n, b) -> the constraint a.z <= b (or = b)."""
    return vec(*values[:-1]), Fraction(values[-1])


def piece(dim: int, ineqs=(), eqs=()) -> ConvexPolyhedron:
    return ConvexPolyhedron.from_constraints(dim, [row(*r) for r in ineqs], [row(*r) for r in eqs])


def union(dim: int, *pieces: ConvexPolyhedron) -> PolyhedralSet:
    return PolyhedralSet.from_pieces(dim, pieces)


@pytest.fixture
def orthant() -> PolyhedralSet:
    return union(2, piece(2, [(-1, 0, 0), (0, -1, 0)]))


@pytest.fixture
def bowtie() -> PolyhedralSet:
    """|z_2| <= |z_1|."""
    return union(2, piece(2, [(-1, 1, 0), (-1, -1, 0)]), piece(2, [(1, 1, 0), (1, -1, 0)]))


@pytest.fixture
def m1(bowtie) -> PolyMap:
    """y => [-|y|, |y|]."""
    return PolyMap(bowtie, 1, 1)


@pytest.fixture
def axes() -> PolyhedralSet:
    return union(2, piece(2, eqs=[(1, 0, 0)]), piece(2, eqs=[(0, 1, 0)]))


@pytest.fixture
def halfplanes() -> PolyhedralSet:
    """Everything but the open quadrant z_1 > 0, z_2 < 0."""
    return union(2, piece(2, [(0, -1, 0)]), piece(2, [(1, 0, 0)]))


@pytest.fixture
def nonnegative() -> PolyhedralSet:
    return union(1, piece(1, [(-1, 0)]))


@pytest.fixture
def abs_value() -> PLFunction:
    return PLFunction.max_affine([(vec(1), Fraction(0)), (vec(-1), Fraction(0))])
