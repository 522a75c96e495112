"""
Double description for polyhedral cones through cdd in exact fraction mode:
H-representation to generators and back, vertices of polytopes, and polars of
cone unions.
"""

from fractions import Fraction
from typing import Optional, Sequence

import cdd
from loguru import logger

from .errors import DimensionMismatchError, NotConicalError
from .polyhedron import ConvexPolyhedron, PolyhedralSet, canonicalize
from .rational import RVector, is_zero, primitive, rref

NUMBER_TYPE = "fraction"


def _axpy(r: RVector, factor: Fraction, l: RVector) -> RVector:
    return tuple(x - factor * y for x, y in zip(r, l))


def _cdd_matrix(dim: int, rows: Sequence[Sequence[Fraction]], linear: Sequence[Sequence[Fraction]], rep_type):
    """cdd matrix whose first row is 1 >= 0 (H) or the origin (V), so it is never empty."""
    mat = cdd.Matrix([[Fraction(1)] + [Fraction(0)] * dim], number_type=NUMBER_TYPE)
    if rows:
        mat.extend([list(r) for r in rows])
    if linear:
        mat.extend([list(r) for r in linear], linear=True)
    mat.rep_type = rep_type
    return mat


def _h_to_v(
    dim: int, ineqs: Sequence[tuple[RVector, Fraction]], eqs: Sequence[tuple[RVector, Fraction]]
) -> tuple[list[RVector], list[RVector], list[RVector]]:
    """Points, rays and lines of {x : a.x <= b for ineqs, a.x = b for eqs}."""
    for a, _ in list(ineqs) + list(eqs):
        if len(a) != dim:
            raise DimensionMismatchError(f"normal of length {len(a)} in dimension {dim}")
    rows = [[Fraction(b)] + [-Fraction(x) for x in a] for a, b in ineqs]
    linear = [[Fraction(b)] + [-Fraction(x) for x in a] for a, b in eqs]
    poly = cdd.Polyhedron(_cdd_matrix(dim, rows, linear, cdd.RepType.INEQUALITY))
    output = poly.get_generators()
    points, rays, lines = [], [], []
    for index, row in enumerate(output):
        t, v = Fraction(row[0]), tuple(Fraction(x) for x in row[1:])
        if index in output.lin_set:
            lines.append(v)
        elif t == 0:
            rays.append(v)
        else:
            points.append(tuple(x / t for x in v))
    logger.debug(f"cdd: {len(points)} points, {len(rays)} rays, {len(lines)} lines in dimension {dim}")
    return points, rays, lines


def _finalize(dim: int, rays: list[RVector], lines: list[RVector]) -> tuple[list[RVector], list[RVector]]:
    basis, pivots = rref(lines, dim) if lines else ([], [])
    basis = [tuple(row) for row in basis[: len(pivots)]]
    reduced = set()
    for r in rays:
        for row, p in zip(basis, pivots):
            if r[p] != 0:
                r = _axpy(r, r[p], row)
        r = primitive(r)
        if not is_zero(r):
            reduced.add(r)
    return sorted(reduced), [primitive(row) for row in basis]


def _require_cone(cone: ConvexPolyhedron) -> None:
    if not cone.is_cone():
        raise NotConicalError("polyhedron is not a cone: some offset is nonzero")


def generators(cone: ConvexPolyhedron) -> tuple[list[RVector], list[RVector]]:
    """Extreme rays and lineality basis, each in a deterministic order."""
    _require_cone(cone)
    if cone.dim == 0:
        return [], []
    _, rays, lines = _h_to_v(cone.dim, cone.ineqs, cone.eqs)
    return _finalize(cone.dim, rays, lines)


def halfspaces(rays: Sequence[RVector], lines: Sequence[RVector], dim: int) -> ConvexPolyhedron:
    """Canonical H-representation of cone(rays) + span(lines)."""
    for r in list(rays) + list(lines):
        if len(r) != dim:
            raise DimensionMismatchError(f"generator of length {len(r)} in dimension {dim}")
    if dim == 0:
        return canonicalize(0, [], [])
    zero = Fraction(0)
    rows = [[zero] + [Fraction(x) for x in r] for r in rays]
    linear = [[zero] + [Fraction(x) for x in l] for l in lines]
    poly = cdd.Polyhedron(_cdd_matrix(dim, rows, linear, cdd.RepType.GENERATOR))
    output = poly.get_inequalities()
    ineqs, eqs = [], []
    for index, row in enumerate(output):
        normal = tuple(-Fraction(x) for x in row[1:])
        if is_zero(normal):
            continue
        (eqs if index in output.lin_set else ineqs).append((normal, Fraction(row[0])))
    return canonicalize(dim, ineqs, eqs)


def vertices(polytope: ConvexPolyhedron) -> list[RVector]:
    """Vertices of a bounded piece, sorted."""
    points, rays, lines = _h_to_v(polytope.dim, polytope.ineqs, polytope.eqs)
    if rays or lines:
        raise ValueError("vertices requested for an unbounded polyhedron")
    return sorted(set(points))


def polar_of_piece(cone: ConvexPolyhedron) -> ConvexPolyhedron:
    _require_cone(cone)
    return halfspaces([a for a, _ in cone.ineqs], [e for e, _ in cone.eqs], cone.dim)


def polar_cone(cone: PolyhedralSet) -> PolyhedralSet:
    """Polar of a cone union: the intersection of the polars of its pieces."""
    if not cone.is_cone():
        raise NotConicalError("polar cone requested for a set that is not a cone union")
    ineqs, eqs = [], []
    for piece in cone.pieces:
        polar = polar_of_piece(piece)
        ineqs.extend(polar.ineqs)
        eqs.extend(polar.eqs)
    return PolyhedralSet.from_pieces(cone.dim, [canonicalize(cone.dim, ineqs, eqs)])


def cone_generators(cone: PolyhedralSet) -> list[tuple[list[RVector], list[RVector]]]:
    return [generators(piece) for piece in cone.pieces]


def nonzero_point(cone: PolyhedralSet) -> Optional[RVector]:
    """A nonzero element of a cone union, or None when the union is empty or {0}."""
    for piece in cone.pieces:
        rays, lines = generators(piece)
        if rays:
            return rays[0]
        if lines:
            return lines[0]
    return None
