"""
Tangent, regular normal, limiting normal and directional limiting normal cones of
polyhedral sets.

Every cone is computed at the origin of the tangent cone: near a point a polyhedral
set coincides with the point plus its tangent cone, so limiting objects reduce to
regular normals collected over the cells of a cone union.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

from loguru import logger

from .arrangement import origin_cells, set_equal
from .cones import generators, polar_cone
from .errors import DimensionMismatchError, HypothesisViolatedError, MembershipError
from .polyhedron import (
    PolyhedralSet,
    affine_image,
    affine_preimage,
    canonicalize,
    product_all,
    union_all,
)
from .rational import Matrix, RVector, concat, dot, is_zero, mat_vec, normalize_leading, rank, transpose, zeros


class ConeKind(str, Enum):
    TANGENT = "tangent"
    REGULAR_NORMAL = "regular_normal"
    LIMITING_NORMAL = "limiting_normal"
    DIRECTIONAL = "directional_limiting_normal"


@dataclass(frozen=True)
class ConeResult:
    cone: PolyhedralSet
    kind: ConeKind
    base_point: RVector
    direction: Optional[RVector] = None

    def __post_init__(self):
        if (self.direction is not None) != (self.kind == ConeKind.DIRECTIONAL):
            raise ValueError("a direction is given exactly for directional cones")


def _check_point(target: PolyhedralSet, point: Sequence[Fraction]) -> None:
    if len(point) != target.dim:
        raise DimensionMismatchError(f"point of length {len(point)} in dimension {target.dim}")


def tangent_set(target: PolyhedralSet, point: RVector) -> PolyhedralSet:
    """Union over pieces containing ``point`` of their active constraints, homogenized."""
    _check_point(target, point)
    zero = Fraction(0)
    pieces = []
    for piece in target.pieces:
        if not piece.contains(point):
            continue
        active = [(a, zero) for a, b in piece.ineqs if dot(a, point) == b]
        pieces.append(canonicalize(target.dim, active, [(e, zero) for e, _ in piece.eqs]))
    return PolyhedralSet.from_pieces(target.dim, pieces)


def regular_normal_set(target: PolyhedralSet, point: RVector) -> PolyhedralSet:
    tangent = tangent_set(target, point)
    if tangent.is_empty():
        return tangent
    return polar_cone(tangent)


def limiting_at_origin(cone: PolyhedralSet) -> PolyhedralSet:
    """Limiting normal cone of a cone union at 0: regular normals at one witness per cell."""
    if cone.is_empty():
        return cone
    cells = origin_cells(cone)
    logger.debug(f"limiting normals over {len(cells)} cells")
    return union_all(cone.dim, [polar_cone(tangent_set(cone, cell.witness)) for cell in cells])


def limiting_normal_set(target: PolyhedralSet, point: RVector) -> PolyhedralSet:
    return limiting_at_origin(tangent_set(target, point))


def directional_normal_set(target: PolyhedralSet, point: RVector, direction: RVector) -> PolyhedralSet:
    _check_point(target, direction)
    tangent = tangent_set(target, point)
    if not tangent.contains(direction):
        return PolyhedralSet.empty(target.dim)
    if is_zero(direction):
        return limiting_at_origin(tangent)
    return limiting_at_origin(tangent_set(tangent, direction))


def tangent_cone(target: PolyhedralSet, point: RVector) -> ConeResult:
    return ConeResult(tangent_set(target, point), ConeKind.TANGENT, tuple(point))


def regular_normal_cone(target: PolyhedralSet, point: RVector) -> ConeResult:
    return ConeResult(regular_normal_set(target, point), ConeKind.REGULAR_NORMAL, tuple(point))


def limiting_normal_cone(target: PolyhedralSet, point: RVector) -> ConeResult:
    return ConeResult(limiting_normal_set(target, point), ConeKind.LIMITING_NORMAL, tuple(point))


def directional_limiting_normal_cone(target: PolyhedralSet, point: RVector, direction: RVector) -> ConeResult:
    return ConeResult(
        directional_normal_set(target, point, direction), ConeKind.DIRECTIONAL, tuple(point), tuple(direction)
    )


def cone_of(
    kind: ConeKind, target: PolyhedralSet, point: RVector, direction: Optional[RVector] = None
) -> ConeResult:
    kind = ConeKind(kind)
    if kind == ConeKind.TANGENT:
        return tangent_cone(target, point)
    if kind == ConeKind.REGULAR_NORMAL:
        return regular_normal_cone(target, point)
    if kind == ConeKind.LIMITING_NORMAL:
        return limiting_normal_cone(target, point)
    if direction is None:
        raise ValueError("directional cone requires a direction")
    return directional_limiting_normal_cone(target, point, direction)


def tangent_directions(target: PolyhedralSet, point: RVector) -> list[RVector]:
    """
    One nonzero direction per cell of the tangent cone, scaled to a leading entry of +-1.

    A cell whose witness is the origin is a subspace; it contributes a basis of itself.
    """
    tangent = tangent_set(target, point)
    directions = []
    for cell in origin_cells(tangent):
        if not is_zero(cell.witness):
            directions.append(normalize_leading(cell.witness)[0])
            continue
        _, eqs = cell.closure()
        _, lines = generators(canonicalize(target.dim, [], eqs))
        directions.extend(normalize_leading(line)[0] for line in lines)
    return directions


def union_decomposition(target: PolyhedralSet, point: RVector) -> PolyhedralSet:
    """Regular normals joined with the directional limiting normals over all tangent directions."""
    parts = [regular_normal_set(target, point)]
    parts.extend(directional_normal_set(target, point, d) for d in tangent_directions(target, point))
    return union_all(target.dim, parts)


def preimage_cones(
    a: Matrix,
    shift: RVector,
    target: PolyhedralSet,
    x: RVector,
    kind: ConeKind,
    direction: Optional[RVector] = None,
) -> ConeResult:
    """Cones of {x : A x + s in C} through the change-of-coordinates formulas."""
    kind = ConeKind(kind)
    rows = len(a)
    cols = len(a[0]) if a else len(x)
    if rows != target.dim or len(x) != cols:
        raise DimensionMismatchError(f"map {rows}x{cols} does not fit a set of dimension {target.dim}")
    if rank(a) < rows:
        raise HypothesisViolatedError("full row rank hypothesis violated")
    image = tuple(v + s for v, s in zip(mat_vec(a, x), shift))
    if not target.contains(image):
        raise MembershipError(f"A x + s = {image} is not in the set")
    zero = zeros(rows)
    at = transpose(a, rows)
    if kind == ConeKind.TANGENT:
        cone = affine_preimage(tangent_set(target, image), a, zero)
    elif kind == ConeKind.REGULAR_NORMAL:
        cone = affine_image(regular_normal_set(target, image), at, zeros(cols))
    elif kind == ConeKind.LIMITING_NORMAL:
        cone = affine_image(limiting_normal_set(target, image), at, zeros(cols))
    else:
        if direction is None:
            raise ValueError("directional cone requires a direction")
        cone = affine_image(directional_normal_set(target, image, mat_vec(a, direction)), at, zeros(cols))
    return ConeResult(cone, kind, tuple(x), tuple(direction) if kind == ConeKind.DIRECTIONAL else None)


@dataclass(frozen=True)
class ProductCones:
    formula: ConeResult
    direct: ConeResult
    equal: bool


def product_cones(
    parts: Sequence[tuple[PolyhedralSet, RVector, Optional[RVector]]], kind: ConeKind
) -> ProductCones:
    """Product of factor cones next to the cone of the product set; equality is reported."""
    kind = ConeKind(kind)
    for target, point, _ in parts:
        if not target.contains(point):
            raise MembershipError(f"point {point} is not in its factor")
    factors = [cone_of(kind, target, point, direction).cone for target, point, direction in parts]
    formula = product_all(factors)
    joined = product_all([target for target, _, _ in parts])
    point = concat(*(p for _, p, _ in parts))
    direction = None
    if kind == ConeKind.DIRECTIONAL:
        direction = concat(*(d if d is not None else zeros(t.dim) for t, _, d in parts))
    direct = cone_of(kind, joined, point, direction)
    equal = set_equal(formula, direct.cone)
    if not equal:
        logger.warning(f"product formula differs from the direct {kind.value} cone")
    return ProductCones(ConeResult(formula, kind, point, direction), direct, equal)

