"""
Hyperplane arrangements: sign cells with relative-interior witnesses, and the
exact subset/equality tests for polyhedral sets built on the same refinement.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from loguru import logger

from .errors import DimensionMismatchError
from .lp import Constraint, strict_solution
from .polyhedron import PolyhedralSet
from .rational import RVector, dot, is_zero, normalize_leading

Sign = int


@dataclass(frozen=True)
class SignCell:
    hyperplanes: tuple[RVector, ...]
    offsets: tuple[Fraction, ...]
    signs: tuple[Sign, ...]
    witness: RVector

    @property
    def dim(self) -> int:
        return len(self.witness)

    def closure(self) -> tuple[list[Constraint], list[Constraint]]:
        """Inequalities and equalities of the closed cell."""
        ineqs, eqs = [], []
        for a, b, sign in zip(self.hyperplanes, self.offsets, self.signs):
            if sign < 0:
                ineqs.append((a, b))
            elif sign > 0:
                ineqs.append((tuple(-x for x in a), -b))
            else:
                eqs.append((a, b))
        return ineqs, eqs


@dataclass
class _Cell:
    ineqs: list[Constraint]
    eqs: list[Constraint]
    strict: list[Constraint]
    witness: RVector

    def refine(self, dim: int, ineqs=(), eqs=(), strict=()) -> Optional["_Cell"]:
        cell = _Cell(self.ineqs + list(ineqs), self.eqs + list(eqs), self.strict + list(strict), self.witness)
        if cell.holds_at(self.witness):
            return cell
        point = strict_solution(dim, cell.ineqs, cell.eqs, cell.strict)
        if point is None:
            return None
        cell.witness = point
        return cell

    def holds_at(self, point: RVector) -> bool:
        return (
            all(dot(a, point) <= b for a, b in self.ineqs)
            and all(dot(a, point) == b for a, b in self.eqs)
            and all(dot(a, point) < b for a, b in self.strict)
        )


def _split(dim: int, cell: _Cell, a: RVector, b: Fraction) -> list[tuple[Sign, _Cell]]:
    negated = (tuple(-x for x in a), -b)
    parts = []
    for sign, kwargs in ((-1, {"strict": [(a, b)]}), (0, {"eqs": [(a, b)]}), (1, {"strict": [negated]})):
        child = cell.refine(dim, **kwargs)
        if child is not None:
            parts.append((sign, child))
    return parts


def normalize_hyperplanes(hyperplanes: Sequence[Constraint]) -> list[Constraint]:
    """Distinct hyperplanes, scaled so the first nonzero normal entry is +1, in sorted order."""
    unique = set()
    for a, b in hyperplanes:
        if is_zero(a):
            continue
        normal, factor = normalize_leading(a)
        if normal[next(i for i, x in enumerate(normal) if x != 0)] < 0:
            normal, factor = tuple(-x for x in normal), -factor
        unique.add((normal, b * factor))
    return sorted(unique)


def cells_within(region: PolyhedralSet, hyperplanes: Sequence[Constraint]) -> list[SignCell]:
    """Nonempty cells of the affine arrangement intersected with ``region``, one per sign vector."""
    dim = region.dim
    planes = normalize_hyperplanes(list(hyperplanes) + region.hyperplanes())
    for a, _ in planes:
        if len(a) != dim:
            raise DimensionMismatchError(f"hyperplane of length {len(a)} in dimension {dim}")
    found: dict[tuple[Sign, ...], RVector] = {}
    for piece in region.pieces:
        frontier = [((), _Cell(list(piece.ineqs), list(piece.eqs), [], piece.interior_point()))]
        for a, b in planes:
            frontier = [
                (signs + (sign,), child) for signs, cell in frontier for sign, child in _split(dim, cell, a, b)
            ]
        for signs, cell in frontier:
            found.setdefault(signs, cell.witness)
    normals = tuple(a for a, _ in planes)
    offsets = tuple(b for _, b in planes)
    logger.debug(f"{len(found)} cells from {len(planes)} hyperplanes over {len(region.pieces)} pieces")
    return [SignCell(normals, offsets, signs, found[signs]) for signs in sorted(found)]


def sign_cells(normals: Sequence[RVector]) -> list[SignCell]:
    """All nonempty cells of a central arrangement."""
    if not normals:
        return []
    dim = len(normals[0])
    return cells_within(PolyhedralSet.whole(dim), [(tuple(n), Fraction(0)) for n in normals])


@dataclass(frozen=True)
class SubsetResult:
    holds: bool
    witness: Optional[RVector] = None

    def __bool__(self) -> bool:
        return self.holds


def set_subset(a: PolyhedralSet, b: PolyhedralSet) -> SubsetResult:
    """Decide a subset of b; on failure the witness is a point of a outside b."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimensions {a.dim} and {b.dim} differ")
    dim = a.dim
    for piece in a.pieces:
        uncovered = [_Cell(list(piece.ineqs), list(piece.eqs), [], piece.interior_point())]
        for cover in b.pieces:
            remaining = []
            for cell in uncovered:
                inside: Optional[_Cell] = cell
                for c, d in cover.ineqs:
                    outside = inside.refine(dim, strict=[(tuple(-x for x in c), -d)])
                    if outside is not None:
                        remaining.append(outside)
                    inside = inside.refine(dim, ineqs=[(c, d)])
                    if inside is None:
                        break
                if inside is None:
                    continue
                for e, f in cover.eqs:
                    for side in ((e, f), (tuple(-x for x in e), -f)):
                        outside = inside.refine(dim, strict=[(tuple(-x for x in side[0]), -side[1])])
                        if outside is not None:
                            remaining.append(outside)
                    inside = inside.refine(dim, eqs=[(e, f)])
                    if inside is None:
                        break
            uncovered = remaining
            if not uncovered:
                break
        if uncovered:
            witness = uncovered[0].witness
            logger.debug(f"subset fails at {witness}")
            return SubsetResult(False, witness)
    return SubsetResult(True)


def set_equal(a: PolyhedralSet, b: PolyhedralSet) -> bool:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimensions {a.dim} and {b.dim} differ")
    if a == b:
        return True
    return set_subset(a, b).holds and set_subset(b, a).holds


def origin_cells(cone: PolyhedralSet) -> list[SignCell]:
    """Cells of a cone union over all of its facet hyperplanes, restricted to the union."""
    return cells_within(cone, [(a, Fraction(0)) for a, _ in cone.hyperplanes()])
