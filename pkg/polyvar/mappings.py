"""
Set-valued maps given by polyhedral graphs, extended-real piecewise-linear functions
given by polyhedral epigraphs, and their derivative objects.

Graph coordinates are (argument, value). Coderivative maps take the dual value x* as
argument and return dual arguments y*, with (y*, -x*) read off the normal cone.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from loguru import logger

from .arrangement import cells_within
from .errors import DimensionMismatchError, InfiniteValueError, NotEpigraphError, OffGraphError
from .lp import maximize, minimize
from .polyhedron import (
    ConvexPolyhedron,
    PolyhedralSet,
    affine_preimage,
    canonicalize,
    cartesian_product,
    distance_inf,
    fix_coordinates,
    intersect,
    project,
    slice_constraints,
)
from .rational import INF, Matrix, RVector, concat, identity, selector, unit, zeros
from .variational import ConeKind, directional_normal_set, limiting_normal_set, regular_normal_set, tangent_set

Value = Union[Fraction, float]


def _permutation(order: Sequence[int]) -> Matrix:
    return tuple(unit(len(order), i) for i in order)


@dataclass(frozen=True)
class PolyMap:
    """Set-valued map R^m => R^n with a polyhedral graph in (y, x) coordinates."""

    graph: PolyhedralSet
    m: int
    n: int

    def __post_init__(self):
        if self.graph.dim != self.m + self.n:
            raise DimensionMismatchError(f"graph of dimension {self.graph.dim} for a map {self.m} => {self.n}")

    @classmethod
    def from_affine(cls, a: Matrix, shift: RVector) -> "PolyMap":
        """Single-valued y -> A y + c."""
        n = len(a)
        m = len(a[0]) if a else 0
        eqs = [(tuple(-v for v in a[i]) + unit(n, i), shift[i]) for i in range(n)]
        return cls(PolyhedralSet.from_constraints(m + n, (), eqs), m, n)

    @classmethod
    def identity(cls, n: int) -> "PolyMap":
        return cls.from_affine(identity(n), zeros(n))

    @classmethod
    def constant(cls, values: PolyhedralSet, m: int) -> "PolyMap":
        return cls(cartesian_product(PolyhedralSet.whole(m), values), m, values.dim)

    def contains(self, y: RVector, x: RVector) -> bool:
        return self.graph.contains(concat(y, x))

    def domain(self) -> PolyhedralSet:
        return project(self.graph, range(self.m))

    def range_set(self) -> PolyhedralSet:
        return project(self.graph, range(self.m, self.m + self.n))

    def image_at(self, y: RVector) -> PolyhedralSet:
        if len(y) != self.m:
            raise DimensionMismatchError(f"argument of length {len(y)} for a map on R^{self.m}")
        return fix_coordinates(self.graph, 0, tuple(y))

    def inverse(self) -> "PolyMap":
        swap = _permutation(list(range(self.n, self.n + self.m)) + list(range(self.n)))
        return PolyMap(affine_preimage(self.graph, swap, zeros(self.m + self.n)), self.n, self.m)

    def restrict(self, region: PolyhedralSet) -> "PolyMap":
        """Graph restricted to arguments in ``region``."""
        return PolyMap(intersect(self.graph, cartesian_product(region, PolyhedralSet.whole(self.n))), self.m, self.n)

    def translate(self, dy: RVector, dx: RVector) -> "PolyMap":
        """Map whose graph is gph M + (dy, dx)."""
        shift = tuple(-v for v in concat(dy, dx))
        return PolyMap(affine_preimage(self.graph, identity(self.m + self.n), shift), self.m, self.n)

    def scale(self, factor: Fraction) -> "PolyMap":
        """Values multiplied by a nonzero factor."""
        if factor == 0:
            raise ValueError("scale factor must be nonzero")
        diag = tuple(
            tuple(Fraction(1) if i == j and i < self.m else (1 / factor if i == j else Fraction(0))
                  for j in range(self.m + self.n))
            for i in range(self.m + self.n)
        )
        return PolyMap(affine_preimage(self.graph, diag, zeros(self.m + self.n)), self.m, self.n)

    def is_single_valued(self) -> bool:
        """True when every argument has at most one value."""
        d = self.m + 2 * self.n
        first = selector(d, list(range(self.m + self.n)))
        second = selector(d, list(range(self.m)) + list(range(self.m + self.n, d)))
        for p in self.graph.pieces:
            for q in self.graph.pieces:
                joint = intersect(
                    affine_preimage(PolyhedralSet(p.dim, (p,)), first, zeros(p.dim)),
                    affine_preimage(PolyhedralSet(q.dim, (q,)), second, zeros(q.dim)),
                )
                for piece in joint.pieces:
                    for i in range(self.n):
                        spread = unit(d, self.m + i)
                        spread = tuple(s - t for s, t in zip(spread, unit(d, self.m + self.n + i)))
                        result = maximize(spread, piece.ineqs, piece.eqs)
                        if not result.optimal or result.value > 0:
                            return False
        return True


def compose(first: PolyMap, second: PolyMap) -> PolyMap:
    """Graph of x => second(first(x)) by projecting the triple graph."""
    if first.n != second.m:
        raise DimensionMismatchError(f"cannot compose a map into R^{first.n} with a map on R^{second.m}")
    m, k, n = first.m, first.n, second.n
    d = m + k + n
    triple = intersect(
        affine_preimage(first.graph, selector(d, range(m + k)), zeros(m + k)),
        affine_preimage(second.graph, selector(d, range(m, d)), zeros(k + n)),
    )
    return PolyMap(project(triple, list(range(m)) + list(range(m + k, d))), m, n)


def image_representatives(mapping: PolyMap, y: RVector) -> list[RVector]:
    """One value per cell of M(y) with respect to the graph hyperplanes through the slice."""
    image = mapping.image_at(y)
    if image.is_empty():
        return []
    cells = cells_within(image, slice_constraints(mapping.graph, 0, tuple(y)))
    logger.debug(f"{len(cells)} representatives of M({y})")
    return [cell.witness for cell in cells]


def require_on_graph(mapping: PolyMap, y: RVector, x: RVector) -> RVector:
    if len(y) != mapping.m or len(x) != mapping.n:
        raise DimensionMismatchError(f"point ({len(y)}, {len(x)}) for a map {mapping.m} => {mapping.n}")
    point = concat(y, x)
    if not mapping.graph.contains(point):
        distance = distance_inf(point, mapping.graph) if not mapping.graph.is_empty() else INF
        raise OffGraphError(f"({y}, {x}) is not on the graph", distance)
    return point


def _dual_swap(m: int, n: int) -> Matrix:
    """Matrix of (x*, y*) -> (y*, -x*)."""
    rows = [unit(n + m, n + i) for i in range(m)]
    rows += [tuple(-v for v in unit(n + m, j)) for j in range(n)]
    return tuple(rows)


def coderivative_from_normals(normals: PolyhedralSet, m: int, n: int) -> PolyMap:
    if normals.is_empty():
        return PolyMap(PolyhedralSet.empty(m + n), n, m)
    return PolyMap(affine_preimage(normals, _dual_swap(m, n), zeros(m + n)), n, m)


def graphical_derivative(mapping: PolyMap, y: RVector, x: RVector) -> PolyMap:
    point = require_on_graph(mapping, y, x)
    return PolyMap(tangent_set(mapping.graph, point), mapping.m, mapping.n)


def regular_coderivative(mapping: PolyMap, y: RVector, x: RVector) -> PolyMap:
    point = require_on_graph(mapping, y, x)
    return coderivative_from_normals(regular_normal_set(mapping.graph, point), mapping.m, mapping.n)


def limiting_coderivative(mapping: PolyMap, y: RVector, x: RVector) -> PolyMap:
    point = require_on_graph(mapping, y, x)
    return coderivative_from_normals(limiting_normal_set(mapping.graph, point), mapping.m, mapping.n)


def directional_limiting_coderivative(mapping: PolyMap, y: RVector, x: RVector, v: RVector, u: RVector) -> PolyMap:
    point = require_on_graph(mapping, y, x)
    direction = concat(v, u)
    if len(direction) != mapping.graph.dim:
        raise DimensionMismatchError(f"direction of length {len(direction)} for a graph of dimension {mapping.graph.dim}")
    return coderivative_from_normals(directional_normal_set(mapping.graph, point, direction), mapping.m, mapping.n)


def _check_epigraph(epigraph: PolyhedralSet, n: int) -> None:
    if epigraph.dim != n + 1:
        raise DimensionMismatchError(f"epigraph of dimension {epigraph.dim} for a function on R^{n}")
    for piece in epigraph.pieces:
        if any(a[n] > 0 for a, _ in piece.ineqs) or any(e[n] != 0 for e, _ in piece.eqs):
            raise NotEpigraphError("(0, 1) is not a recession direction of every piece")


@dataclass(frozen=True)
class PLFunction:
    """Extended-real piecewise-linear function R^n -> R given by its epigraph in (x, alpha) coordinates."""

    epigraph: PolyhedralSet
    n: int

    def __post_init__(self):
        _check_epigraph(self.epigraph, self.n)

    @classmethod
    def max_affine(cls, terms: Iterable[tuple[RVector, Fraction]], region: Optional[PolyhedralSet] = None) -> "PLFunction":
        """x -> max_i a_i.x + c_i, restricted to ``region`` when given."""
        terms = list(terms)
        n = len(terms[0][0]) if terms else region.dim
        ineqs = [(tuple(a) + (Fraction(-1),), -Fraction(c)) for a, c in terms]
        epigraph = PolyhedralSet.from_constraints(n + 1, ineqs)
        if region is not None:
            epigraph = intersect(epigraph, cartesian_product(region, PolyhedralSet.whole(1)))
        return cls(epigraph, n)

    @classmethod
    def indicator(cls, region: PolyhedralSet) -> "PLFunction":
        nonnegative = PolyhedralSet.from_constraints(1, [((Fraction(-1),), Fraction(0))])
        return cls(cartesian_product(region, nonnegative), region.dim)

    @classmethod
    def from_pieces(cls, n: int, pieces: Iterable[tuple[ConvexPolyhedron, RVector, Fraction]]) -> "PLFunction":
        """Union over (region, a, c) of {(x, alpha) : x in region, a.x + c <= alpha}."""
        lifted = []
        for region, a, c in pieces:
            ineqs = [(tuple(r) + (Fraction(0),), b) for r, b in region.ineqs]
            ineqs.append((tuple(a) + (Fraction(-1),), -Fraction(c)))
            eqs = [(tuple(r) + (Fraction(0),), b) for r, b in region.eqs]
            lifted.append(canonicalize(n + 1, ineqs, eqs))
        return cls(PolyhedralSet.from_pieces(n + 1, lifted), n)

    def value(self, x: RVector) -> Value:
        """f(x): +inf off the domain, -inf when unbounded below."""
        if len(x) != self.n:
            raise DimensionMismatchError(f"point of length {len(x)} for a function on R^{self.n}")
        best: Optional[Fraction] = None
        for piece in fix_coordinates(self.epigraph, 0, tuple(x)).pieces:
            result = minimize((Fraction(1),), piece.ineqs, piece.eqs)
            if result.status == "unbounded":
                return -INF
            if result.optimal and (best is None or result.value < best):
                best = result.value
        return INF if best is None else best

    def finite_value(self, x: RVector) -> Fraction:
        value = self.value(x)
        if not isinstance(value, Fraction):
            raise InfiniteValueError(f"f({x}) = {value}")
        return value

    def domain(self) -> PolyhedralSet:
        return project(self.epigraph, range(self.n))

    def as_map(self) -> PolyMap:
        """Epigraphical map x => [f(x), inf)."""
        return PolyMap(self.epigraph, self.n, 1)


def _level_slice(normals: PolyhedralSet, n: int, level: int) -> PolyhedralSet:
    return fix_coordinates(normals, n, (Fraction(level),))


def _epi_point(f: PLFunction, x: RVector) -> RVector:
    return tuple(x) + (f.finite_value(x),)


def subderivative(f: PLFunction, x: RVector) -> PLFunction:
    return PLFunction(tangent_set(f.epigraph, _epi_point(f, x)), f.n)


def regular_subdifferential(f: PLFunction, x: RVector) -> PolyhedralSet:
    return _level_slice(regular_normal_set(f.epigraph, _epi_point(f, x)), f.n, -1)


def limiting_subdifferential(f: PLFunction, x: RVector) -> PolyhedralSet:
    return _level_slice(limiting_normal_set(f.epigraph, _epi_point(f, x)), f.n, -1)


def singular_subdifferential(f: PLFunction, x: RVector) -> PolyhedralSet:
    return _level_slice(limiting_normal_set(f.epigraph, _epi_point(f, x)), f.n, 0)


def directional_subdifferential(f: PLFunction, x: RVector, u: RVector, mu: Fraction) -> PolyhedralSet:
    normals = directional_normal_set(f.epigraph, _epi_point(f, x), tuple(u) + (Fraction(mu),))
    return _level_slice(normals, f.n, -1)


def singular_directional_subdifferential(f: PLFunction, x: RVector, u: RVector, mu: Fraction) -> PolyhedralSet:
    normals = directional_normal_set(f.epigraph, _epi_point(f, x), tuple(u) + (Fraction(mu),))
    return _level_slice(normals, f.n, 0)


def derivative_of(
    mapping: PolyMap, y: RVector, x: RVector, kind: ConeKind, direction: Optional[RVector] = None
) -> PolyMap:
    """The derivative object built on the cone of the given kind; ``direction`` is a graph direction (v, u)."""
    kind = ConeKind(kind)
    if kind == ConeKind.TANGENT:
        return graphical_derivative(mapping, y, x)
    if kind == ConeKind.REGULAR_NORMAL:
        return regular_coderivative(mapping, y, x)
    if kind == ConeKind.LIMITING_NORMAL:
        return limiting_coderivative(mapping, y, x)
    if direction is None:
        raise ValueError("directional coderivative requires a direction")
    if len(direction) != mapping.m + mapping.n:
        raise DimensionMismatchError(f"direction of length {len(direction)} for a graph of dimension {mapping.m + mapping.n}")
    v, u = tuple(direction[: mapping.m]), tuple(direction[mapping.m:])
    return directional_limiting_coderivative(mapping, y, x, v, u)
