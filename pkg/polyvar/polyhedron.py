"""
Convex polyhedra and finite unions of them, in canonical H-representation.

A ConvexPolyhedron is always nonempty and canonical: equalities span the affine
hull in reduced row echelon form, inequalities are irredundant facets reduced
modulo the equalities, scaled so the first nonzero normal entry is +-1 and
sorted lexicographically. Two canonical pieces describe the same set iff they
compare equal.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from loguru import logger

from .config import CONFIG, LimitsConfig
from .errors import DimensionMismatchError, EmptyPolyhedronError, EmptySetError, LimitExceededError
from .lp import Constraint, maximize, minimize, strict_solution
from .rational import (
    Matrix,
    RVector,
    concat,
    dot,
    identity,
    inverse,
    is_zero,
    mat_vec,
    normalize_leading,
    rank,
    rref,
    selector,
    transpose,
    unit,
    vec,
    zeros,
)

# intermediate Fourier-Motzkin systems larger than this get an LP redundancy pass
PRUNE_THRESHOLD = 24


def _normalized(a: Sequence[Fraction], b: Fraction) -> Constraint:
    normal, factor = normalize_leading(a)
    return normal, b * factor


def _implicit_equalities(dim: int, ineqs: list[Constraint], eqs: list[Constraint]) -> Optional[set[int]]:
    """Indices of inequalities tight on the whole polyhedron; None if it is empty."""
    unresolved = set(range(len(ineqs)))
    while True:
        order = sorted(unresolved)
        width = dim + len(order)
        slack_of = {i: dim + pos for pos, i in enumerate(order)}
        rows: list[Constraint] = []
        for i, (a, b) in enumerate(ineqs):
            row = list(a) + [Fraction(0)] * len(order)
            if i in slack_of:
                row[slack_of[i]] = Fraction(1)
            rows.append((tuple(row), b))
        for i in order:
            rows.append((unit(width, slack_of[i]), Fraction(1)))
            rows.append((tuple(-x for x in unit(width, slack_of[i])), Fraction(0)))
        lifted_eqs = [(tuple(a) + zeros(len(order)), b) for a, b in eqs]
        objective = zeros(dim) + (Fraction(-1),) * len(order)
        result = minimize(objective, rows, lifted_eqs)
        if not result.optimal:
            return None
        loose = {i for i in order if result.point[slack_of[i]] > 0}
        if not loose:
            return unresolved
        unresolved -= loose
        if not unresolved:
            return set()


def _affine_hull(dim: int, eqs: list[Constraint]) -> Optional[list[tuple[RVector, Fraction, int]]]:
    if not eqs:
        return []
    reduced, pivots = rref([list(a) + [b] for a, b in eqs], dim)
    if len(reduced) > len(pivots):
        return None
    return [(tuple(row[:dim]), row[dim], p) for row, p in zip(reduced, pivots)]


def _reduce(a: RVector, b: Fraction, hull: list[tuple[RVector, Fraction, int]]) -> Constraint:
    for row, rhs, p in hull:
        c = a[p]
        if c != 0:
            a = tuple(x - c * y for x, y in zip(a, row))
            b = b - c * rhs
    return a, b


def _deduplicate(ineqs: Iterable[Constraint]) -> list[Constraint]:
    tightest: dict[RVector, Fraction] = {}
    for a, b in ineqs:
        normal, offset = _normalized(a, b)
        if normal not in tightest or offset < tightest[normal]:
            tightest[normal] = offset
    return sorted(tightest.items())


def _drop_redundant(ineqs: list[Constraint], eqs: Sequence[Constraint]) -> list[Constraint]:
    kept = list(ineqs)
    i = 0
    while i < len(kept):
        a, b = kept[i]
        result = maximize(a, kept[:i] + kept[i + 1 :], eqs)
        if result.optimal and result.value <= b:
            del kept[i]
        else:
            i += 1
    return kept


def canonicalize(dim: int, ineqs: Iterable[Constraint], eqs: Iterable[Constraint]) -> Optional["ConvexPolyhedron"]:
    work_ineqs: list[Constraint] = []
    for a, b in ineqs:
        a, b = vec(a), Fraction(b)
        if len(a) != dim:
            raise DimensionMismatchError(f"normal of length {len(a)} in dimension {dim}")
        if is_zero(a):
            if b < 0:
                return None
            continue
        work_ineqs.append((a, b))
    work_eqs: list[Constraint] = []
    for a, b in eqs:
        a, b = vec(a), Fraction(b)
        if len(a) != dim:
            raise DimensionMismatchError(f"normal of length {len(a)} in dimension {dim}")
        if is_zero(a):
            if b != 0:
                return None
            continue
        work_eqs.append((a, b))

    if work_ineqs:
        implicit = _implicit_equalities(dim, work_ineqs, work_eqs)
        if implicit is None:
            return None
    else:
        implicit = set()
    hull = _affine_hull(dim, work_eqs + [work_ineqs[i] for i in sorted(implicit)])
    if hull is None:
        return None
    reduced = []
    for i, (a, b) in enumerate(work_ineqs):
        if i in implicit:
            continue
        a, b = _reduce(a, b, hull)
        if is_zero(a):
            continue
        reduced.append((a, b))
    canonical_eqs = tuple((row, rhs) for row, rhs, _ in hull)
    kept = _drop_redundant(_deduplicate(reduced), canonical_eqs)
    return ConvexPolyhedron(dim, tuple(sorted(kept)), canonical_eqs)


@dataclass(frozen=True)
class ConvexPolyhedron:
    """One nonempty convex piece; build it with ``from_constraints`` to get the canonical form."""

    dim: int
    ineqs: tuple[Constraint, ...] = ()
    eqs: tuple[Constraint, ...] = ()

    @classmethod
    def from_constraints(
        cls, dim: int, ineqs: Iterable[Constraint] = (), eqs: Iterable[Constraint] = ()
    ) -> "ConvexPolyhedron":
        piece = canonicalize(dim, ineqs, eqs)
        if piece is None:
            raise EmptyPolyhedronError("constraint system is infeasible")
        return piece

    @classmethod
    def whole(cls, dim: int) -> "ConvexPolyhedron":
        return cls(dim)

    @classmethod
    def singleton(cls, point: RVector) -> "ConvexPolyhedron":
        n = len(point)
        return cls(n, (), tuple((unit(n, i), point[i]) for i in range(n)))

    def key(self) -> tuple:
        return (self.eqs, self.ineqs)

    def contains(self, point: Sequence[Fraction]) -> bool:
        if len(point) != self.dim:
            raise DimensionMismatchError(f"point of length {len(point)} in dimension {self.dim}")
        return all(dot(a, point) <= b for a, b in self.ineqs) and all(dot(a, point) == b for a, b in self.eqs)

    def is_cone(self) -> bool:
        return all(b == 0 for _, b in self.ineqs) and all(b == 0 for _, b in self.eqs)

    def is_singleton(self) -> bool:
        return len(self.eqs) == self.dim

    @property
    def constraint_count(self) -> int:
        return len(self.ineqs) + len(self.eqs)

    @property
    def affine_dim(self) -> int:
        return self.dim - len(self.eqs)

    def interior_point(self) -> RVector:
        """A point of the relative interior; canonical pieces always have one."""
        return strict_solution(self.dim, (), self.eqs, self.ineqs)


def piece_subset(p: ConvexPolyhedron, q: ConvexPolyhedron) -> bool:
    """Exact containment of one convex piece in another."""
    if p.affine_dim > q.affine_dim:
        return False
    for a, b in q.ineqs:
        result = maximize(a, p.ineqs, p.eqs)
        if not result.optimal or result.value > b:
            return False
    for e, f in q.eqs:
        high = maximize(e, p.ineqs, p.eqs)
        low = minimize(e, p.ineqs, p.eqs)
        if not (high.optimal and low.optimal and high.value == f and low.value == f):
            return False
    return True


@dataclass(frozen=True)
class PolyhedralSet:
    """Finite union of convex pieces; the empty set has no pieces."""

    dim: int
    pieces: tuple[ConvexPolyhedron, ...] = ()

    @classmethod
    def from_pieces(cls, dim: int, pieces: Iterable[Optional[ConvexPolyhedron]]) -> "PolyhedralSet":
        unique: dict[tuple, ConvexPolyhedron] = {}
        for piece in pieces:
            if piece is None:
                continue
            if piece.dim != dim:
                raise DimensionMismatchError(f"piece of dimension {piece.dim} in a set of dimension {dim}")
            unique.setdefault(piece.key(), piece)
        ordered = [unique[k] for k in sorted(unique)]
        # distinct canonical pieces are distinct sets, so containment here is strict
        kept = [
            piece
            for i, piece in enumerate(ordered)
            if not any(j != i and piece_subset(piece, other) for j, other in enumerate(ordered))
        ]
        return cls(dim, tuple(kept))

    @classmethod
    def from_constraints(
        cls, dim: int, ineqs: Iterable[Constraint] = (), eqs: Iterable[Constraint] = ()
    ) -> "PolyhedralSet":
        return cls.from_pieces(dim, [canonicalize(dim, ineqs, eqs)])

    @classmethod
    def empty(cls, dim: int) -> "PolyhedralSet":
        return cls(dim)

    @classmethod
    def whole(cls, dim: int) -> "PolyhedralSet":
        return cls(dim, (ConvexPolyhedron.whole(dim),))

    @classmethod
    def singleton(cls, point: RVector) -> "PolyhedralSet":
        return cls(len(point), (ConvexPolyhedron.singleton(point),))

    def is_empty(self) -> bool:
        return not self.pieces

    def contains(self, point: Sequence[Fraction]) -> bool:
        return any(piece.contains(point) for piece in self.pieces)

    def is_cone(self) -> bool:
        return all(piece.is_cone() for piece in self.pieces)

    def is_origin(self) -> bool:
        """True iff the set is exactly {0}."""
        return bool(self.pieces) and all(p.is_singleton() and p.is_cone() for p in self.pieces)

    def union(self, other: "PolyhedralSet") -> "PolyhedralSet":
        _check_dims(self, other)
        return PolyhedralSet.from_pieces(self.dim, self.pieces + other.pieces)

    def hyperplanes(self) -> list[Constraint]:
        planes = []
        for piece in self.pieces:
            planes.extend(piece.ineqs)
            planes.extend(piece.eqs)
        return planes


def union_all(dim: int, sets: Iterable[PolyhedralSet]) -> PolyhedralSet:
    pieces: list[ConvexPolyhedron] = []
    for s in sets:
        if s.dim != dim:
            raise DimensionMismatchError(f"set of dimension {s.dim} in a union of dimension {dim}")
        pieces.extend(s.pieces)
    return PolyhedralSet.from_pieces(dim, pieces)


def _check_dims(a: PolyhedralSet, b: PolyhedralSet) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimensions {a.dim} and {b.dim} differ")


def enforce_limits(target: PolyhedralSet, limits: Optional[LimitsConfig] = None, name: str = "set") -> None:
    limits = limits or CONFIG.limits
    if target.dim > limits.max_dim:
        raise LimitExceededError(f"{name}: dimension {target.dim} exceeds the limit {limits.max_dim}")
    if len(target.pieces) > limits.max_pieces:
        raise LimitExceededError(f"{name}: {len(target.pieces)} pieces exceed the limit {limits.max_pieces}")
    for piece in target.pieces:
        if piece.constraint_count > limits.max_constraints:
            raise LimitExceededError(
                f"{name}: a piece with {piece.constraint_count} constraints exceeds the limit {limits.max_constraints}"
            )


def _matrix_shape(a: Matrix, cols: int) -> None:
    if any(len(row) != cols for row in a):
        raise DimensionMismatchError(f"matrix rows must have length {cols}")


def affine_preimage(target: PolyhedralSet, a: Matrix, shift: RVector) -> PolyhedralSet:
    """{z : A z + s in target}; A maps R^n to R^target.dim."""
    if len(a) != target.dim or len(shift) != target.dim:
        raise DimensionMismatchError(f"map into dimension {len(a)} for a set of dimension {target.dim}")
    n = len(a[0]) if a else 0
    at = transpose(a, n)
    pieces = []
    for piece in target.pieces:
        ineqs = [(mat_vec(at, normal), b - dot(normal, shift)) for normal, b in piece.ineqs]
        eqs = [(mat_vec(at, normal), b - dot(normal, shift)) for normal, b in piece.eqs]
        pieces.append(canonicalize(n, ineqs, eqs))
    return PolyhedralSet.from_pieces(n, pieces)


def _tidy(ineqs: list[Constraint], eqs: list[Constraint]) -> list[Constraint]:
    # zero rows with a negative offset are kept so canonicalize sees the infeasibility
    out = _deduplicate((a, b) for a, b in ineqs if not (is_zero(a) and b >= 0))
    if len(out) > PRUNE_THRESHOLD:
        out = _drop_redundant(out, eqs)
    return out


def eliminate(
    dim: int, ineqs: Sequence[Constraint], eqs: Sequence[Constraint], columns: Sequence[int]
) -> tuple[list[Constraint], list[Constraint]]:
    """Fourier-Motzkin projection removing ``columns``; equalities are used for substitution first."""
    work_ineqs = [(tuple(a), Fraction(b)) for a, b in ineqs]
    work_eqs = [(tuple(a), Fraction(b)) for a, b in eqs]
    for j in columns:
        pivot = next((e for e in work_eqs if e[0][j] != 0), None)
        if pivot is not None:
            work_eqs.remove(pivot)
            pa, pb = pivot
            c = pa[j]

            def substitute(con: Constraint) -> Constraint:
                a, b = con
                f = a[j] / c
                if f == 0:
                    return con
                return tuple(x - f * y for x, y in zip(a, pa)), b - f * pb

            work_eqs = [substitute(e) for e in work_eqs]
            work_eqs = [e for e in work_eqs if not (is_zero(e[0]) and e[1] == 0)]
            work_ineqs = [substitute(i) for i in work_ineqs]
        else:
            positive = [(a, b) for a, b in work_ineqs if a[j] > 0]
            negative = [(a, b) for a, b in work_ineqs if a[j] < 0]
            combined = [(a, b) for a, b in work_ineqs if a[j] == 0]
            for ap, bp in positive:
                for an, bn in negative:
                    lam, mu = ap[j], -an[j]
                    combined.append((tuple(mu * x + lam * y for x, y in zip(ap, an)), mu * bp + lam * bn))
            logger.debug(f"eliminated column {j}: {len(positive)}x{len(negative)} -> {len(combined)} rows")
            work_ineqs = combined
        work_ineqs = _tidy(work_ineqs, work_eqs)
    keep = [i for i in range(dim) if i not in set(columns)]

    def restrict(con: Constraint) -> Constraint:
        return tuple(con[0][i] for i in keep), con[1]

    return [restrict(c) for c in work_ineqs], [restrict(c) for c in work_eqs]


def affine_image(target: PolyhedralSet, a: Matrix, shift: RVector) -> PolyhedralSet:
    """{A z + s : z in target}, by projecting the lifted graph system."""
    k = len(a)
    n = target.dim
    _matrix_shape(a, n)
    if len(shift) != k:
        raise DimensionMismatchError(f"shift of length {len(shift)} for a map into dimension {k}")
    if k == n and k > 0 and rank(a) == n:
        return affine_preimage(target, inverse(a), tuple(-x for x in mat_vec(inverse(a), shift)))
    pieces = []
    for piece in target.pieces:
        ineqs = [(zeros(k) + normal, b) for normal, b in piece.ineqs]
        eqs = [(zeros(k) + normal, b) for normal, b in piece.eqs]
        for i in range(k):
            eqs.append((unit(k, i) + tuple(-x for x in a[i]), shift[i]))
        out_ineqs, out_eqs = eliminate(k + n, ineqs, eqs, list(range(k, k + n)))
        pieces.append(canonicalize(k, out_ineqs, out_eqs))
    return PolyhedralSet.from_pieces(k, pieces)


def project(target: PolyhedralSet, coords: Sequence[int]) -> PolyhedralSet:
    return affine_image(target, selector(target.dim, coords), zeros(len(coords)))


def intersect(a: PolyhedralSet, b: PolyhedralSet) -> PolyhedralSet:
    _check_dims(a, b)
    pieces = [
        canonicalize(a.dim, p.ineqs + q.ineqs, p.eqs + q.eqs) for p in a.pieces for q in b.pieces
    ]
    return PolyhedralSet.from_pieces(a.dim, pieces)


def intersect_all(dim: int, sets: Sequence[PolyhedralSet]) -> PolyhedralSet:
    result = PolyhedralSet.whole(dim)
    for s in sets:
        result = intersect(result, s)
    return result


def _lift(con: Constraint, before: int, after: int) -> Constraint:
    return zeros(before) + tuple(con[0]) + zeros(after), con[1]


def cartesian_product(a: PolyhedralSet, b: PolyhedralSet) -> PolyhedralSet:
    dim = a.dim + b.dim
    pieces = []
    for p in a.pieces:
        for q in b.pieces:
            ineqs = [_lift(c, 0, b.dim) for c in p.ineqs] + [_lift(c, a.dim, 0) for c in q.ineqs]
            eqs = [_lift(c, 0, b.dim) for c in p.eqs] + [_lift(c, a.dim, 0) for c in q.eqs]
            # block structure keeps both factors canonical
            pieces.append(ConvexPolyhedron(dim, tuple(sorted(ineqs)), tuple(eqs)))
    return PolyhedralSet.from_pieces(dim, pieces)


def product_all(sets: Sequence[PolyhedralSet]) -> PolyhedralSet:
    result = PolyhedralSet(0, (ConvexPolyhedron(0),))
    for s in sets:
        result = cartesian_product(result, s)
    return result


def minkowski_sum(a: PolyhedralSet, b: PolyhedralSet) -> PolyhedralSet:
    _check_dims(a, b)
    n = a.dim
    pieces = []
    for p in a.pieces:
        for q in b.pieces:
            ineqs = [_lift(c, n, n) for c in p.ineqs] + [_lift(c, 2 * n, 0) for c in q.ineqs]
            eqs = [_lift(c, n, n) for c in p.eqs] + [_lift(c, 2 * n, 0) for c in q.eqs]
            for i in range(n):
                eqs.append((concat(unit(n, i), tuple(-x for x in unit(n, i)), tuple(-x for x in unit(n, i))), Fraction(0)))
            out_ineqs, out_eqs = eliminate(3 * n, ineqs, eqs, list(range(n, 3 * n)))
            pieces.append(canonicalize(n, out_ineqs, out_eqs))
    return PolyhedralSet.from_pieces(n, pieces)


def negate(target: PolyhedralSet) -> PolyhedralSet:
    n = target.dim
    return affine_preimage(target, tuple(tuple(-x for x in row) for row in identity(n)), zeros(n))


def distance_inf(point: RVector, target: PolyhedralSet) -> Fraction:
    if len(point) != target.dim:
        raise DimensionMismatchError(f"point of length {len(point)} in dimension {target.dim}")
    if target.is_empty():
        raise EmptySetError("distance to empty set")
    n = target.dim
    best: Optional[Fraction] = None
    objective = zeros(n) + (Fraction(1),)
    for piece in target.pieces:
        ineqs = [(tuple(a) + (Fraction(0),), b) for a, b in piece.ineqs]
        eqs = [(tuple(a) + (Fraction(0),), b) for a, b in piece.eqs]
        for i in range(n):
            ineqs.append((unit(n, i) + (Fraction(-1),), point[i]))
            ineqs.append((tuple(-x for x in unit(n, i)) + (Fraction(-1),), -point[i]))
        result = minimize(objective, ineqs, eqs)
        if best is None or result.value < best:
            best = result.value
    return best


def min_norm_on_slice(piece: ConvexPolyhedron, prefix: RVector) -> Optional[Fraction]:
    """min ||u||_inf over {u : (prefix, u) in piece}; None when the slice is empty."""
    m = len(prefix)
    n = piece.dim - m
    ineqs = []
    eqs = []
    for a, b in piece.ineqs:
        ineqs.append((tuple(a[m:]) + (Fraction(0),), b - dot(a[:m], prefix)))
    for a, b in piece.eqs:
        eqs.append((tuple(a[m:]) + (Fraction(0),), b - dot(a[:m], prefix)))
    for i in range(n):
        ineqs.append((unit(n, i) + (Fraction(-1),), Fraction(0)))
        ineqs.append((tuple(-x for x in unit(n, i)) + (Fraction(-1),), Fraction(0)))
    result = minimize(zeros(n) + (Fraction(1),), ineqs, eqs)
    return result.value if result.optimal else None


def fix_coordinates(target: PolyhedralSet, start: int, values: RVector) -> PolyhedralSet:
    """Slice of ``target`` with coordinates start..start+len(values) fixed, in the remaining coordinates."""
    stop = start + len(values)
    if stop > target.dim:
        raise DimensionMismatchError(f"cannot fix coordinates {start}..{stop} of a set of dimension {target.dim}")

    def restrict(con: Constraint) -> Constraint:
        a, b = con
        return tuple(a[:start]) + tuple(a[stop:]), b - dot(a[start:stop], values)

    dim = target.dim - len(values)
    pieces = [
        canonicalize(dim, [restrict(c) for c in piece.ineqs], [restrict(c) for c in piece.eqs])
        for piece in target.pieces
    ]
    return PolyhedralSet.from_pieces(dim, pieces)


def slice_constraints(target: PolyhedralSet, start: int, values: RVector) -> list[Constraint]:
    """Every constraint hyperplane of ``target`` restricted to the same slice."""
    stop = start + len(values)
    return [
        (tuple(a[:start]) + tuple(a[stop:]), b - dot(a[start:stop], values)) for a, b in target.hyperplanes()
    ]
