"""
Both sides of the domain and image estimates for polyhedral maps, and the sum,
intersection, image and pre-image rules for sets built on them.

Every relation is recomputed from the two sides with exact subset tests. An estimate
carries the relation that always holds (``guaranteed``) and the one that holds under
its hypotheses (``conditional``); a relation weaker than required is reported as
``observed`` when a hypothesis fails and as ``violated`` otherwise.

"Over all x in M(y)" unions and intersections are evaluated on one representative
per cell of M(y).
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Any, Optional, Sequence

from loguru import logger

from .arrangement import cells_within, origin_cells, set_subset
from .cones import cone_generators, nonzero_point
from .config import CONFIG, LimitsConfig
from .criteria import (
    Criterion,
    CriterionReport,
    check_fuzzy_inner_calmness_star,
    check_LRC,
    check_MC,
    coderivative_min_norm,
    fosc_directions,
    polyhedral_facts,
    zero_slice_report,
)
from .errors import ConsistencyError, DimensionMismatchError, LimitExceededError, MembershipError
from .mappings import (
    PolyMap,
    directional_limiting_coderivative,
    graphical_derivative,
    image_representatives,
    limiting_coderivative,
    regular_coderivative,
    require_on_graph,
)
from .polyhedron import (
    PolyhedralSet,
    affine_preimage,
    canonicalize,
    cartesian_product,
    intersect,
    intersect_all,
    minkowski_sum,
    negate,
    product_all,
    project,
    slice_constraints,
    union_all,
)
from .rational import INF, Matrix, RVector, add, concat, is_zero, mat_vec, neg, norm_inf, rank, transpose, unit, zeros
from .variational import (
    ConeKind,
    cone_of,
    directional_normal_set,
    limiting_normal_set,
    preimage_cones,
    tangent_set,
)


class Relation(str, Enum):
    EQUAL = "equal"
    LHS_SUBSET_RHS = "lhs_subset_rhs"
    RHS_SUBSET_LHS = "rhs_subset_lhs"
    INCOMPARABLE = "incomparable"

    def satisfies(self, required: "Relation") -> bool:
        return self == required or self == Relation.EQUAL


class Status(str, Enum):
    CERTIFIED = "certified"
    OBSERVED = "observed"
    VIOLATED = "violated"


_SEVERITY = {Status.CERTIFIED: 0, Status.OBSERVED: 1, Status.VIOLATED: 2}


def relate(lhs: PolyhedralSet, rhs: PolyhedralSet) -> tuple[Relation, dict[str, RVector]]:
    """Relation between two sets with a point for every failed inclusion."""
    forward = set_subset(lhs, rhs)
    backward = set_subset(rhs, lhs)
    witnesses = {}
    if not forward:
        witnesses["lhs_not_in_rhs"] = forward.witness
    if not backward:
        witnesses["rhs_not_in_lhs"] = backward.witness
    if forward and backward:
        return Relation.EQUAL, witnesses
    if forward:
        return Relation.LHS_SUBSET_RHS, witnesses
    if backward:
        return Relation.RHS_SUBSET_LHS, witnesses
    return Relation.INCOMPARABLE, witnesses


@dataclass(frozen=True)
class Estimate:
    label: str
    lhs: PolyhedralSet
    rhs: PolyhedralSet
    guaranteed: Optional[Relation]
    conditional: Optional[Relation]
    hypotheses_hold: bool
    relation: Relation
    status: Status
    witnesses: dict[str, RVector] = field(default_factory=dict)


def estimate(
    label: str,
    lhs: PolyhedralSet,
    rhs: PolyhedralSet,
    guaranteed: Optional[Relation] = None,
    conditional: Optional[Relation] = None,
    hypotheses_hold: bool = True,
) -> Estimate:
    relation, witnesses = relate(lhs, rhs)
    if guaranteed is not None and not relation.satisfies(guaranteed):
        status = Status.VIOLATED
    elif conditional is not None and not relation.satisfies(conditional):
        status = Status.VIOLATED if hypotheses_hold else Status.OBSERVED
    else:
        status = Status.CERTIFIED
    if status == Status.VIOLATED:
        logger.error(f"{label}: relation {relation.value} contradicts the required one")
    elif status == Status.OBSERVED:
        logger.warning(f"{label}: only {relation.value} observed, a hypothesis fails")
    else:
        logger.debug(f"{label}: {relation.value}")
    return Estimate(label, lhs, rhs, guaranteed, conditional, hypotheses_hold, relation, status, witnesses)


@dataclass(frozen=True)
class RuleReport:
    rule: str
    kind: str
    hypotheses: tuple[CriterionReport, ...]
    estimates: tuple[Estimate, ...]
    checks: tuple[CriterionReport, ...] = ()
    notes: tuple[str, ...] = ()
    values: dict[str, Any] = field(default_factory=dict)

    @property
    def primary(self) -> Estimate:
        return self.estimates[0]

    @property
    def lhs(self) -> PolyhedralSet:
        return self.primary.lhs

    @property
    def rhs(self) -> PolyhedralSet:
        return self.primary.rhs

    @property
    def relation(self) -> Relation:
        return self.primary.relation

    @property
    def status(self) -> Status:
        return max((e.status for e in self.estimates), key=_SEVERITY.__getitem__, default=Status.CERTIFIED)

    def extend(self, rule: Optional[str] = None, estimates=(), checks=(), notes=(), **values) -> "RuleReport":
        return replace(
            self,
            rule=rule or self.rule,
            estimates=self.estimates + tuple(estimates),
            checks=self.checks + tuple(checks),
            notes=self.notes + tuple(notes),
            values={**self.values, **values},
        )


def _require_direction(kind: ConeKind, direction: Optional[RVector], dim: int) -> None:
    if kind != ConeKind.DIRECTIONAL:
        return
    if direction is None:
        raise ValueError("directional cone requires a direction")
    if len(direction) != dim:
        raise DimensionMismatchError(f"direction of length {len(direction)} in dimension {dim}")


def check_term_count(count: int, limits: Optional[LimitsConfig] = None) -> None:
    limits = limits or CONFIG.limits
    if count < 1:
        raise ValueError("at least one term is required")
    if count > limits.max_terms:
        raise LimitExceededError(f"{count} terms exceed the limit of {limits.max_terms}")


def _box(dim: int, radius: Fraction) -> PolyhedralSet:
    ineqs = []
    for i in range(dim):
        ineqs.append((unit(dim, i), radius))
        ineqs.append((neg(unit(dim, i)), radius))
    return PolyhedralSet.from_constraints(dim, ineqs)


def bounded_domain(tangent: PolyhedralSet, m: int, n: int, kappa: Fraction) -> PolyhedralSet:
    """{v : some (v, u) in the cone union has ||u|| <= kappa ||v||}, in the infinity norm."""
    pieces = []
    for piece in tangent.pieces:
        for j in range(m):
            for sign in (1, -1):
                ineqs = list(piece.ineqs)
                for i in range(n):
                    for s in (1, -1):
                        row = [Fraction(0)] * (m + n)
                        row[m + i] = Fraction(s)
                        row[j] = -kappa * sign
                        ineqs.append((tuple(row), Fraction(0)))
                pieces.append(canonicalize(m + n, ineqs, piece.eqs))
    return project(PolyhedralSet.from_pieces(m + n, pieces), range(m))


def _directional_rhs(
    mapping: PolyMap, y: RVector, x: RVector, v: RVector, kappa: Optional[Fraction]
) -> PolyhedralSet:
    """Union of D*M((y, x); (v, u))(0) over u in DM(y, x)(v), with ||u|| <= kappa ||v|| when kappa is given."""
    derivative = graphical_derivative(mapping, y, x)
    values = derivative.image_at(v)
    if kappa is not None:
        values = intersect(values, _box(mapping.n, kappa * norm_inf(v)))
    if values.is_empty():
        return PolyhedralSet.empty(mapping.m)
    planes = slice_constraints(derivative.graph, 0, tuple(v))
    origin = zeros(mapping.n)
    parts = []
    for cell in cells_within(values, planes):
        coderivative = directional_limiting_coderivative(mapping, y, x, v, cell.witness)
        parts.append(coderivative.image_at(origin))
    return union_all(mapping.m, parts)


def _sphere_rhs(mapping: PolyMap, y: RVector, x: RVector) -> PolyhedralSet:
    origin_m, origin_n = zeros(mapping.m), zeros(mapping.n)
    parts = [
        directional_limiting_coderivative(mapping, y, x, origin_m, u).image_at(origin_n)
        for u in fosc_directions(mapping, y, x)
    ]
    return union_all(mapping.m, parts)


def domain_cones(mapping: PolyMap, y: RVector, kind: ConeKind, direction: Optional[RVector] = None) -> RuleReport:
    """Cones to dom M at y against the derivative objects of M over M(y)."""
    kind = ConeKind(kind)
    y = tuple(y)
    if len(y) != mapping.m:
        raise DimensionMismatchError(f"argument of length {len(y)} for a map on R^{mapping.m}")
    _require_direction(kind, direction, mapping.m)
    representatives = image_representatives(mapping, y)
    if not representatives:
        raise MembershipError(f"{y} is not in the domain")
    logger.info(f"domain {kind.value} estimate at {y} over {len(representatives)} representatives")
    domain = mapping.domain()
    lhs = cone_of(kind, domain, y, direction).cone
    fuzzy = check_fuzzy_inner_calmness_star(mapping, y)
    inner = polyhedral_facts(Criterion.INNER_CALM)
    hypotheses = (fuzzy, inner)
    origin = zeros(mapping.n)
    notes: list[str] = []
    values: dict[str, Any] = {"representatives": tuple(representatives), "modulus": fuzzy.modulus_bound}

    if kind == ConeKind.TANGENT:
        rhs = union_all(mapping.m, [graphical_derivative(mapping, y, x).domain() for x in representatives])
        estimates = [
            estimate("T dom M = union dom DM", lhs, rhs, Relation.RHS_SUBSET_LHS, Relation.EQUAL, fuzzy.verdict)
        ]
        if fuzzy.verdict and fuzzy.modulus_bound != INF:
            kappa = Fraction(fuzzy.modulus_bound) + 1
            bounded = union_all(
                mapping.m,
                [bounded_domain(tangent_set(mapping.graph, concat(y, x)), mapping.m, mapping.n, kappa)
                 for x in representatives],
            )
            estimates.append(
                estimate("T dom M = kappa-bounded union", lhs, bounded,
                         Relation.RHS_SUBSET_LHS, Relation.EQUAL, fuzzy.verdict)
            )
            notes.append(f"kappa = {kappa} from the modulus bound")
            values["kappa"] = kappa
    elif kind == ConeKind.REGULAR_NORMAL:
        rhs = intersect_all(
            mapping.m, [regular_coderivative(mapping, y, x).image_at(origin) for x in representatives]
        )
        estimates = [
            estimate("regular normals of dom M = intersection of regular coderivatives", lhs, rhs,
                     Relation.LHS_SUBSET_RHS, Relation.EQUAL, fuzzy.verdict)
        ]
    elif kind == ConeKind.LIMITING_NORMAL:
        rhs = union_all(mapping.m, [limiting_coderivative(mapping, y, x).image_at(origin) for x in representatives])
        estimates = [
            estimate("limiting normals of dom M in union of coderivatives", lhs, rhs,
                     conditional=Relation.LHS_SUBSET_RHS, hypotheses_hold=inner.verdict)
        ]
    else:
        v = tuple(direction)
        full = union_all(
            mapping.m,
            [_directional_rhs(mapping, y, x, v, None).union(_sphere_rhs(mapping, y, x)) for x in representatives],
        )
        estimates = [
            estimate("directional normals of dom M in both unions", lhs, full,
                     conditional=Relation.LHS_SUBSET_RHS, hypotheses_hold=inner.verdict)
        ]
        directional = check_fuzzy_inner_calmness_star(mapping, y, v) if not is_zero(v) else fuzzy
        if directional.verdict and directional.modulus_bound != INF:
            kappa = Fraction(directional.modulus_bound) + 1
            reduced = union_all(mapping.m, [_directional_rhs(mapping, y, x, v, kappa) for x in representatives])
            estimates.append(
                estimate("directional normals of dom M in the bounded first union", lhs, reduced,
                         conditional=Relation.LHS_SUBSET_RHS, hypotheses_hold=inner.verdict)
            )
            values["kappa"] = kappa
    return RuleReport("domain_cones", kind.value, hypotheses, tuple(estimates), notes=tuple(notes), values=values)


def multiplier_bound(mapping: PolyMap, y: RVector, x: RVector, normals: PolyhedralSet, direction=None) -> Any:
    """Largest min ||y*|| / ||x*|| with -x* running over generators of ``normals``."""
    worst = Fraction(0)
    for rays, lines in cone_generators(normals):
        for g in list(rays) + list(lines) + [neg(l) for l in lines]:
            value = coderivative_min_norm(mapping, y, x, neg(g), direction)
            if value == INF:
                return INF
            worst = max(worst, value / norm_inf(g))
    return worst


def image_cones(
    mapping: PolyMap, y: RVector, x: RVector, kind: ConeKind, direction: Optional[RVector] = None
) -> RuleReport:
    """Cones to M(y) at x against the derivative objects of M at (y, x)."""
    kind = ConeKind(kind)
    y, x = tuple(y), tuple(x)
    require_on_graph(mapping, y, x)
    _require_direction(kind, direction, mapping.n)
    logger.info(f"image {kind.value} estimate at ({y}, {x})")
    lhs = cone_of(kind, mapping.image_at(y), x, direction).cone
    calm = polyhedral_facts(Criterion.CALM)
    values: dict[str, Any] = {}
    if kind == ConeKind.TANGENT:
        rhs = graphical_derivative(mapping, y, x).image_at(zeros(mapping.m))
        estimates = [estimate("T M(y) = DM(0)", lhs, rhs, Relation.LHS_SUBSET_RHS, Relation.EQUAL, calm.verdict)]
    elif kind == ConeKind.REGULAR_NORMAL:
        rhs = negate(regular_coderivative(mapping, y, x).domain())
        estimates = [estimate("regular normals of M(y) contain -dom regular coderivative", lhs, rhs,
                              Relation.RHS_SUBSET_LHS)]
    elif kind == ConeKind.LIMITING_NORMAL:
        rhs = negate(limiting_coderivative(mapping, y, x).domain())
        estimates = [estimate("limiting normals of M(y) in -dom coderivative", lhs, rhs,
                              conditional=Relation.LHS_SUBSET_RHS, hypotheses_hold=calm.verdict)]
        values["multiplier_bound"] = multiplier_bound(mapping, y, x, lhs)
    else:
        u = tuple(direction)
        origin = zeros(mapping.m)
        rhs = negate(directional_limiting_coderivative(mapping, y, x, origin, u).domain())
        estimates = [estimate("directional normals of M(y) in -dom directional coderivative", lhs, rhs,
                              conditional=Relation.LHS_SUBSET_RHS, hypotheses_hold=calm.verdict)]
        values["multiplier_bound"] = multiplier_bound(mapping, y, x, lhs, (origin, u))
    return RuleReport("image_cones", kind.value, (calm,), tuple(estimates), values=values)


def _sum_zero(count: int, dim: int) -> PolyhedralSet:
    """{(z_1, ..., z_count) : z_1 + ... + z_count = 0}."""
    width = count * dim
    eqs = []
    for j in range(dim):
        row = [Fraction(0)] * width
        for i in range(count):
            row[i * dim + j] = Fraction(1)
        eqs.append((tuple(row), Fraction(0)))
    return PolyhedralSet.from_constraints(width, (), eqs)


def _kernel(rows: Matrix, dim: int) -> PolyhedralSet:
    return PolyhedralSet.from_constraints(dim, (), [(tuple(r), Fraction(0)) for r in rows])


def _blocks(point: RVector, count: int, dim: int) -> list[RVector]:
    return [tuple(point[i * dim:(i + 1) * dim]) for i in range(count)]


def _nonzero_witnesses(cone: PolyhedralSet) -> list[RVector]:
    return [cell.witness for cell in origin_cells(cone) if not is_zero(cell.witness)]


def _check_terms(sets: Sequence[PolyhedralSet], limits: Optional[LimitsConfig]) -> int:
    check_term_count(len(sets), limits)
    dim = sets[0].dim
    for target in sets:
        if target.dim != dim:
            raise DimensionMismatchError(f"sets of dimensions {dim} and {target.dim}")
    return dim


def sum_map(sets: Sequence[PolyhedralSet]) -> PolyMap:
    """y => {(y_1, ..., y_l) : y_i in D_i, y_1 + ... + y_l = y}; its domain is D_1 + ... + D_l."""
    count, m = len(sets), sets[0].dim
    d = m + count * m
    rows = [unit(d, m + k) for k in range(count * m)]
    for j in range(m):
        row = list(unit(d, j))
        for i in range(count):
            row[m + i * m + j] = Fraction(-1)
        rows.append(tuple(row))
    target = product_all(list(sets) + [PolyhedralSet.singleton(zeros(m))])
    return PolyMap(affine_preimage(target, tuple(rows), zeros(d)), m, count * m)


def sum_rule_conditions(
    sets: Sequence[PolyhedralSet], parts: Sequence[RVector]
) -> tuple[CriterionReport, CriterionReport]:
    """Tangent condition v_i in T_i, sum v_i = 0 => v = 0 and its directional normal refinement."""
    count, m = len(sets), sets[0].dim
    tangents = product_all([tangent_set(D, tuple(p)) for D, p in zip(sets, parts)])
    kernel = intersect(tangents, _sum_zero(count, m))
    isolated = zero_slice_report(Criterion.SUM_RULE_IC, kernel)
    for v in _nonzero_witnesses(kernel):
        normals = [directional_normal_set(D, tuple(p), b) for D, p, b in zip(sets, parts, _blocks(v, count, m))]
        star = nonzero_point(intersect_all(m, normals))
        if star is not None:
            logger.info(f"sum rule FOSCclm fails in direction {v}")
            return isolated, CriterionReport(Criterion.FOSCCLM, False, (v, star), notes=("sum rule",))
    return isolated, CriterionReport(Criterion.FOSCCLM, True, notes=("sum rule",))


def sum_rule(
    sets: Sequence[PolyhedralSet],
    y: RVector,
    parts: Sequence[RVector],
    kind: ConeKind,
    direction: Optional[RVector] = None,
    limits: Optional[LimitsConfig] = None,
) -> RuleReport:
    """Cones to D_1 + ... + D_l at y through the decomposition map."""
    m = _check_terms(sets, limits)
    if len(parts) != len(sets):
        raise DimensionMismatchError(f"{len(parts)} parts for {len(sets)} sets")
    for i, (target, part) in enumerate(zip(sets, parts)):
        if len(part) != m or not target.contains(part):
            raise MembershipError(f"part {i} = {tuple(part)} is not in its set")
    total = zeros(m)
    for part in parts:
        total = add(total, part)
    if total != tuple(y):
        raise MembershipError(f"parts sum to {total}, not {tuple(y)}")
    mapping = sum_map(sets)
    report = domain_cones(mapping, y, kind, direction)
    isolated, fosc = sum_rule_conditions(sets, parts)
    lrc = check_LRC(mapping, tuple(y), concat(*parts))
    if lrc.verdict != isolated.verdict:
        raise ConsistencyError("LRC of the decomposition map disagrees with the tangent condition")
    return report.extend("sum", checks=(isolated, fosc, lrc))


def intersection_map(sets: Sequence[PolyhedralSet]) -> PolyMap:
    """(x_1, ..., x_l) => {x : x + x_i in C_i}; its value at 0 is the intersection."""
    count, n = len(sets), sets[0].dim
    d = count * n + n
    rows = tuple(add(unit(d, i * n + j), unit(d, count * n + j)) for i in range(count) for j in range(n))
    return PolyMap(affine_preimage(product_all(sets), rows, zeros(count * n)), count * n, n)


def intersection_conditions(sets: Sequence[PolyhedralSet], x: RVector) -> tuple[CriterionReport, CriterionReport]:
    """Normal condition x*_i in N_i, sum x*_i = 0 => x* = 0 and its directional refinement."""
    count, n = len(sets), sets[0].dim
    zero_sum = _sum_zero(count, n)
    normals = intersect(product_all([limiting_normal_set(C, x) for C in sets]), zero_sum)
    aubin = zero_slice_report(Criterion.INTERSECTION_AUBIN, normals)
    tangent = intersect_all(n, [tangent_set(C, x) for C in sets])
    for u in _nonzero_witnesses(tangent):
        joint = intersect(product_all([directional_normal_set(C, x, u) for C in sets]), zero_sum)
        star = nonzero_point(joint)
        if star is not None:
            logger.info(f"intersection rule FOSCclm fails in direction {u}")
            return aubin, CriterionReport(Criterion.FOSCCLM, False, (u, star), notes=("intersection rule",))
    return aubin, CriterionReport(Criterion.FOSCCLM, True, notes=("intersection rule",))


def intersection_rule(
    sets: Sequence[PolyhedralSet],
    x: RVector,
    kind: ConeKind,
    direction: Optional[RVector] = None,
    limits: Optional[LimitsConfig] = None,
) -> RuleReport:
    """Cones to C_1 n ... n C_l at x through the perturbation map."""
    kind = ConeKind(kind)
    n = _check_terms(sets, limits)
    x = tuple(x)
    for i, target in enumerate(sets):
        if len(x) != n or not target.contains(x):
            raise MembershipError(f"{x} is not in set {i}")
    mapping = intersection_map(sets)
    origin = zeros(len(sets) * n)
    report = image_cones(mapping, origin, x, kind, direction)
    aubin, fosc = intersection_conditions(sets, x)
    mc = check_MC(mapping, origin, x)
    if mc.verdict != aubin.verdict:
        raise ConsistencyError("MC of the perturbation map disagrees with the normal condition")
    estimates = []
    if kind in (ConeKind.REGULAR_NORMAL, ConeKind.LIMITING_NORMAL):
        factors = [cone_of(kind, target, x).cone for target in sets]
        total = factors[0]
        for factor in factors[1:]:
            total = minkowski_sum(total, factor)
        if kind == ConeKind.REGULAR_NORMAL:
            estimates.append(estimate("regular normals contain the sum over the sets", report.lhs, total,
                                      Relation.RHS_SUBSET_LHS))
        else:
            estimates.append(estimate("limiting normals in the sum over the sets", report.lhs, total,
                                      conditional=Relation.LHS_SUBSET_RHS,
                                      hypotheses_hold=aubin.verdict))
    return report.extend("intersection", estimates, checks=(aubin, fosc, mc))


def _check_affine(a: Matrix, shift: RVector, dim: int) -> int:
    rows = len(a)
    if len(shift) != rows or any(len(r) != dim for r in a):
        raise DimensionMismatchError(f"map of {rows} rows does not act on R^{dim}")
    return rows


def image_map(a: Matrix, shift: RVector, target: PolyhedralSet) -> PolyMap:
    """y => {x in C : A x + s = y}; its domain is A(C) + s."""
    m, n = _check_affine(a, shift, target.dim), target.dim
    eqs = [(concat(unit(m, i), neg(a[i])), shift[i]) for i in range(m)]
    graph = intersect(
        cartesian_product(PolyhedralSet.whole(m), target), PolyhedralSet.from_constraints(m + n, (), eqs)
    )
    return PolyMap(graph, m, n)


def image_conditions(
    a: Matrix, target: PolyhedralSet, representatives: Sequence[RVector]
) -> tuple[CriterionReport, CriterionReport]:
    """A u = 0, u in T_C(x) => u = 0 and its directional refinement, at every representative x."""
    n = target.dim
    minus_transpose = tuple(neg(row) for row in transpose(a, n))
    isolated = CriterionReport(Criterion.LRC, True, notes=("image rule",))
    for x in representatives:
        kernel = intersect(tangent_set(target, x), _kernel(a, n))
        report = zero_slice_report(Criterion.LRC, kernel, (f"image rule at x = {x}",))
        if not report.verdict:
            isolated = report
        for u in _nonzero_witnesses(kernel):
            multipliers = affine_preimage(directional_normal_set(target, x, u), minus_transpose, zeros(n))
            star = nonzero_point(multipliers)
            if star is not None:
                fosc = CriterionReport(Criterion.FOSCCLM, False, (u, star), notes=(f"image rule at x = {x}",))
                return isolated, fosc
    return isolated, CriterionReport(Criterion.FOSCCLM, True, notes=("image rule",))


def image_rule(
    a: Matrix, shift: RVector, target: PolyhedralSet, y: RVector, kind: ConeKind, direction: Optional[RVector] = None
) -> RuleReport:
    """Cones to A(C) + s at y."""
    mapping = image_map(a, shift, target)
    y = tuple(y)
    if mapping.image_at(y).is_empty():
        raise MembershipError(f"{y} is not in the image")
    report = domain_cones(mapping, y, kind, direction)
    isolated, fosc = image_conditions(a, target, report.values["representatives"])
    return report.extend("image", checks=(isolated, fosc))


def preimage_map(a: Matrix, shift: RVector, target: PolyhedralSet) -> PolyMap:
    """y => {x : A x + s + y in D}; its value at 0 is the pre-image."""
    m = target.dim
    n = len(a[0]) if a else 0
    _check_affine(a, shift, n)
    if len(a) != m:
        raise DimensionMismatchError(f"map into R^{len(a)} for a set in R^{m}")
    rows = tuple(concat(unit(m, i), a[i]) for i in range(m))
    return PolyMap(affine_preimage(target, rows, tuple(shift)), m, n)


def preimage_conditions(a: Matrix, shift: RVector, target: PolyhedralSet, x: RVector) -> tuple[CriterionReport, CriterionReport]:
    """A^T y* = 0, y* in N_D(g(x)) => y* = 0 and its directional refinement."""
    m, n = target.dim, len(x)
    image = add(mat_vec(a, x), shift)
    kernel = _kernel(transpose(a, n), m)
    aubin = zero_slice_report(Criterion.MC, intersect(limiting_normal_set(target, image), kernel), ("pre-image rule",))
    tangent = affine_preimage(tangent_set(target, image), a, zeros(m))
    for u in _nonzero_witnesses(tangent):
        star = nonzero_point(intersect(directional_normal_set(target, image, mat_vec(a, u)), kernel))
        if star is not None:
            return aubin, CriterionReport(Criterion.FOSCCLM, False, (u, star), notes=("pre-image rule",))
    return aubin, CriterionReport(Criterion.FOSCCLM, True, notes=("pre-image rule",))


def preimage_rule(
    a: Matrix, shift: RVector, target: PolyhedralSet, x: RVector, kind: ConeKind, direction: Optional[RVector] = None
) -> RuleReport:
    """Cones to {x : A x + s in D} at x."""
    kind = ConeKind(kind)
    mapping = preimage_map(a, shift, target)
    x = tuple(x)
    if len(x) != mapping.n or not target.contains(add(mat_vec(a, x), shift)):
        raise MembershipError(f"A x + s is not in the set for x = {x}")
    report = image_cones(mapping, zeros(mapping.m), x, kind, direction)
    aubin, fosc = preimage_conditions(a, shift, target, x)
    estimates = []
    if rank(a) == mapping.m:
        formula = preimage_cones(a, shift, target, x, kind, direction).cone
        estimates.append(estimate("change of coordinates", report.lhs, formula, Relation.EQUAL))
    return report.extend("preimage", estimates, checks=(aubin, fosc))
