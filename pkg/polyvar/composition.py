"""
Chain and product rules for polyhedral maps: compositions through the intermediate
map and its perturbation map, products x => G1(x) x G2(x), the decoupled sum and the
intersection form of the product rule.

Derivative objects are compared as graphs. Coderivative graphs are in (dual value,
dual argument) coordinates.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from loguru import logger

from .arrangement import set_equal
from .calculus import Relation, RuleReport, estimate, relate
from .criteria import (
    Criterion,
    CriterionReport,
    check_fuzzy_inner_calmness_star,
    check_MC,
    polyhedral_facts,
    zero_slice_report,
)
from .errors import ConsistencyError, DimensionMismatchError, HypothesisViolatedError, MembershipError
from .mappings import (
    PolyMap,
    coderivative_from_normals,
    compose,
    derivative_of,
    directional_limiting_coderivative,
    graphical_derivative,
    image_representatives,
    limiting_coderivative,
    require_on_graph,
)
from .polyhedron import (
    PolyhedralSet,
    affine_image,
    affine_preimage,
    fix_coordinates,
    intersect,
    intersect_all,
    negate,
    product_all,
    union_all,
)
from .rational import Matrix, RVector, add, concat, neg, selector, sub, unit, zeros
from .variational import ConeKind, preimage_cones, tangent_set


def _embed(graph: PolyhedralSet, dim: int, coords: Sequence[int]) -> PolyhedralSet:
    """{w in R^dim : w restricted to ``coords`` lies in ``graph``}."""
    coords = list(coords)
    return affine_preimage(graph, selector(dim, coords), zeros(len(coords)))


def joint_values(first: PolyMap, second: PolyMap) -> PolyMap:
    """x => first(x) x second(x)."""
    if first.m != second.m:
        raise DimensionMismatchError(f"maps on R^{first.m} and R^{second.m}")
    n, l1, l2 = first.m, first.n, second.n
    d = n + l1 + l2
    graph = intersect(
        _embed(first.graph, d, range(n + l1)),
        _embed(second.graph, d, [*range(n), *range(n + l1, d)]),
    )
    return PolyMap(graph, n, l1 + l2)


def joint_arguments(first: PolyMap, second: PolyMap) -> PolyMap:
    """(y1, y2) => first(y1) n second(y2)."""
    if first.n != second.n:
        raise DimensionMismatchError(f"maps into R^{first.n} and R^{second.n}")
    m1, m2, n = first.m, second.m, first.n
    d = m1 + m2 + n
    graph = intersect(
        _embed(first.graph, d, [*range(m1), *range(m1 + m2, d)]),
        _embed(second.graph, d, range(m1, d)),
    )
    return PolyMap(graph, m1 + m2, n)


def summed_values(first: PolyMap, second: PolyMap) -> PolyMap:
    """(y1, y2) => first(y1) + second(y2)."""
    if first.n != second.n:
        raise DimensionMismatchError(f"maps into R^{first.n} and R^{second.n}")
    m1, m2, n = first.m, second.m, first.n
    m = m1 + m2
    d = m + 2 * n
    lifted = intersect(
        _embed(first.graph, d, [*range(m1), *range(m, m + n)]),
        _embed(second.graph, d, [*range(m1, m), *range(m + n, d)]),
    )
    rows = [unit(d, i) for i in range(m)] + [add(unit(d, m + j), unit(d, m + n + j)) for j in range(n)]
    return PolyMap(affine_image(lifted, tuple(rows), zeros(m + n)), m, n)


def summed_arguments(first: PolyMap, second: PolyMap) -> PolyMap:
    """x => union over x1 + x2 = x of first(x1) x second(x2)."""
    if first.m != second.m:
        raise DimensionMismatchError(f"maps on R^{first.m} and R^{second.m}")
    m, n1, n2 = first.m, first.n, second.n
    d = 2 * m + n1 + n2
    lifted = intersect(
        _embed(first.graph, d, [*range(m), *range(2 * m, 2 * m + n1)]),
        _embed(second.graph, d, [*range(m, 2 * m), *range(2 * m + n1, d)]),
    )
    rows = [add(unit(d, i), unit(d, m + i)) for i in range(m)] + [unit(d, k) for k in range(2 * m, d)]
    return PolyMap(affine_image(lifted, tuple(rows), zeros(m + n1 + n2)), m, n1 + n2)


def tangent_product_report(
    first: PolyhedralSet, second: PolyhedralSet, p: RVector, q: RVector, shared: Sequence[tuple[int, int]]
) -> CriterionReport:
    """Tangents to the product on the diagonal {w_i = w_j} against the product of tangents there."""
    d = first.dim + second.dim
    diagonal = PolyhedralSet.from_constraints(d, (), [(sub(unit(d, i), unit(d, j)), Fraction(0)) for i, j in shared])
    point = concat(p, q)
    direct = intersect(tangent_set(product_all([first, second]), point), diagonal)
    formula = intersect(product_all([tangent_set(first, tuple(p)), tangent_set(second, tuple(q))]), diagonal)
    relation, witnesses = relate(direct, formula)
    if relation == Relation.EQUAL:
        return CriterionReport(Criterion.TANGENT_PRODUCT, True)
    return CriterionReport(Criterion.TANGENT_PRODUCT, False, tuple(witnesses.values()))


def intermediate_map(first: PolyMap, second: PolyMap) -> PolyMap:
    """(x, z) => {y in first(x) : z in second(y)}."""
    n, m, l = first.m, first.n, second.n
    d = n + l + m
    graph = intersect(
        _embed(first.graph, d, [*range(n), *range(n + l, d)]),
        _embed(second.graph, d, [*range(n + l, d), *range(n, n + l)]),
    )
    return PolyMap(graph, n + l, m)


def perturbation_map(first: PolyMap, second: PolyMap) -> PolyMap:
    """(p, q) => {(x, z, y) : y + p in first(x), z + q in second(y)}."""
    n, m, l = first.m, first.n, second.n
    d = m + l + n + l + m
    x0, z0, y0 = m + l, m + l + n, m + l + n + l
    rows = [unit(d, x0 + i) for i in range(n)]
    rows += [add(unit(d, y0 + j), unit(d, j)) for j in range(m)]
    rows += [unit(d, y0 + j) for j in range(m)]
    rows += [add(unit(d, z0 + k), unit(d, m + k)) for k in range(l)]
    graph = affine_preimage(product_all([first.graph, second.graph]), tuple(rows), zeros(len(rows)))
    return PolyMap(graph, m + l, n + l + m)


def chain_conditions(first: PolyMap, second: PolyMap, x: RVector, y: RVector, z: RVector) -> tuple[CriterionReport, ...]:
    """Dual and primal qualification conditions and the tangent product relation at one intermediate y."""
    m, l = first.n, second.n
    kernel = fix_coordinates(limiting_coderivative(first, x, y).graph, m, zeros(first.m))
    singular = limiting_coderivative(second, y, z).image_at(zeros(l))
    dual = zero_slice_report(Criterion.CHAIN_DUAL_CQ, intersect(kernel, singular), (f"at y = {y}",))
    lifted = graphical_derivative(first, x, y).image_at(zeros(first.m))
    flat = fix_coordinates(graphical_derivative(second, y, z).graph, m, zeros(l))
    primal = zero_slice_report(Criterion.CHAIN_PRIMAL_CQ, intersect(lifted, flat), (f"at y = {y}",))
    shared = [(first.m + j, first.m + m + j) for j in range(m)]
    tangent = tangent_product_report(first.graph, second.graph, concat(x, y), concat(y, z), shared)
    aubin = check_MC(perturbation_map(first, second), zeros(m + l), concat(x, z, y))
    if aubin.verdict != dual.verdict:
        raise ConsistencyError(f"MC of the perturbation map disagrees with the dual condition at y = {y}")
    return dual, primal, tangent


def chain_rule(
    first: PolyMap, second: PolyMap, x: RVector, z: RVector, kind: ConeKind, direction: Optional[RVector] = None
) -> RuleReport:
    """Derivatives of x => second(first(x)) at (x, z) against compositions of factor derivatives."""
    kind = ConeKind(kind)
    if first.n != second.m:
        raise DimensionMismatchError(f"cannot compose a map into R^{first.n} with a map on R^{second.m}")
    x, z = tuple(x), tuple(z)
    composite = compose(first, second)
    require_on_graph(composite, x, z)
    xi = intermediate_map(first, second)
    point = concat(x, z)
    representatives = image_representatives(xi, point)
    logger.info(f"chain rule {kind.value} at ({x}, {z}) over {len(representatives)} intermediate points")
    lhs = derivative_of(composite, x, z, kind, direction).graph
    fuzzy = check_fuzzy_inner_calmness_star(xi, point)
    calm = polyhedral_facts(Criterion.CALM)
    inner = polyhedral_facts(Criterion.INNER_CALM)
    checks = []
    for y in representatives:
        checks.extend(chain_conditions(first, second, x, y, z))
    tangent_holds = all(c.verdict for c in checks if c.criterion == Criterion.TANGENT_PRODUCT)
    dim = lhs.dim

    def composed(y: RVector, which: ConeKind, inner_dir=None, outer_dir=None) -> PolyhedralSet:
        d1 = derivative_of(first, x, y, which, inner_dir)
        d2 = derivative_of(second, y, z, which, outer_dir)
        if which == ConeKind.TANGENT:
            return compose(d1, d2).graph
        return compose(d2, d1).graph

    if kind == ConeKind.TANGENT:
        rhs = union_all(dim, [composed(y, kind) for y in representatives])
        conditional = Relation.EQUAL if tangent_holds else Relation.LHS_SUBSET_RHS
        estimates = [estimate("DS = union of DS2 o DS1", lhs, rhs, conditional=conditional,
                              hypotheses_hold=fuzzy.verdict and calm.verdict)]
    elif kind == ConeKind.REGULAR_NORMAL:
        lower = intersect_all(dim, [composed(y, ConeKind.REGULAR_NORMAL) for y in representatives])
        upper = intersect_all(dim, [composed(y, ConeKind.LIMITING_NORMAL) for y in representatives])
        estimates = [
            estimate("regular coderivative contains the regular compositions", lhs, lower,
                     conditional=Relation.RHS_SUBSET_LHS, hypotheses_hold=fuzzy.verdict),
            estimate("regular coderivative in the limiting compositions", lhs, upper,
                     conditional=Relation.LHS_SUBSET_RHS, hypotheses_hold=calm.verdict),
        ]
    elif kind == ConeKind.LIMITING_NORMAL:
        rhs = union_all(dim, [composed(y, kind) for y in representatives])
        estimates = [estimate("coderivative in the union of compositions", lhs, rhs,
                              conditional=Relation.LHS_SUBSET_RHS, hypotheses_hold=inner.verdict and calm.verdict)]
    else:
        n, l = first.m, second.n
        u, w = tuple(direction[:n]), tuple(direction[n:])
        parts = []
        for y in representatives:
            derivative = graphical_derivative(xi, point, y)
            for v in image_representatives(derivative, concat(u, w)):
                parts.append(composed(y, kind, concat(u, v), concat(v, w)))
        rhs = union_all(dim, parts)
        estimates = [estimate("directional coderivative in the directional compositions", lhs, rhs,
                              conditional=Relation.LHS_SUBSET_RHS, hypotheses_hold=inner.verdict and calm.verdict)]
    return RuleReport(
        "chain", kind.value, (fuzzy, calm, inner), tuple(estimates), tuple(checks),
        values={"intermediate": tuple(representatives)},
    )


@dataclass(frozen=True)
class ProductPattern:
    """A factor of the form x => A x + c + Omega ("affine"), or separated variables ("separated").

    For "separated", x = (x[:split], x[split:]) and the factors are
    inner[0](x1) + B1 x2 + c1 and inner[1](x2) + B2 x1 + c2 with couplings ((B1, c1), (B2, c2)).
    """

    case: str
    factor: int = 2
    matrix: Matrix = ()
    shift: RVector = ()
    omega: Optional[PolyhedralSet] = None
    split: int = 0
    inner: tuple[PolyMap, ...] = ()
    couplings: tuple[tuple[Matrix, RVector], ...] = ()


def detect_affine(mapping: PolyMap) -> Optional[tuple[Matrix, RVector]]:
    """(A, c) when the map is x -> A x + c on the whole space."""
    if len(mapping.graph.pieces) != 1 or mapping.graph.pieces[0].ineqs:
        return None
    if mapping.domain() != PolyhedralSet.whole(mapping.m):
        return None

    def value_at(point: RVector) -> Optional[RVector]:
        image = mapping.image_at(point)
        if len(image.pieces) != 1 or not image.pieces[0].is_singleton():
            return None
        return image.pieces[0].interior_point()

    base = value_at(zeros(mapping.m))
    if base is None:
        return None
    columns = []
    for k in range(mapping.m):
        value = value_at(unit(mapping.m, k))
        if value is None:
            return None
        columns.append(sub(value, base))
    a = tuple(tuple(columns[k][i] for k in range(mapping.m)) for i in range(mapping.n))
    if PolyMap.from_affine(a, base).graph != mapping.graph:
        return None
    return a, base


def _coupled_row(d: int, target: int, coupling: Matrix, row: int, offset: int) -> RVector:
    result = list(unit(d, target))
    for t, value in enumerate(coupling[row]):
        result[offset + t] -= value
    return tuple(result)


def _change_of_coordinates(
    first: PolyMap, second: PolyMap, pattern: ProductPattern
) -> tuple[Matrix, RVector, PolyhedralSet]:
    """(J, s, C) with gph(first x second) = {w : J w + s in C}."""
    n, l1, l2 = first.m, first.n, second.n
    d = n + l1 + l2
    if pattern.case == "affine":
        if pattern.omega is None:
            raise ValueError("affine pattern needs the set Omega")
        keep, moved = (first, second) if pattern.factor == 2 else (second, first)
        start_keep = n if pattern.factor == 2 else n + l1
        start_moved = n + l1 if pattern.factor == 2 else n
        rows = [unit(d, i) for i in range(n)]
        rows += [unit(d, start_keep + j) for j in range(keep.n)]
        rows += [_coupled_row(d, start_moved + k, pattern.matrix, k, 0) for k in range(moved.n)]
        shift = zeros(n + keep.n) + neg(pattern.shift)
        return tuple(rows), shift, product_all([keep.graph, pattern.omega])
    if pattern.case == "separated":
        k = pattern.split
        (b1, c1), (b2, c2) = pattern.couplings
        rows = [unit(d, i) for i in range(k)]
        rows += [_coupled_row(d, n + j, b1, j, k) for j in range(l1)]
        rows += [unit(d, i) for i in range(k, n)]
        rows += [_coupled_row(d, n + l1 + j, b2, j, 0) for j in range(l2)]
        shift = zeros(k) + neg(c1) + zeros(n - k) + neg(c2)
        return tuple(rows), shift, product_all([pattern.inner[0].graph, pattern.inner[1].graph])
    raise ValueError(f"unknown product pattern {pattern.case!r}")


def product_cq(first: PolyMap, second: PolyMap, x: RVector, z1: RVector, z2: RVector) -> CriterionReport:
    """D*G1(0) n (-D*G2(0)) = {0}."""
    one = limiting_coderivative(first, x, z1).image_at(zeros(first.n))
    two = limiting_coderivative(second, x, z2).image_at(zeros(second.n))
    return zero_slice_report(Criterion.PRODUCT_CQ, intersect(one, negate(two)))


def _product_direction(direction: RVector, n: int, l1: int) -> tuple[RVector, RVector]:
    u = tuple(direction[:n])
    return concat(u, direction[n:n + l1]), concat(u, direction[n + l1:])


def product_rule(
    first: PolyMap,
    second: PolyMap,
    x: RVector,
    z1: RVector,
    z2: RVector,
    kind: ConeKind,
    direction: Optional[RVector] = None,
    pattern: Optional[ProductPattern] = None,
) -> RuleReport:
    """Derivatives of x => first(x) x second(x) against sums and products of factor derivatives."""
    kind = ConeKind(kind)
    x, z1, z2 = tuple(x), tuple(z1), tuple(z2)
    product = joint_values(first, second)
    require_on_graph(first, x, z1)
    require_on_graph(second, x, z2)
    z = concat(z1, z2)
    n, l1 = first.m, first.n
    logger.info(f"product rule {kind.value} at ({x}, {z})")
    lhs = derivative_of(product, x, z, kind, direction).graph
    calm = polyhedral_facts(Criterion.CALM)
    shared = [(i, n + l1 + i) for i in range(n)]
    tangent = tangent_product_report(first.graph, second.graph, concat(x, z1), concat(x, z2), shared)
    cq = product_cq(first, second, x, z1, z2)
    inner_dir = outer_dir = None
    if kind == ConeKind.DIRECTIONAL:
        inner_dir, outer_dir = _product_direction(direction, n, l1)
    d1 = derivative_of(first, x, z1, kind, inner_dir)
    d2 = derivative_of(second, x, z2, kind, outer_dir)
    if kind == ConeKind.TANGENT:
        rhs = joint_values(d1, d2).graph
        estimates = [estimate("D product in product of D", lhs, rhs, Relation.LHS_SUBSET_RHS, Relation.EQUAL,
                              calm.verdict and tangent.verdict)]
    elif kind == ConeKind.REGULAR_NORMAL:
        rhs = summed_values(d1, d2).graph
        estimates = [estimate("regular coderivative contains the sum", lhs, rhs, Relation.RHS_SUBSET_LHS)]
    else:
        rhs = summed_values(d1, d2).graph
        estimates = [estimate("coderivative in the sum", lhs, rhs,
                              conditional=Relation.LHS_SUBSET_RHS, hypotheses_hold=calm.verdict)]

    notes = []
    if pattern is None:
        found = detect_affine(second)
        if found is not None:
            pattern = ProductPattern("affine", 2, found[0], found[1], PolyhedralSet.singleton(zeros(second.n)))
            notes.append("second factor is single-valued affine")
    if pattern is not None:
        jacobian, shift, target = _change_of_coordinates(first, second, pattern)
        if not set_equal(affine_preimage(target, jacobian, shift), product.graph):
            raise HypothesisViolatedError("declared product pattern does not match the factors")
        point = concat(x, z)
        cone = preimage_cones(jacobian, shift, target, point, kind, direction).cone
        if kind == ConeKind.TANGENT:
            sharp = cone
        else:
            sharp = coderivative_from_normals(cone, product.m, product.n).graph
        estimates.append(estimate(f"change of coordinates ({pattern.case})", lhs, sharp, Relation.EQUAL))
    return RuleReport("product", kind.value, (calm, tangent), tuple(estimates), (cq,), tuple(notes))


def decoupled_sum(
    first: PolyMap,
    second: PolyMap,
    y1: RVector,
    y2: RVector,
    z: RVector,
    kind: ConeKind,
    direction: Optional[RVector] = None,
) -> RuleReport:
    """Derivatives of (y1, y2) => first(y1) + second(y2) with a single-valued second summand."""
    kind = ConeKind(kind)
    y1, y2, z = tuple(y1), tuple(y2), tuple(z)
    if not second.is_single_valued():
        raise HypothesisViolatedError("second summand must be single-valued")
    image = second.image_at(y2)
    if image.is_empty():
        raise MembershipError(f"{y2} is not in the domain of the second summand")
    z2 = image.pieces[0].interior_point()
    z1 = sub(z, z2)
    require_on_graph(first, y1, z1)
    total = summed_values(first, second)
    y = concat(y1, y2)
    logger.info(f"decoupled sum {kind.value} at ({y}, {z})")
    lhs = derivative_of(total, y, z, kind, direction).graph
    lipschitz = check_MC(second, y2, z2)
    affine = detect_affine(second) is not None
    if kind == ConeKind.TANGENT:
        rhs = summed_values(graphical_derivative(first, y1, z1), graphical_derivative(second, y2, z2)).graph
        required = Relation.LHS_SUBSET_RHS
    elif kind in (ConeKind.REGULAR_NORMAL, ConeKind.LIMITING_NORMAL):
        rhs = joint_values(derivative_of(first, y1, z1, kind), derivative_of(second, y2, z2, kind)).graph
        required = Relation.RHS_SUBSET_LHS if kind == ConeKind.REGULAR_NORMAL else Relation.LHS_SUBSET_RHS
    else:
        m1, m2 = first.m, second.m
        v1, v2, w = tuple(direction[:m1]), tuple(direction[m1:m1 + m2]), tuple(direction[m1 + m2:])
        parts = []
        for w2 in image_representatives(graphical_derivative(second, y2, z2), v2):
            one = directional_limiting_coderivative(first, y1, z1, v1, sub(w, w2))
            two = directional_limiting_coderivative(second, y2, z2, v2, w2)
            parts.append(joint_values(one, two).graph)
        rhs = union_all(lhs.dim, parts)
        required = Relation.LHS_SUBSET_RHS
    conditional = Relation.EQUAL if affine else required
    estimates = [estimate("decoupled sum", lhs, rhs, conditional=conditional, hypotheses_hold=lipschitz.verdict)]
    notes = ("second summand is affine",) if affine else ()
    return RuleReport("decoupled_sum", kind.value, (lipschitz,), tuple(estimates), notes=notes,
                      values={"z1": z1, "z2": z2})


def intersection_form(
    first: PolyMap,
    second: PolyMap,
    z1: RVector,
    z2: RVector,
    x: RVector,
    kind: ConeKind,
    direction: Optional[RVector] = None,
) -> RuleReport:
    """Derivatives of (z1, z2) => first^-1(z1) n second^-1(z2) against the factor inverses."""
    kind = ConeKind(kind)
    z1, z2, x = tuple(z1), tuple(z2), tuple(x)
    one, two = first.inverse(), second.inverse()
    inverse = joint_arguments(one, two)
    z = concat(z1, z2)
    require_on_graph(inverse, z, x)
    logger.info(f"intersection form {kind.value} at ({z}, {x})")
    lhs = derivative_of(inverse, z, x, kind, direction).graph
    calm = polyhedral_facts(Criterion.CALM)
    n, l1 = first.m, first.n
    shared = [(l1 + i, l1 + n + second.n + i) for i in range(n)]
    tangent = tangent_product_report(one.graph, two.graph, concat(z1, x), concat(z2, x), shared)
    inner_dir = outer_dir = None
    if kind == ConeKind.DIRECTIONAL:
        u = tuple(direction[l1 + second.n:])
        inner_dir = concat(direction[:l1], u)
        outer_dir = concat(direction[l1:l1 + second.n], u)
    d1 = derivative_of(one, z1, x, kind, inner_dir)
    d2 = derivative_of(two, z2, x, kind, outer_dir)
    if kind == ConeKind.TANGENT:
        rhs = joint_arguments(d1, d2).graph
        estimates = [estimate("D of the intersection in the intersection of D", lhs, rhs, Relation.LHS_SUBSET_RHS,
                              Relation.EQUAL, calm.verdict and tangent.verdict)]
    elif kind == ConeKind.REGULAR_NORMAL:
        rhs = summed_arguments(d1, d2).graph
        estimates = [estimate("regular coderivative contains the split sum", lhs, rhs, Relation.RHS_SUBSET_LHS)]
    else:
        rhs = summed_arguments(d1, d2).graph
        estimates = [estimate("coderivative in the split sum", lhs, rhs,
                              conditional=Relation.LHS_SUBSET_RHS, hypotheses_hold=calm.verdict)]
    cq = product_cq(first, second, x, z1, z2)
    return RuleReport("intersection_form", kind.value, (calm, tangent), tuple(estimates), (cq,))
