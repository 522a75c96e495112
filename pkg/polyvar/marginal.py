"""
Marginal (optimal value) functions of parametric piecewise-linear programs.

For f on R^n x R^m with coordinates (x, y), the value function is
theta(y) = inf_x f(x, y) and the solution map is S(y) = argmin_x f(x, y).
theta is again piecewise linear: its epigraph is the projection of epi f
along x. The level-set map M(y, alpha) = {x : (x, y, alpha) in epi f} has
epi theta as its domain, which ties the estimates below to the domain rules.
"""

from fractions import Fraction
from typing import Any, Optional, Union

from loguru import logger

from .arrangement import cells_within
from .calculus import Relation, RuleReport, estimate
from .criteria import (
    Criterion,
    CriterionReport,
    check_FOSCclm,
    check_fuzzy_inner_calmness_star,
    check_LRC,
    polyhedral_facts,
)
from .errors import DimensionMismatchError, InfiniteValueError, MembershipError
from .lp import minimize
from .mappings import (
    PLFunction,
    PolyMap,
    directional_subdifferential,
    image_representatives,
    limiting_subdifferential,
    regular_subdifferential,
    singular_subdifferential,
    subderivative,
)
from .polyhedron import (
    PolyhedralSet,
    affine_preimage,
    fix_coordinates,
    intersect_all,
    project,
    slice_constraints,
    union_all,
)
from .rational import INF, RVector, add, concat, is_zero, neg, norm_inf, unit, zeros
from .variational import ConeKind, tangent_directions, tangent_set

Value = Union[Fraction, float]


def value_function(f: PLFunction, inner: int) -> PLFunction:
    """theta(y) = inf over the first ``inner`` coordinates of f."""
    if not 0 < inner < f.n:
        raise DimensionMismatchError(f"{inner} inner variables for a function on R^{f.n}")
    return PLFunction(project(f.epigraph, range(inner, f.n + 1)), f.n - inner)


def level_set_map(f: PLFunction, inner: int) -> PolyMap:
    """(y, alpha) => {x : (x, y, alpha) in epi f}."""
    m = f.n - inner
    dim = f.n + 1
    order = list(range(m + 1, dim)) + list(range(m + 1))
    rows = tuple(unit(dim, j) for j in order)
    return PolyMap(affine_preimage(f.epigraph, rows, zeros(dim)), m + 1, inner)


def solution_set(f: PLFunction, inner: int, y: RVector, theta: Fraction) -> PolyhedralSet:
    return fix_coordinates(f.epigraph, inner, tuple(y) + (theta,))


def _ray(value: Value) -> PolyhedralSet:
    """{mu : mu >= value} on the real line."""
    if value == INF:
        return PolyhedralSet.empty(1)
    if value == -INF:
        return PolyhedralSet.whole(1)
    return PolyhedralSet.from_constraints(1, [((Fraction(-1),), -Fraction(value))])


def _u_box(inner: int, radius: Fraction) -> list[tuple]:
    rows = []
    for i in range(inner):
        rows.append((unit(inner + 1, i), radius))
        rows.append((neg(unit(inner + 1, i)), radius))
    return rows


def bounded_infimum(
    tangent: PolyhedralSet, inner: int, v: RVector, radius: Optional[Fraction]
) -> tuple[Value, Optional[RVector]]:
    """inf mu over (u, v, mu) in ``tangent`` with ||u|| <= radius; the minimizing u is returned with it."""
    slice_ = fix_coordinates(tangent, inner, tuple(v))
    objective = zeros(inner) + (Fraction(1),)
    box = _u_box(inner, radius) if radius is not None else []
    best: Value = INF
    argmin = None
    for piece in slice_.pieces:
        result = minimize(objective, list(piece.ineqs) + box, piece.eqs)
        if result.status == "unbounded":
            return -INF, None
        if result.optimal and result.value < best:
            best, argmin = result.value, result.point[:inner]
    return best, argmin


def min_optimal_norm(tangent: PolyhedralSet, inner: int, v: RVector, level: Fraction) -> Optional[Fraction]:
    """Smallest ||u|| with (u, v, mu) in ``tangent`` and mu <= level."""
    slice_ = fix_coordinates(tangent, inner, tuple(v))
    dim = inner + 2
    objective = zeros(inner + 1) + (Fraction(1),)
    best = None
    for piece in slice_.pieces:
        ineqs = [(tuple(a) + (Fraction(0),), b) for a, b in piece.ineqs]
        eqs = [(tuple(a) + (Fraction(0),), b) for a, b in piece.eqs]
        ineqs.append((unit(dim, inner), level))
        for i in range(inner):
            row = list(unit(dim, i))
            row[-1] = Fraction(-1)
            ineqs.append((tuple(row), Fraction(0)))
            row = list(neg(unit(dim, i)))
            row[-1] = Fraction(-1)
            ineqs.append((tuple(row), Fraction(0)))
        result = minimize(objective, ineqs, eqs)
        if result.optimal and (best is None or result.value < best):
            best = result.value
    return best


def nonzero_element(target: PolyhedralSet) -> Optional[RVector]:
    """A nonzero member of ``target``, or None when target is a subset of {0}."""
    for piece in target.pieces:
        for i in range(target.dim):
            for direction in (unit(target.dim, i), neg(unit(target.dim, i))):
                result = minimize(neg(direction), piece.ineqs, piece.eqs)
                if result.status == "unbounded":
                    farther = add(result.point, result.ray)
                    return farther if not is_zero(farther) else add(farther, result.ray)
                if result.optimal and result.value < 0:
                    return result.point
    return None


def _x_zero_slice(subgradients: PolyhedralSet, inner: int) -> PolyhedralSet:
    """{y* : (0, y*) in subgradients}."""
    return fix_coordinates(subgradients, 0, zeros(inner))


def check_marginal_cq(f: PLFunction, inner: int, point: RVector) -> CriterionReport:
    """(0, y*) in the directional subdifferential along (u, 0, 0) forces y* = 0 whenever df(u, 0) <= 0, u != 0."""
    m = f.n - inner
    tangent = tangent_set(f.epigraph, tuple(point) + (f.finite_value(point),))
    origin = zeros(m + 1)
    descent = fix_coordinates(tangent, inner, origin)
    for cell in cells_within(descent, slice_constraints(tangent, inner, origin)):
        u = cell.witness
        if is_zero(u):
            continue
        subgradients = directional_subdifferential(f, point, concat(u, zeros(m)), Fraction(0))
        witness = nonzero_element(_x_zero_slice(subgradients, inner))
        if witness is not None:
            logger.info(f"MarginalCQ fails along u = {u} with y* = {witness}")
            return CriterionReport(Criterion.MARGINAL_CQ, False, (u, witness))
    return CriterionReport(Criterion.MARGINAL_CQ, True)


def _pointwise_estimates(
    f: PLFunction,
    theta_fn: PLFunction,
    level_map: PolyMap,
    inner: int,
    y: RVector,
    theta: Fraction,
    representatives: list[RVector],
    directions: list[RVector],
) -> tuple[list, list[str], dict[str, Any]]:
    """d theta(y)(v) against the kappa-bounded infimum of df over the solutions, one direction at a time."""
    estimates, notes = [], []
    values: dict[str, Any] = {}
    d_theta = subderivative(theta_fn, y)
    tangents = [tangent_set(f.epigraph, concat(x, y, (theta,))) for x in representatives]
    for v in directions:
        lhs_value = d_theta.value(v)
        if lhs_value in (INF, -INF):
            notes.append(f"d theta(y)({v}) = {lhs_value}; no pointwise estimate")
            continue
        fuzzy = check_fuzzy_inner_calmness_star(level_map, concat(y, (theta,)), concat(v, (lhs_value,)))
        if not fuzzy.verdict or fuzzy.modulus_bound == INF:
            notes.append(f"no finite modulus along {v}")
            continue
        if fuzzy.modulus_bound == 0:
            notes.append(f"zero modulus along {v}")
        kappa = Fraction(fuzzy.modulus_bound) + 1
        radius = kappa * norm_inf(concat(v, (lhs_value,)))
        best: Value = INF
        for tangent in tangents:
            value, _ = bounded_infimum(tangent, inner, v, radius)
            best = min(best, value)
            if value == lhs_value:
                needed = min_optimal_norm(tangent, inner, v, value)
                if needed is not None and needed >= radius:
                    notes.append(f"infimum along {v} attained only on the kappa-sphere")
                    logger.warning(f"infimum along {v} attained only on the kappa-sphere of radius {radius}")
        estimates.append(
            estimate(f"d theta(y)({v}) = kappa-bounded infimum of df", _ray(lhs_value), _ray(best),
                     Relation.RHS_SUBSET_LHS, Relation.EQUAL, fuzzy.verdict)
        )
        values[str(tuple(str(c) for c in v))] = {"subderivative": lhs_value, "infimum": best, "kappa": kappa}
    return estimates, notes, values


def marginal_function(
    f: PLFunction, y: RVector, kind: ConeKind, direction: Optional[RVector] = None
) -> RuleReport:
    """
    Estimates for the subderivative and subdifferentials of the value function at y.

    ``direction`` is v for the subderivative (every tangent direction of dom theta when omitted)
    and (v, mu) for the directional subdifferential.
    """
    kind = ConeKind(kind)
    y = tuple(y)
    m = len(y)
    inner = f.n - m
    theta_fn = value_function(f, inner)
    theta = theta_fn.value(y)
    if theta == -INF:
        raise InfiniteValueError(f"theta({y}) = -inf")
    if theta == INF:
        raise MembershipError(f"{y} is not in the domain of the solution map")
    level_map = level_set_map(f, inner)
    anchor = concat(y, (theta,))
    representatives = image_representatives(level_map, anchor)
    solutions = solution_set(f, inner, y, theta)
    logger.info(f"marginal {kind.value} estimate at {y}: theta = {theta}, {len(representatives)} solution cells")

    fuzzy = check_fuzzy_inner_calmness_star(level_map, anchor)
    inner_calm = polyhedral_facts(Criterion.INNER_CALM)
    hypotheses = (fuzzy, inner_calm)
    checks = [check_marginal_cq(f, inner, concat(x, y)) for x in representatives]
    checks += [check_FOSCclm(level_map, anchor, x) for x in representatives]
    checks += [check_LRC(level_map, anchor, x) for x in representatives]
    points = [concat(x, y) for x in representatives]
    notes: list[str] = []
    values: dict[str, Any] = {
        "value": theta,
        "solutions": solutions,
        "representatives": tuple(representatives),
        "modulus": fuzzy.modulus_bound,
    }

    if kind == ConeKind.TANGENT:
        lhs = subderivative(theta_fn, y).epigraph
        rhs = union_all(
            m + 1, [project(tangent_set(f.epigraph, concat(p, (theta,))), range(inner, f.n + 1)) for p in points]
        )
        estimates = [
            estimate("epi d theta = union of projected epi df", lhs, rhs,
                     Relation.RHS_SUBSET_LHS, Relation.EQUAL, fuzzy.verdict)
        ]
        if direction is not None:
            if len(direction) != m:
                raise DimensionMismatchError(f"direction of length {len(direction)} in dimension {m}")
            directions = [tuple(direction)]
        else:
            directions = tangent_directions(theta_fn.domain(), y)
        pointwise, extra, per_direction = _pointwise_estimates(
            f, theta_fn, level_map, inner, y, theta, representatives, directions
        )
        estimates += pointwise
        notes += extra
        values["directions"] = per_direction
    elif kind == ConeKind.REGULAR_NORMAL:
        lhs = regular_subdifferential(theta_fn, y)
        rhs = intersect_all(m, [_x_zero_slice(regular_subdifferential(f, p), inner) for p in points])
        estimates = [
            estimate("regular subgradients of theta = common (0, y*) regular subgradients of f", lhs, rhs,
                     Relation.LHS_SUBSET_RHS, Relation.EQUAL, fuzzy.verdict)
        ]
    elif kind == ConeKind.LIMITING_NORMAL:
        lhs = limiting_subdifferential(theta_fn, y)
        rhs = union_all(m, [_x_zero_slice(limiting_subdifferential(f, p), inner) for p in points])
        singular = union_all(m, [_x_zero_slice(singular_subdifferential(f, p), inner) for p in points])
        estimates = [
            estimate("limiting subgradients of theta in union of (0, y*) subgradients of f", lhs, rhs,
                     conditional=Relation.LHS_SUBSET_RHS, hypotheses_hold=inner_calm.verdict),
            estimate("singular subgradients of theta in union of singular (0, y*) of f",
                     singular_subdifferential(theta_fn, y), singular,
                     conditional=Relation.LHS_SUBSET_RHS, hypotheses_hold=inner_calm.verdict),
        ]
    else:
        if direction is None or len(direction) != m + 1:
            raise DimensionMismatchError(f"directional subdifferential needs a direction (v, mu) of length {m + 1}")
        v, mu = tuple(direction[:m]), Fraction(direction[m])
        if not subderivative(theta_fn, y).epigraph.contains(tuple(direction)):
            raise MembershipError(f"({v}, {mu}) is not in the epigraph of d theta({y})")
        lhs = directional_subdifferential(theta_fn, y, v, mu)
        parts = []
        for p in points:
            tangent = tangent_set(f.epigraph, concat(p, (theta,)))
            fixed = concat(v, (mu,))
            slice_ = fix_coordinates(tangent, inner, fixed)
            for cell in cells_within(slice_, slice_constraints(tangent, inner, fixed)):
                subgradients = directional_subdifferential(f, p, concat(cell.witness, v), mu)
                parts.append(_x_zero_slice(subgradients, inner))
        rhs = union_all(m, parts)
        estimates = [
            estimate("directional subgradients of theta in union over epi df", lhs, rhs,
                     conditional=Relation.LHS_SUBSET_RHS, hypotheses_hold=inner_calm.verdict)
        ]
    return RuleReport(
        "marginal_function", kind.value, hypotheses, tuple(estimates), tuple(checks), tuple(notes), values
    )
