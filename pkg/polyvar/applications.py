"""
Two applications on top of the calculus: the semismooth* property of polyhedral
sets and maps, and first-order necessary conditions for minimax problems
max_{y in Omega} min_{x in G(y)} phi(x, y) with piecewise-linear phi.
"""

from fractions import Fraction
from typing import Any, Optional, Union

from loguru import logger

from .arrangement import set_equal
from .calculus import Estimate, Relation, RuleReport, estimate
from .cones import cone_generators
from .criteria import Criterion, CriterionReport, check_fuzzy_inner_calmness_star, fosc_directions, polyhedral_facts
from .errors import ConsistencyError, DimensionMismatchError, MembershipError, StratumBoundaryError
from .mappings import (
    PLFunction,
    PolyMap,
    directional_limiting_coderivative,
    image_representatives,
    regular_coderivative,
    regular_subdifferential,
    require_on_graph,
)
from .marginal import level_set_map, nonzero_element, value_function
from .polyhedron import (
    PolyhedralSet,
    affine_preimage,
    cartesian_product,
    intersect,
    intersect_all,
)
from .rational import RVector, concat, dot, identity, neg, zeros
from .variational import directional_normal_set, regular_normal_set, tangent_directions, tangent_set


def _orthogonal(direction: RVector) -> PolyhedralSet:
    return PolyhedralSet.from_constraints(len(direction), (), [(tuple(direction), Fraction(0))])


def _direction_check(target: PolyhedralSet, point: RVector, w: RVector) -> tuple[Estimate, Optional[tuple]]:
    """N(point; w) against the hyperplane orthogonal to w, and the first generator off it."""
    normals = directional_normal_set(target, point, w)
    found = estimate(f"directional normals along {w} orthogonal to {w}", normals, _orthogonal(w),
                     Relation.LHS_SUBSET_RHS)
    for rays, lines in cone_generators(normals):
        for g in list(rays) + list(lines):
            if dot(g, w) != 0:
                return found, (w, g)
    return found, None


def _set_passes(target: PolyhedralSet, point: RVector, directions: list[RVector]) -> tuple[list[Estimate], CriterionReport]:
    estimates = []
    failure = None
    for w in directions:
        found, witness = _direction_check(target, point, w)
        estimates.append(found)
        failure = failure or witness
    if failure is not None:
        logger.info(f"semismooth* fails along {failure[0]} with normal {failure[1]}")
        return estimates, CriterionReport(Criterion.SEMISMOOTH, False, failure)
    return estimates, CriterionReport(Criterion.SEMISMOOTH, True, notes=(f"{len(directions)} directions",))


def _directions(target: PolyhedralSet, point: RVector, direction: Optional[RVector]) -> list[RVector]:
    if direction is None:
        return tangent_directions(target, point)
    if len(direction) != target.dim:
        raise DimensionMismatchError(f"direction of length {len(direction)} in dimension {target.dim}")
    return [tuple(direction)]


def map_passes(mapping: PolyMap, y: RVector, x: RVector) -> bool:
    point = require_on_graph(mapping, y, x)
    return _set_passes(mapping.graph, point, tangent_directions(mapping.graph, point))[1].verdict


def set_passes(target: PolyhedralSet, point: RVector) -> bool:
    return _set_passes(target, point, tangent_directions(target, point))[1].verdict


def transfer_check(mapping: PolyMap, y: RVector, x: RVector) -> CriterionReport:
    """A semismooth* map passes its property on to dom M at y and to M(y) at x."""
    representatives = image_representatives(mapping, y)
    if all(map_passes(mapping, y, r) for r in representatives) and not set_passes(mapping.domain(), y):
        raise ConsistencyError(f"semismooth* map at every point over {y} but dom M is not")
    if map_passes(mapping, y, x) and not set_passes(mapping.image_at(y), x):
        raise ConsistencyError(f"semismooth* map at ({y}, {x}) but M({y}) is not at {x}")
    return CriterionReport(
        Criterion.SEMISMOOTH_TRANSFER, True, notes=("domain and value set inherit the property",)
    )


def semismooth_star_check(
    target: Union[PolyhedralSet, PolyMap], point: RVector, direction: Optional[RVector] = None
) -> RuleReport:
    """
    <z*, w> = 0 on every directional limiting normal along every tangent direction w.

    For a map the point is (y, x) and the test runs on its graph, which is the
    coderivative condition <y*, v> = <x*, u>. The transfer to the domain and the
    value set is checked as well.
    """
    point = tuple(point)
    if isinstance(target, PolyMap):
        y, x = point[: target.m], point[target.m:]
        require_on_graph(target, y, x)
        graph = target.graph
    else:
        if len(point) != target.dim:
            raise DimensionMismatchError(f"point of length {len(point)} in dimension {target.dim}")
        if not target.contains(point):
            raise MembershipError(f"{point} is not in the set")
        graph = target
    directions = _directions(graph, point, direction)
    logger.info(f"semismooth* check at {point} along {len(directions)} directions")
    estimates, report = _set_passes(graph, point, directions)
    checks = [report]
    hypotheses: tuple[CriterionReport, ...] = ()
    if isinstance(target, PolyMap):
        hypotheses = (polyhedral_facts(Criterion.INNER_CALM), polyhedral_facts(Criterion.CALM))
        checks.append(transfer_check(target, y, x))
    if not estimates:
        estimates = [estimate("normals at the point, no tangent direction", regular_normal_set(graph, point),
                              PolyhedralSet.whole(graph.dim), Relation.LHS_SUBSET_RHS)]
    return RuleReport(
        "semismooth_star", "directional", hypotheses, tuple(estimates), tuple(checks),
        values={"directions": tuple(directions)},
    )


def minimax_objective(phi: PLFunction, mapping: PolyMap) -> PLFunction:
    """f(x, y) = phi(x, y) + indicator of gph G^-1."""
    if phi.n != mapping.m + mapping.n:
        raise DimensionMismatchError(f"phi on R^{phi.n} does not match G: R^{mapping.m} => R^{mapping.n}")
    feasible = cartesian_product(mapping.inverse().graph, PolyhedralSet.whole(1))
    return PLFunction(intersect(phi.epigraph, feasible), phi.n)


def gradient_at(phi: PLFunction, point: RVector) -> RVector:
    """Gradient of the affine piece active around ``point``; raises off the smooth strata."""
    tangent = tangent_set(phi.epigraph, tuple(point) + (phi.finite_value(point),))
    for piece in tangent.pieces:
        for a, _ in piece.ineqs:
            if a[-1] >= 0:
                continue
            gradient = tuple(-c / a[-1] for c in a[:-1])
            halfspace = PolyhedralSet.from_constraints(phi.n + 1, [(gradient + (Fraction(-1),), Fraction(0))])
            if set_equal(tangent, halfspace):
                return gradient
    logger.warning(f"phi is not smooth at {point}")
    raise StratumBoundaryError()


def _shifted(target: PolyhedralSet, shift: RVector) -> PolyhedralSet:
    """target + shift."""
    return affine_preimage(target, identity(target.dim), neg(shift))


def _calmness_sufficient(mapping: PolyMap, y: RVector, x: RVector, gx: RVector, gy: RVector) -> CriterionReport:
    """grad_x phi . u <= 0 for nonzero u in DG(y, x)(0) forces grad_y phi + D*G((y, x); (0, u))(grad_x phi) in {0}."""
    for u in fosc_directions(mapping, y, x):
        if dot(gx, u) > 0:
            continue
        values = directional_limiting_coderivative(mapping, y, x, zeros(mapping.m), u).image_at(gx)
        witness = nonzero_element(_shifted(values, gy))
        if witness is not None:
            return CriterionReport(Criterion.FOSCCLM, False, (u, witness), notes=("minimax form",))
    return CriterionReport(Criterion.FOSCCLM, True, notes=("minimax form",))


def minimax_certificate(
    phi: PLFunction, mapping: PolyMap, omega: PolyhedralSet, x: RVector, y: RVector
) -> RuleReport:
    """
    Necessary condition for (x, y) to solve max over Omega of min over G(y) of phi.

    Every y* lying in grad_y phi + regular D*G(y, x)(grad_x phi) for all solutions x
    of the inner problem must be a regular normal of Omega at y.
    """
    x, y = tuple(x), tuple(y)
    n, m = mapping.n, mapping.m
    if len(x) != n or len(y) != m or omega.dim != m:
        raise DimensionMismatchError("point, G and Omega dimensions disagree")
    if not omega.contains(y):
        raise MembershipError(f"{y} is not in Omega")
    f = minimax_objective(phi, mapping)
    theta_fn = value_function(f, n)
    theta = theta_fn.finite_value(y)
    if not mapping.contains(y, x) or phi.value(concat(x, y)) != theta:
        raise MembershipError(f"{x} does not solve the inner problem at {y}")
    level_map = level_set_map(f, n)
    anchor = concat(y, (theta,))
    representatives = image_representatives(level_map, anchor)
    logger.info(f"minimax certificate at y = {y}: {len(representatives)} solution cells")

    parts = []
    checks = []
    gradients: dict[str, Any] = {}
    for solution in representatives:
        gradient = gradient_at(phi, concat(solution, y))
        gx, gy = gradient[:n], gradient[n:]
        gradients[str(tuple(str(c) for c in solution))] = gradient
        values = regular_coderivative(mapping, y, solution).image_at(gx)
        parts.append(_shifted(values, gy))
        checks.append(_calmness_sufficient(mapping, y, solution, gx, gy))
    multipliers = intersect_all(m, parts)
    normals = regular_normal_set(omega, y)
    fuzzy = check_fuzzy_inner_calmness_star(level_map, anchor)
    subgradients = regular_subdifferential(theta_fn, y)
    condition = estimate("common multipliers are regular normals of Omega", multipliers, normals,
                         conditional=Relation.LHS_SUBSET_RHS, hypotheses_hold=False)
    identity_check = estimate("regular subgradients of theta = common multipliers", subgradients, multipliers,
                              Relation.LHS_SUBSET_RHS, Relation.EQUAL, fuzzy.verdict)
    holds = condition.relation.satisfies(Relation.LHS_SUBSET_RHS)
    notes = ["local optimality is assumed, not verified"]
    if not holds:
        witness = condition.witnesses.get("lhs_not_in_rhs")
        notes.append(f"necessary condition violated by y* = {witness}")
        logger.warning(f"minimax necessary condition violated at {y} by y* = {witness}")
    return RuleReport(
        "minimax_certificate", "regular", (fuzzy,), (condition, identity_check), tuple(checks), tuple(notes),
        {"value": theta, "representatives": tuple(representatives), "gradients": gradients,
         "necessary_condition": holds, "subgradients": subgradients},
    )
