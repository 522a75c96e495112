"""
Derivative-based stability criteria for polyhedral maps: Levy-Rockafellar (isolated
calmness), Mordukhovich (Aubin property), the first-order sufficient condition for
calmness, fuzzy inner calmness* with its modulus, and the implication report that
ties them together.

All moduli are measured in the infinity norm.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Union

from loguru import logger

from .arrangement import cells_within
from .cones import nonzero_point, vertices
from .errors import ConsistencyError, MembershipError
from .mappings import (
    PolyMap,
    directional_limiting_coderivative,
    graphical_derivative,
    image_representatives,
    limiting_coderivative,
    require_on_graph,
)
from .polyhedron import PolyhedralSet, canonicalize, distance_inf, min_norm_on_slice, project, slice_constraints
from .rational import INF, RVector, is_zero, norm_inf, unit, zeros
from .variational import tangent_set

NORM = "inf"


class Criterion(str, Enum):
    LRC = "LRC"
    MC = "MC"
    FOSCCLM = "FOSCclm"
    FUZZY_INNER_CALM = "FuzzyIC*"
    INNER_CALM = "InnerCalm*"
    CALM = "Calm"
    SUM_RULE_IC = "SumRuleIC"
    INTERSECTION_AUBIN = "IntersectionAubin"
    CHAIN_DUAL_CQ = "ChainDualCQ"
    CHAIN_PRIMAL_CQ = "ChainPrimalCQ"
    PRODUCT_CQ = "ProductCQ"
    TANGENT_PRODUCT = "TangentProductRelation"
    MARGINAL_CQ = "MarginalCQ"
    SEMISMOOTH = "SemismoothStar"
    SEMISMOOTH_TRANSFER = "SemismoothTransfer"


@dataclass(frozen=True)
class CriterionReport:
    criterion: Criterion
    verdict: bool
    witness: Optional[tuple[RVector, ...]] = None
    modulus_bound: Optional[Union[Fraction, float]] = None
    norm: str = NORM
    notes: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.verdict and self.witness is None:
            raise ValueError(f"{self.criterion.value}: a false verdict needs a witness")


def zero_slice_report(criterion: Criterion, values: PolyhedralSet, notes=()) -> CriterionReport:
    """Verdict true iff ``values`` is {0}; otherwise a nonzero element is the witness."""
    if values.is_origin():
        return CriterionReport(criterion, True, notes=tuple(notes))
    witness = nonzero_point(values)
    if witness is None:
        # empty slice: the condition holds vacuously
        return CriterionReport(criterion, True, notes=tuple(notes) + ("empty slice",))
    logger.info(f"{criterion.value} fails with witness {witness}")
    return CriterionReport(criterion, False, (witness,), notes=tuple(notes))


def check_LRC(mapping: PolyMap, y: RVector, x: RVector) -> CriterionReport:
    """DM(y, x)(0) = {0}; certifies isolated calmness."""
    derivative = graphical_derivative(mapping, y, x)
    return zero_slice_report(Criterion.LRC, derivative.image_at(zeros(mapping.m)))


def check_MC(mapping: PolyMap, y: RVector, x: RVector) -> CriterionReport:
    """D*M(y, x)(0) = {0}; certifies the Aubin property."""
    coderivative = limiting_coderivative(mapping, y, x)
    return zero_slice_report(Criterion.MC, coderivative.image_at(zeros(mapping.n)))


def fosc_directions(mapping: PolyMap, y: RVector, x: RVector) -> list[RVector]:
    """One nonzero u per cell of DM(y, x)(0)."""
    point = require_on_graph(mapping, y, x)
    tangent = tangent_set(mapping.graph, point)
    kernel = PolyMap(tangent, mapping.m, mapping.n).image_at(zeros(mapping.m))
    cells = cells_within(kernel, slice_constraints(tangent, 0, zeros(mapping.m)))
    return [cell.witness for cell in cells if not is_zero(cell.witness)]


def check_FOSCclm(mapping: PolyMap, y: RVector, x: RVector, u: Optional[RVector] = None) -> CriterionReport:
    """D*M((y, x); (0, u))(0) = {0} for every nonzero u in DM(y, x)(0); sufficient for calmness."""
    require_on_graph(mapping, y, x)
    directions = [tuple(u)] if u is not None else fosc_directions(mapping, y, x)
    for direction in directions:
        coderivative = directional_limiting_coderivative(mapping, y, x, zeros(mapping.m), direction)
        values = coderivative.image_at(zeros(mapping.n))
        if values.is_empty() or values.is_origin():
            continue
        multiplier = nonzero_point(values)
        logger.info(f"FOSCclm fails in direction {direction} with y* = {multiplier}")
        return CriterionReport(Criterion.FOSCCLM, False, (direction, multiplier))
    notes = ("vacuous: DM(y, x)(0) = {0}",) if not directions else ()
    return CriterionReport(Criterion.FOSCCLM, True, notes=notes)


def min_value_norm(mapping: PolyMap, y: RVector, v: RVector) -> Optional[Fraction]:
    """min ||u|| over x in M(y) and u in DM(y, x)(v), or None when no such u exists."""
    best = None
    for x in image_representatives(mapping, y):
        tangent = tangent_set(mapping.graph, tuple(y) + tuple(x))
        for piece in tangent.pieces:
            value = min_norm_on_slice(piece, tuple(v))
            if value is not None and (best is None or value < best):
                best = value
    return best


def _unit_box(dim: int) -> list:
    rows = []
    for i in range(dim):
        rows.append((unit(dim, i), Fraction(1)))
        rows.append((tuple(-x for x in unit(dim, i)), Fraction(1)))
    return rows


def fuzzy_modulus(mapping: PolyMap, y: RVector) -> tuple[Fraction, Optional[RVector]]:
    """
    Upper bound of min ||u|| / ||v|| over u in DM(y, x)(v), x in M(y), v tangent to dom M at y.

    The tangent cone of the domain is split by every hyperplane of the projected tangent
    pieces, so each cell lies in or misses each projection. On a cell the bound of one
    covering piece is convex and positively homogeneous, hence maximal at a vertex of the
    cell cut by the unit box. Returns (bound, None), or (inf, v) when a cell is not covered.
    """
    y = tuple(y)
    m = mapping.m
    options = []
    for x in image_representatives(mapping, y):
        for piece in tangent_set(mapping.graph, y + tuple(x)).pieces:
            options.append((piece, project(PolyhedralSet(piece.dim, (piece,)), range(m))))
    domain_tangent = tangent_set(mapping.domain(), y)
    planes = [plane for _, shadow in options for plane in shadow.hyperplanes()]
    modulus = Fraction(0)
    for cell in cells_within(domain_tangent, planes):
        ineqs, eqs = cell.closure()
        box = canonicalize(m, ineqs + _unit_box(m), eqs)
        corners = [w for w in vertices(box) if not is_zero(w)]
        if not corners:
            continue
        best = None
        for piece, shadow in options:
            if not shadow.contains(cell.witness):
                continue
            values = [min_norm_on_slice(piece, w) for w in corners]
            if any(value is None for value in values):
                continue
            bound = max(values)
            if best is None or bound < best:
                best = bound
        if best is None:
            witness = cell.witness if not is_zero(cell.witness) else corners[0]
            logger.info(f"tangent direction {witness} of dom M has no derivative value")
            return INF, witness
        logger.debug(f"cell {cell.signs}: bound {best} over {len(corners)} corners")
        modulus = max(modulus, best)
    return modulus, None


def check_fuzzy_inner_calmness_star(mapping: PolyMap, y: RVector, v: Optional[RVector] = None) -> CriterionReport:
    """Finite modulus of min ||u|| / ||v|| over the tangent directions of dom M at y."""
    if mapping.image_at(y).is_empty():
        raise MembershipError(f"{y} is not in the domain")
    if v is None:
        modulus, witness = fuzzy_modulus(mapping, y)
        if witness is not None:
            return CriterionReport(Criterion.FUZZY_INNER_CALM, False, (witness,), INF)
        return CriterionReport(Criterion.FUZZY_INNER_CALM, True, modulus_bound=modulus)
    direction = tuple(v)
    if is_zero(direction):
        return CriterionReport(Criterion.FUZZY_INNER_CALM, True, modulus_bound=Fraction(0))
    if not tangent_set(mapping.domain(), tuple(y)).contains(direction):
        note = f"direction {direction} is not tangent to the domain"
        return CriterionReport(Criterion.FUZZY_INNER_CALM, True, modulus_bound=Fraction(0), notes=(note,))
    value = min_value_norm(mapping, y, direction)
    if value is None:
        return CriterionReport(Criterion.FUZZY_INNER_CALM, False, (direction,), INF)
    return CriterionReport(Criterion.FUZZY_INNER_CALM, True, modulus_bound=value / norm_inf(direction))


def coderivative_min_norm(
    mapping: PolyMap,
    y: RVector,
    x: RVector,
    xstar: RVector,
    direction: Optional[tuple[RVector, RVector]] = None,
) -> Union[Fraction, float]:
    """min ||y*|| over D*M(y, x)(x*), or over the directional coderivative; inf when empty."""
    if direction is None:
        coderivative = limiting_coderivative(mapping, y, x)
    else:
        coderivative = directional_limiting_coderivative(mapping, y, x, *direction)
    image = coderivative.image_at(tuple(xstar))
    if image.is_empty():
        return INF
    return distance_inf(zeros(mapping.m), image)


def polyhedral_facts(criterion: Criterion) -> CriterionReport:
    return CriterionReport(criterion, True, notes=("automatic for polyhedral graphs",))


# (premise, conclusion, extra assumption)
IMPLICATIONS = (
    ("Aubin property", "FOSCclm", None),
    ("Aubin property", "inner calmness", None),
    ("isolated calmness", "FOSCclm", None),
    ("isolated calmness", "inner calmness", "inner semicontinuity"),
    ("isolated calmness", "inner calmness*", "inner semicompactness"),
    ("FOSCclm", "calmness", None),
    ("FOSCclm", "inner calmness (fuzzy)", "inner semicontinuity"),
    ("FOSCclm", "inner calmness* (fuzzy)", "inner semicompactness"),
    ("inner calmness", "inner calmness*", None),
    ("inner calmness", "inner calmness (fuzzy)", None),
    ("inner calmness*", "inner calmness* (fuzzy)", None),
    ("inner calmness (fuzzy)", "inner calmness* (fuzzy)", None),
)


@dataclass(frozen=True)
class Implication:
    premise: str
    conclusion: str
    assumption: Optional[str]
    status: str


@dataclass(frozen=True)
class ImplicationReport:
    lrc: CriterionReport
    mc: CriterionReport
    fosc: CriterionReport
    facts: tuple[CriterionReport, ...]
    implications: tuple[Implication, ...]


def implication_report(mapping: PolyMap, y: RVector, x: RVector) -> ImplicationReport:
    """Criterion verdicts placed on the implication graph of calmness-type properties."""
    lrc = check_LRC(mapping, y, x)
    mc = check_MC(mapping, y, x)
    fosc = check_FOSCclm(mapping, y, x)
    if (lrc.verdict or mc.verdict) and not fosc.verdict:
        raise ConsistencyError(f"FOSCclm fails although LRC={lrc.verdict}, MC={mc.verdict}")
    known = {
        "Aubin property": mc.verdict,
        "isolated calmness": lrc.verdict,
        "FOSCclm": fosc.verdict,
        "calmness": True,
        "inner calmness*": True,
        "inner calmness* (fuzzy)": True,
    }
    implications = []
    for premise, conclusion, assumption in IMPLICATIONS:
        holds = known.get(premise)
        status = "undetermined" if holds is None else ("active" if holds else "inactive")
        implications.append(Implication(premise, conclusion, assumption, status))
    facts = (polyhedral_facts(Criterion.CALM), polyhedral_facts(Criterion.INNER_CALM))
    logger.success(f"implication report at ({y}, {x}): LRC={lrc.verdict} MC={mc.verdict} FOSCclm={fosc.verdict}")
    return ImplicationReport(lrc, mc, fosc, facts, tuple(implications))
