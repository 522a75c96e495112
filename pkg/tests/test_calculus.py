from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import piece, union, vec
from polyvar.calculus import (
    Relation,
    Status,
    domain_cones,
    estimate,
    image_cones,
    image_rule,
    intersection_rule,
    preimage_rule,
    relate,
    sum_rule,
)
from polyvar.config import LimitsConfig
from polyvar.criteria import Criterion
from polyvar.errors import LimitExceededError
from polyvar.generators import random_map
from polyvar.mappings import PolyMap
from polyvar.polyhedron import PolyhedralSet
from polyvar.variational import ConeKind

KINDS = [ConeKind.TANGENT, ConeKind.REGULAR_NORMAL, ConeKind.LIMITING_NORMAL]


def test_relation_and_witnesses(orthant):
    relation, witnesses = relate(orthant, PolyhedralSet.whole(2))
    assert relation == Relation.LHS_SUBSET_RHS
    assert not orthant.contains(witnesses["rhs_not_in_lhs"])
    assert relate(orthant, orthant)[0] == Relation.EQUAL


def test_estimate_statuses(orthant):
    whole = PolyhedralSet.whole(2)
    assert estimate("ok", orthant, whole, Relation.LHS_SUBSET_RHS).status == Status.CERTIFIED
    assert estimate("bad", whole, orthant, Relation.LHS_SUBSET_RHS).status == Status.VIOLATED
    observed = estimate("weak", orthant, whole, Relation.LHS_SUBSET_RHS, Relation.EQUAL, hypotheses_hold=False)
    assert observed.status == Status.OBSERVED
    assert estimate("strict", orthant, whole, None, Relation.EQUAL).status == Status.VIOLATED


@pytest.mark.parametrize("kind", KINDS)
def test_domain_rule_on_bowtie(m1, kind):
    report = domain_cones(m1, vec(0), kind)
    assert report.status != Status.VIOLATED
    assert report.estimates


@pytest.mark.parametrize("kind", KINDS)
def test_image_rule_on_bowtie(m1, kind):
    report = image_cones(m1, vec(0), vec(0), kind)
    assert report.status != Status.VIOLATED


def test_sum_rule_of_orthants(orthant):
    report = sum_rule([orthant, orthant], vec(0, 0), [vec(0, 0), vec(0, 0)], ConeKind.TANGENT)
    assert report.status != Status.VIOLATED
    assert report.lhs.contains(vec(1, 2))


def test_sum_rule_term_limit(orthant):
    with pytest.raises(LimitExceededError):
        sum_rule([orthant] * 3, vec(0, 0), [vec(0, 0)] * 3, ConeKind.TANGENT, limits=LimitsConfig(max_terms=2))


@pytest.mark.parametrize("kind", KINDS)
def test_intersection_of_orthant_and_halfplane(orthant, kind):
    upper = union(2, piece(2, [(0, -1, 0)]))
    report = intersection_rule([orthant, upper], vec(0, 0), kind)
    assert report.status != Status.VIOLATED
    assert all(check.verdict for check in report.checks)


def test_intersection_of_axes_and_bowtie(axes, bowtie):
    report = intersection_rule([bowtie, axes], vec(0, 0), ConeKind.REGULAR_NORMAL)
    assert report.status != Status.VIOLATED


def test_limiting_intersection_estimate_depends_on_the_normal_condition(orthant):
    lower = union(2, piece(2, [(0, 1, 0)]))
    upper = union(2, piece(2, [(0, -1, 0)]))
    report = intersection_rule([lower, upper], vec(0, 0), ConeKind.LIMITING_NORMAL)
    aubin = next(check for check in report.checks if check.criterion == Criterion.INTERSECTION_AUBIN)
    assert not aubin.verdict
    assert not report.estimates[-1].hypotheses_hold
    assert report.status != Status.VIOLATED

    report = intersection_rule([orthant, orthant], vec(0, 0), ConeKind.LIMITING_NORMAL)
    assert report.estimates[-1].hypotheses_hold
    assert report.status != Status.VIOLATED


@pytest.mark.parametrize("kind", KINDS)
def test_preimage_rule_full_rank(nonnegative, kind):
    a = ((Fraction(1), Fraction(-1)),)
    report = preimage_rule(a, vec(0), nonnegative, vec(0, 0), kind)
    assert report.status != Status.VIOLATED
    assert report.estimates[-1].relation == Relation.EQUAL


@pytest.mark.parametrize("kind", KINDS)
def test_image_rule_projection(orthant, kind):
    a = ((Fraction(1), Fraction(1)),)
    report = image_rule(a, vec(0), orthant, vec(0), kind)
    assert report.status != Status.VIOLATED


def test_domain_of_constant_map():
    mapping = PolyMap.constant(PolyhedralSet.whole(1), 1)
    report = domain_cones(mapping, vec(3), ConeKind.TANGENT)
    assert report.status != Status.VIOLATED
    assert report.lhs.contains(vec(-1)) and report.lhs.contains(vec(1))


def _kappa_bounded(report):
    return next(e for e in report.estimates if e.label == "T dom M = kappa-bounded union")


def test_kappa_bounded_domain_of_a_slope():
    slope = PolyMap.from_affine(((Fraction(2),),), vec(0))
    report = domain_cones(slope, vec(0), ConeKind.TANGENT)
    assert report.values["kappa"] == 3
    bounded = _kappa_bounded(report)
    assert bounded.relation == Relation.EQUAL
    assert bounded.status == Status.CERTIFIED


def test_kappa_bounded_domain_of_a_plane_functional():
    functional = PolyMap.from_affine(((Fraction(3), Fraction(-3)),), vec(0))
    report = domain_cones(functional, vec(0, 0), ConeKind.TANGENT)
    assert report.values["modulus"] == 6
    assert _kappa_bounded(report).relation == Relation.EQUAL


@settings(deadline=None, max_examples=20)
@given(st.integers(min_value=0, max_value=100_000))
def test_kappa_bounded_domain_is_never_violated(seed):
    mapping = random_map(seed, 1, 1, 2)
    report = domain_cones(mapping, vec(0), ConeKind.TANGENT)
    if report.values.get("kappa") is not None:
        assert _kappa_bounded(report).status != Status.VIOLATED
    assert report.status != Status.VIOLATED
