from fractions import Fraction

import pytest

from conftest import vec
from polyvar.calculus import Relation, Status
from polyvar.composition import (
    ProductPattern,
    chain_rule,
    decoupled_sum,
    detect_affine,
    intersection_form,
    joint_values,
    product_rule,
)
from polyvar.errors import HypothesisViolatedError
from polyvar.mappings import PolyMap
from polyvar.polyhedron import PolyhedralSet
from polyvar.variational import ConeKind

KINDS = [ConeKind.TANGENT, ConeKind.REGULAR_NORMAL, ConeKind.LIMITING_NORMAL]


def linear(a) -> PolyMap:
    return PolyMap.from_affine(((Fraction(a),),), vec(0))


def test_detect_affine(m1):
    assert detect_affine(linear(2)) == (((Fraction(2),),), vec(0))
    assert detect_affine(m1) is None


def test_joint_values(m1):
    joint = joint_values(m1, linear(2))
    assert joint.contains(vec(1), vec(-1, 2))
    assert not joint.contains(vec(1), vec(-1, 1))


@pytest.mark.parametrize("kind", KINDS)
def test_chain_through_identity(m1, kind):
    report = chain_rule(PolyMap.identity(1), m1, vec(0), vec(0), kind)
    assert report.status != Status.VIOLATED
    assert report.values["intermediate"]


def test_chain_tangent_is_exact_for_linear_maps():
    report = chain_rule(linear(2), linear(3), vec(1), vec(6), ConeKind.TANGENT)
    assert report.relation == Relation.EQUAL


@pytest.mark.parametrize("kind", KINDS)
def test_product_with_affine_second_factor(m1, kind):
    report = product_rule(m1, linear(2), vec(0), vec(0), vec(0), kind)
    assert "second factor is single-valued affine" in report.notes
    assert report.estimates[-1].relation == Relation.EQUAL
    assert report.status != Status.VIOLATED


def test_declared_pattern_must_match(m1):
    wrong = ProductPattern("affine", 2, ((Fraction(3),),), vec(0), PolyhedralSet.singleton(vec(0)))
    with pytest.raises(HypothesisViolatedError):
        product_rule(m1, linear(2), vec(0), vec(0), vec(0), ConeKind.TANGENT, pattern=wrong)


@pytest.mark.parametrize("kind", KINDS)
def test_decoupled_sum_with_linear_summand(m1, kind):
    report = decoupled_sum(m1, linear(1), vec(0), vec(0), vec(0), kind)
    assert report.notes == ("second summand is affine",)
    assert report.hypotheses[0].verdict
    assert report.status != Status.VIOLATED


def test_decoupled_sum_needs_single_valued_summand(m1):
    with pytest.raises(HypothesisViolatedError):
        decoupled_sum(linear(1), m1, vec(0), vec(0), vec(0), ConeKind.TANGENT)


@pytest.mark.parametrize("kind", KINDS)
def test_intersection_form_of_identities(kind):
    identity = PolyMap.identity(1)
    report = intersection_form(identity, identity, vec(0), vec(0), vec(0), kind)
    assert report.status != Status.VIOLATED
