from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import piece, union, vec
from polyvar.criteria import (
    Criterion,
    CriterionReport,
    check_FOSCclm,
    check_fuzzy_inner_calmness_star,
    check_LRC,
    check_MC,
    coderivative_min_norm,
    implication_report,
)
from polyvar.errors import MembershipError
from polyvar.generators import random_map
from polyvar.mappings import PolyMap
from polyvar.polyhedron import PolyhedralSet


@pytest.fixture
def everywhere() -> PolyMap:
    """y => R: Aubin but not isolatedly calm."""
    return PolyMap(PolyhedralSet.whole(2), 1, 1)


@pytest.fixture
def only_at_zero() -> PolyMap:
    """0 => {0}: isolatedly calm but not Aubin."""
    return PolyMap(union(2, piece(2, eqs=[(1, 0, 0), (0, 1, 0)])), 1, 1)


def test_bowtie_satisfies_every_criterion(m1):
    assert check_LRC(m1, vec(0), vec(0)).verdict
    assert check_MC(m1, vec(0), vec(0)).verdict
    assert check_FOSCclm(m1, vec(0), vec(0)).verdict


def test_lrc_fails_with_witness(everywhere):
    report = check_LRC(everywhere, vec(0), vec(0))
    assert not report.verdict
    assert report.witness[0] != vec(0)
    assert check_MC(everywhere, vec(0), vec(0)).verdict


def test_mc_fails_with_witness(only_at_zero):
    report = check_MC(only_at_zero, vec(0), vec(0))
    assert not report.verdict
    assert check_LRC(only_at_zero, vec(0), vec(0)).verdict
    assert check_FOSCclm(only_at_zero, vec(0), vec(0)).verdict


def test_false_verdict_needs_witness():
    with pytest.raises(ValueError):
        CriterionReport(Criterion.LRC, False)


def test_fuzzy_modulus_of_bowtie(m1):
    report = check_fuzzy_inner_calmness_star(m1, vec(0))
    assert report.verdict
    assert report.modulus_bound == 0


def test_fuzzy_modulus_of_a_slope():
    slope = PolyMap.from_affine(((Fraction(3),),), vec(0))
    report = check_fuzzy_inner_calmness_star(slope, vec(0))
    assert report.verdict
    assert report.modulus_bound == 3


def test_fuzzy_modulus_of_a_plane_functional():
    functional = PolyMap.from_affine(((Fraction(3), Fraction(-3)),), vec(0))
    report = check_fuzzy_inner_calmness_star(functional, vec(0, 0))
    assert report.verdict
    assert report.modulus_bound == 6
    along = check_fuzzy_inner_calmness_star(functional, vec(0, 0), vec(1, 1))
    assert along.modulus_bound == 0
    assert check_fuzzy_inner_calmness_star(functional, vec(0, 0), vec(1, -1)).modulus_bound == 6


def test_fuzzy_modulus_bounds_every_direction_of_a_kink():
    kink = PolyMap(union(2, piece(2, [(-1, 0, 0)], [(-1, 1, 0)]), piece(2, [(1, 0, 0)], [(2, 1, 0)])), 1, 1)
    report = check_fuzzy_inner_calmness_star(kink, vec(0))
    assert report.modulus_bound == 2
    for v in (vec(1), vec(-1)):
        assert check_fuzzy_inner_calmness_star(kink, vec(0), v).modulus_bound <= report.modulus_bound


def test_fuzzy_check_outside_the_domain(only_at_zero):
    with pytest.raises(MembershipError):
        check_fuzzy_inner_calmness_star(only_at_zero, vec(1))


def test_coderivative_norms(m1):
    assert coderivative_min_norm(m1, vec(0), vec(0), vec(1)) == 1
    assert coderivative_min_norm(m1, vec(0), vec(0), vec(0)) == 0


def test_implication_report(m1):
    report = implication_report(m1, vec(0), vec(0))
    assert report.lrc.verdict and report.mc.verdict and report.fosc.verdict
    statuses = {(i.premise, i.conclusion): i.status for i in report.implications}
    assert statuses[("Aubin property", "FOSCclm")] == "active"
    assert all(fact.verdict for fact in report.facts)


@settings(deadline=None, max_examples=25)
@given(st.integers(min_value=0, max_value=100_000))
def test_criterion_implications_on_random_maps(seed):
    mapping = random_map(seed, 1, 1, 2)
    origin = vec(0)
    fosc = check_FOSCclm(mapping, origin, origin).verdict
    if check_MC(mapping, origin, origin).verdict:
        assert fosc
    if check_LRC(mapping, origin, origin).verdict:
        assert fosc
