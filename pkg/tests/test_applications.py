from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import piece, union, vec
from polyvar.applications import (
    gradient_at,
    map_passes,
    minimax_certificate,
    minimax_objective,
    semismooth_star_check,
    set_passes,
    transfer_check,
)
from polyvar.calculus import Status
from polyvar.errors import MembershipError, StratumBoundaryError
from polyvar.generators import random_set
from polyvar.mappings import PLFunction, PolyMap


@pytest.fixture
def phi() -> PLFunction:
    return PLFunction.max_affine([(vec(1, 1), Fraction(0))])


@pytest.fixture
def upper_ray() -> PolyMap:
    """y => [y, inf)."""
    return PolyMap(union(2, piece(2, [(1, -1, 0)])), 1, 1)


def test_polyhedral_sets_are_semismooth_star(nonnegative, axes, bowtie):
    for target, point in ((nonnegative, vec(0)), (axes, vec(0, 0)), (bowtie, vec(0, 0))):
        report = semismooth_star_check(target, point)
        assert report.status == Status.CERTIFIED
        assert all(check.verdict for check in report.checks)
        assert set_passes(target, point)


def test_semismooth_star_map(m1):
    report = semismooth_star_check(m1, vec(0, 0))
    assert {check.criterion.value for check in report.checks} == {"SemismoothStar", "SemismoothTransfer"}
    assert map_passes(m1, vec(0), vec(0))
    assert transfer_check(m1, vec(0), vec(0)).verdict


def test_semismooth_star_needs_membership(orthant):
    with pytest.raises(MembershipError):
        semismooth_star_check(orthant, vec(-1, 0))


@settings(deadline=None, max_examples=15)
@given(st.integers(min_value=0, max_value=10_000))
def test_random_sets_are_semismooth_star(seed):
    target = random_set(seed, 2, 2)
    assert semismooth_star_check(target, vec(0, 0)).status == Status.CERTIFIED


def test_minimax_objective(phi, upper_ray):
    f = minimax_objective(phi, upper_ray)
    assert f.value(vec(2, 1)) == 3
    assert f.value(vec(0, 1)) == float("inf")


def test_gradient_on_a_smooth_stratum(phi):
    assert gradient_at(phi, vec(0, 0)) == vec(1, 1)
    kink = PLFunction.max_affine([(vec(1, 0), Fraction(0)), (vec(-1, 0), Fraction(0))])
    with pytest.raises(StratumBoundaryError):
        gradient_at(kink, vec(0, 0))


def test_minimax_condition_holds(phi, upper_ray):
    omega = union(1, piece(1, [(1, 0)]))
    report = minimax_certificate(phi, upper_ray, omega, vec(0), vec(0))
    assert report.values["necessary_condition"]
    assert report.values["subgradients"].contains(vec(2))
    assert report.status == Status.CERTIFIED


def test_minimax_condition_violated(phi, upper_ray):
    omega = union(1, piece(1, [(-1, 0)]))
    report = minimax_certificate(phi, upper_ray, omega, vec(0), vec(0))
    assert not report.values["necessary_condition"]
    assert report.status == Status.OBSERVED
    assert any("violated" in note for note in report.notes)


def test_minimax_needs_an_inner_solution(phi, upper_ray):
    omega = union(1, piece(1, [(1, 0)]))
    with pytest.raises(MembershipError):
        minimax_certificate(phi, upper_ray, omega, vec(1), vec(0))
