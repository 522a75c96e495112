import numpy as np
import pytest

from conftest import vec
from polyvar.config import OracleConfig
from polyvar.mappings import PolyMap
from polyvar.oracle import (
    SampledSet,
    calmness_search,
    cluster_rays,
    compare_with_exact,
    m2_graph,
    reciprocal_graph,
    sample_limiting_normals,
    sqrt_graph,
    tangent_membership,
    verify_cone,
)
from polyvar.variational import ConeKind, cone_of

pytestmark = pytest.mark.slow

DIAGONALS = [np.array(d) / np.sqrt(2.0) for d in ((1, 1), (1, -1), (-1, 1), (-1, -1))]


def test_polyhedral_sampled_set(orthant):
    sampled = SampledSet.polyhedral(orthant, "orthant")
    assert sampled.is_polyhedral
    assert sampled.contains(np.array([1.0, 2.0]))
    assert not sampled.contains(np.array([-1.0, 2.0]))
    assert sampled.distance(np.array([-0.5, -0.25])) == pytest.approx(0.5, abs=1e-7)
    assert sampled.distance(np.array([-3.0, 0.0])) == np.inf


def test_residual_sets():
    parabola = m2_graph()
    assert not parabola.is_polyhedral
    assert parabola.contains(np.array([1.0, 0.5]))
    assert not parabola.contains(np.array([1.0, 2.0]))
    assert reciprocal_graph().contains(np.array([2.0, 0.5]))


def test_tangent_membership_on_orthant(orthant):
    sampled = SampledSet.polyhedral(orthant)
    assert tangent_membership(sampled, [0.0, 0.0], [1.0, 1.0]).decision == "member"
    assert tangent_membership(sampled, [0.0, 0.0], [1.0, 0.0]).decision == "member"
    verdict = tangent_membership(sampled, [0.0, 0.0], [-1.0, 0.0])
    assert verdict.decision == "non_member"
    assert verdict.trace


def test_bowtie_limiting_normals_are_the_diagonals(bowtie):
    rays = sample_limiting_normals(SampledSet.polyhedral(bowtie), [0.0, 0.0])
    assert rays
    for ray in rays:
        assert min(np.linalg.norm(ray - d) for d in DIAGONALS) < 1e-3
    for d in DIAGONALS:
        assert any(np.linalg.norm(ray - d) < 1e-3 for ray in rays)


def test_clustering_merges_close_rays():
    rays = [np.array([1.0, 0.0]), np.array([np.cos(1e-5), np.sin(1e-5)]), np.array([0.0, 1.0])]
    assert len(cluster_rays(rays, 1e-3)) == 2


@pytest.mark.parametrize("kind", [ConeKind.TANGENT, ConeKind.REGULAR_NORMAL, ConeKind.LIMITING_NORMAL])
def test_exact_cones_survive_sampling(orthant, bowtie, axes, kind):
    for target in (orthant, bowtie, axes):
        assert verify_cone(target, vec(0, 0), kind).passed


def test_directional_cone_survives_sampling(bowtie):
    assert verify_cone(bowtie, vec(0, 0), ConeKind.DIRECTIONAL, vec(1, 1)).passed


def test_disagreement_is_reported(orthant):
    exact = cone_of(ConeKind.LIMITING_NORMAL, orthant, vec(0, 0))
    comparison = compare_with_exact(exact, [np.array([1.0, 0.0])])
    assert not comparison.passed
    assert comparison.failures


def test_recall_on_full_dimensional_pieces_is_marked_undecided(orthant, bowtie):
    comparison = verify_cone(orthant, vec(0, 0), ConeKind.REGULAR_NORMAL)
    assert comparison.passed
    assert comparison.undecided == ("recall undecided on a piece of dimension 2",)
    assert verify_cone(bowtie, vec(0, 0), ConeKind.LIMITING_NORMAL).undecided == ()


def test_calmness_of_the_identity():
    identity = SampledSet.polyhedral(PolyMap.identity(1).graph, "identity")
    assert calmness_search(identity, 1, [0.0], [0.0]).decision == "member"


def test_square_root_is_not_calm():
    verdict = calmness_search(sqrt_graph(), 1, [0.0], [0.0], OracleConfig(calm_budget=20))
    assert verdict.decision != "member"
