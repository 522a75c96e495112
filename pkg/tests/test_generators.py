from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import vec
from polyvar.generators import instance_document, random_map, random_marginal_function, random_set
from polyvar.marginal import value_function
from polyvar.protocol import InstanceFile


@settings(deadline=None, max_examples=30)
@given(st.integers(min_value=0, max_value=1_000_000), st.integers(min_value=1, max_value=3))
def test_random_sets_contain_the_origin(seed, dim):
    target = random_set(seed, dim, 3)
    assert target.contains(vec(*([0] * dim)))
    assert random_set(seed, dim, 3) == target


@settings(deadline=None, max_examples=15)
@given(st.integers(min_value=0, max_value=1_000_000))
def test_random_maps_pass_through_the_origin(seed):
    assert random_map(seed).contains(vec(0), vec(0))


@settings(deadline=None, max_examples=10)
@given(st.integers(min_value=0, max_value=1_000_000))
def test_random_marginal_functions_have_finite_values(seed):
    theta = value_function(random_marginal_function(seed), 1)
    value = theta.value(vec(0))
    assert value not in (float("inf"), float("-inf"))


def test_instance_documents_are_reproducible():
    first = instance_document(3, count=2)
    assert first == instance_document(3, count=2)
    instance = InstanceFile.model_validate(first)
    assert len(instance.objects) == 6
    assert {q.op for q in instance.queries} == {"cone", "verify", "semismooth", "check", "rule"}
