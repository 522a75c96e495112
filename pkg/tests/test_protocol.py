import json
from fractions import Fraction

import pytest

from conftest import vec
from polyvar.arrangement import set_equal
from polyvar.config import LimitsConfig
from polyvar.errors import InstanceError
from polyvar.mappings import PolyMap
from polyvar.protocol import (
    InstanceFile,
    SetModel,
    dump_map,
    dump_set,
    load_instance,
    parse_vector,
    to_jsonable,
)
from polyvar.rational import INF

BOWTIE = {
    "pieces": [
        {"ineq": [["-1", "1", "0"], ["-1", "-1", "0"]]},
        {"ineq": [[1, 1, 0], [1, -1, 0]]},
    ]
}


def test_set_model_builds_the_bowtie(bowtie):
    assert set_equal(SetModel.model_validate(BOWTIE).build("bowtie"), bowtie)


def test_dimension_is_inferred_or_declared():
    with pytest.raises(InstanceError):
        SetModel.model_validate({"pieces": [{}]}).build()
    whole = SetModel.model_validate({"pieces": [{}], "dim": 3}).build()
    assert whole.dim == 3 and whole.contains(vec(1, 2, 3))


def test_mixed_dimensions_are_rejected():
    model = SetModel.model_validate({"pieces": [{"ineq": [["1", "0"]]}, {"ineq": [["1", "1", "0"]]}]})
    with pytest.raises(InstanceError):
        model.build()


def test_rows_must_be_rational():
    with pytest.raises(ValueError):
        SetModel.model_validate({"pieces": [{"ineq": [["one", "0"]]}]}).build()
    with pytest.raises(ValueError):
        SetModel.model_validate({"pieces": [{"ineq": [["0"]]}]})


def test_dumped_sets_parse_back(bowtie, axes, m1):
    for target in (bowtie, axes):
        assert set_equal(SetModel.model_validate(dump_set(target)).build(), target)
    instance = InstanceFile.model_validate({"objects": {"M": dump_map(m1)}})
    rebuilt = instance.resolve("M")
    assert isinstance(rebuilt, PolyMap)
    assert set_equal(rebuilt.graph, m1.graph)


def test_resolution_errors(bowtie):
    instance = InstanceFile.model_validate({"objects": {"bowtie": dump_set(bowtie)}})
    with pytest.raises(InstanceError):
        instance.resolve("missing")
    with pytest.raises(InstanceError):
        instance.resolve("bowtie", LimitsConfig(max_pieces=1))


def test_query_names_default_to_op_and_index():
    instance = InstanceFile.model_validate({"queries": [{"op": "cone"}, {"op": "check", "name": "mine"}]})
    assert instance.query_names() == ["cone-0", "mine"]


def test_load_instance_errors(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    with pytest.raises(InstanceError):
        load_instance(broken)
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"queries": [{"args": {}}]}))
    with pytest.raises(InstanceError):
        load_instance(wrong)
    with pytest.raises(InstanceError):
        load_instance(tmp_path / "absent.json")


def test_parse_vector():
    assert parse_vector(["1/2", 3, "-2"]) == (Fraction(1, 2), Fraction(3), Fraction(-2))
    with pytest.raises(InstanceError):
        parse_vector("1/2")
    with pytest.raises(InstanceError):
        parse_vector([0.5])


def test_to_jsonable():
    assert to_jsonable({"a": (Fraction(1, 3), INF, -INF, None, True)}) == {"a": ["1/3", "inf", "-inf", None, True]}
    with pytest.raises(TypeError):
        to_jsonable(object())
