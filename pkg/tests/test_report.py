import json

from conftest import vec
from polyvar.calculus import domain_cones
from polyvar.criteria import check_LRC
from polyvar.report import criterion_summary, render_json, render_text, rule_summary
from polyvar.variational import ConeKind


def test_rule_summary_fields(m1):
    summary = rule_summary(domain_cones(m1, vec(0), ConeKind.TANGENT))
    assert list(summary) == [
        "rule", "kind", "relation", "status", "hypotheses", "estimates", "checks", "notes", "values",
    ]
    assert summary["estimates"][0]["lhs"]["dim"] == 1
    json.dumps(summary)


def test_rendering(m1):
    entry = {"query": "lrc[bold]", "op": "check", "exit_code": 0, "result": criterion_summary(check_LRC(m1, vec(0), vec(0)))}
    document = [entry, {"query": "broken", "op": "cone", "exit_code": 3, "error": "InstanceError: unknown object"}]
    assert json.loads(render_json(document))["queries"][1]["exit_code"] == 3
    text = render_text(document, width=80)
    assert "lrc[bold]" in text
    assert "verdict: True" in text
    assert "unknown object" in text
