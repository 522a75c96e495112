"""
Report documents: one entry per query in file order, rendered as JSON or as rich panels.
"""

import io
import json
from typing import Any, Optional

from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from .calculus import RuleReport
from .config import CONFIG
from .criteria import CriterionReport
from .protocol import to_jsonable


def rule_summary(report: RuleReport) -> dict[str, Any]:
    return {
        "rule": report.rule,
        "kind": report.kind,
        "relation": report.relation.value,
        "status": report.status.value,
        "hypotheses": to_jsonable(report.hypotheses),
        "estimates": [
            {
                "label": e.label,
                "relation": e.relation.value,
                "status": e.status.value,
                "guaranteed": e.guaranteed.value if e.guaranteed else None,
                "conditional": e.conditional.value if e.conditional else None,
                "hypotheses_hold": e.hypotheses_hold,
                "lhs": to_jsonable(e.lhs),
                "rhs": to_jsonable(e.rhs),
                "witnesses": to_jsonable(e.witnesses),
            }
            for e in report.estimates
        ],
        "checks": to_jsonable(report.checks),
        "notes": list(report.notes),
        "values": to_jsonable(report.values),
    }


def criterion_summary(report: CriterionReport) -> dict[str, Any]:
    return to_jsonable(report)


def render_json(document: list[dict[str, Any]]) -> str:
    return json.dumps({"queries": document}, indent=2, ensure_ascii=False) + "\n"


def _lines(result: Any) -> list[str]:
    if not isinstance(result, dict):
        return [str(result)]
    lines = []
    for key in ("rule", "kind", "criterion", "verdict", "relation", "status", "passed", "modulus_bound"):
        if key in result:
            lines.append(f"{key}: {result[key]}")
    for estimate in result.get("estimates", []):
        lines.append(f"- {estimate['label']}: {estimate['relation']} [{estimate['status']}]")
    for check in result.get("checks", []):
        lines.append(f"- check {check['criterion']}: {check['verdict']}")
    for note in result.get("notes", []):
        lines.append(f"  note: {note}")
    if "cone" in result:
        lines.append(f"cone: {len(result['cone']['pieces'])} piece(s) in dimension {result['cone']['dim']}")
    return lines


def render_text(document: list[dict[str, Any]], width: Optional[int] = None) -> str:
    """Fixed-width panels without colour or terminal detection."""
    console = Console(
        record=True, width=width or CONFIG.report.width, color_system=None, force_terminal=False, file=io.StringIO()
    )
    table = Table(title="queries", show_lines=False)
    table.add_column("query")
    table.add_column("op")
    table.add_column("exit")
    for entry in document:
        table.add_row(Text(entry["query"]), Text(entry["op"]), str(entry["exit_code"]))
    console.print(table)
    for entry in document:
        body = entry.get("error") or "\n".join(_lines(entry.get("result")))
        title = Text(f"{entry['query']} ({entry['op']})")
        console.print(Panel(Text(body), title=title, width=width or CONFIG.report.width))
    return console.export_text()

