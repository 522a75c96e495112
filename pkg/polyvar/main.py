import argparse
import asyncio
import json
import sys
from pathlib import Path
from typing import Any, Callable, Optional

from loguru import logger

from .applications import minimax_certificate, semismooth_star_check
from .arrangement import set_equal
from .calculus import (
    Relation,
    RuleReport,
    Status,
    domain_cones,
    image_cones,
    image_rule,
    intersection_rule,
    preimage_rule,
    sum_rule,
)
from .composition import ProductPattern, chain_rule, decoupled_sum, intersection_form, product_rule
from .config import CONFIG, LimitsConfig, show_config
from .criteria import (
    CriterionReport,
    check_FOSCclm,
    check_fuzzy_inner_calmness_star,
    check_LRC,
    check_MC,
    implication_report,
)
from .errors import ConsistencyError, InstanceError, PolyvarError
from .generators import instance_document
from .mappings import PLFunction, PolyMap, derivative_of
from .marginal import marginal_function
from .oracle import verify_cone
from .polyhedron import PolyhedralSet
from .protocol import InstanceFile, Query, dump_map, dump_set, load_instance, parse_vector, to_jsonable
from .report import render_json, render_text, rule_summary
from .variational import ConeKind, cone_of

EXIT_OK = 0
EXIT_WEAKER = 2
EXIT_INPUT = 3
EXIT_CONSISTENCY = 4

DATA_DIR = Path(__file__).parent / "data"
OPS = ("cone", "derivative", "check", "rule", "semismooth", "minimax", "verify", "implications")
# op names accepted from instance files and the command line
OP_ALIASES = {"figure1": "implications"}
CRITERIA = {
    "LRC": lambda m, y, x, v: check_LRC(m, y, x),
    "MC": lambda m, y, x, v: check_MC(m, y, x),
    "FOSCclm": lambda m, y, x, v: check_FOSCclm(m, y, x),
    "FuzzyIC*": lambda m, y, x, v: check_fuzzy_inner_calmness_star(m, y, v),
}


def canonical_op(op: str) -> str:
    return OP_ALIASES.get(op, op)


def resolve_path(value: str) -> Path:
    path = Path(value)
    if not path.exists() and (DATA_DIR / f"{value}.json").exists():
        return DATA_DIR / f"{value}.json"
    return path


class QueryRunner:
    """Evaluates the queries of one instance file."""

    def __init__(
        self,
        instance: InstanceFile,
        overrides: Optional[dict[str, Any]] = None,
        limits: Optional[LimitsConfig] = None,
    ):
        self.instance = instance
        self.overrides = overrides or {}
        self.limits = limits or CONFIG.limits

    def _resolve(self, name: str):
        return self.instance.resolve(name, self.limits)

    def _object(self, args: dict, key: str, expected: type):
        if key not in args:
            raise InstanceError(f"missing argument {key!r}")
        value = self._resolve(args[key])
        if not isinstance(value, expected):
            raise InstanceError(f"expected a {expected.__name__}", args[key])
        return value

    def _set(self, args: dict, key: str = "set") -> PolyhedralSet:
        return self._object(args, key, PolyhedralSet)

    def _map(self, args: dict, key: str = "map") -> PolyMap:
        return self._object(args, key, PolyMap)

    def _function(self, args: dict, key: str = "function") -> PLFunction:
        return self._object(args, key, PLFunction)

    def _matrix(self, args: dict, key: str = "matrix"):
        return self._object(args, key, tuple)

    @staticmethod
    def _vector(args: dict, key: str):
        if key not in args:
            raise InstanceError(f"missing argument {key!r}")
        return parse_vector(args[key], key)

    @staticmethod
    def _direction(args: dict):
        return parse_vector(args["direction"], "direction") if args.get("direction") is not None else None

    def _kind(self, args: dict) -> ConeKind:
        return ConeKind(self.overrides.get("kind") or args.get("kind", ConeKind.TANGENT.value))

    def run(self, query: Query, name: str) -> dict[str, Any]:
        op = canonical_op(query.op)
        entry: dict[str, Any] = {"query": name, "op": op}
        try:
            handler: Callable = getattr(self, f"op_{op}", None)
            if op not in OPS or handler is None:
                raise InstanceError(f"unknown op {query.op!r}", name)
            result, code = handler(query.args, query)
            entry["result"] = result
            entry["exit_code"] = code
        except ConsistencyError as e:
            logger.error(f"{name}: {e}")
            entry.update(exit_code=EXIT_CONSISTENCY, error=f"consistency failure: {e}")
        except (PolyvarError, ValueError, TypeError, KeyError) as e:
            logger.error(f"{name}: {e}")
            entry.update(exit_code=EXIT_INPUT, error=f"{type(e).__name__}: {e}")
        if entry["exit_code"] == EXIT_OK:
            logger.success(f"{name}: ok")
        return entry

    def op_cone(self, args: dict, query: Query):
        target = self._set(args)
        result = cone_of(self._kind(args), target, self._vector(args, "point"), self._direction(args))
        code = EXIT_OK
        if query.expected and query.expected.cone is not None:
            if not set_equal(result.cone, query.expected.cone.build("expected")):
                logger.error("cone differs from the expected one")
                code = EXIT_CONSISTENCY
        return to_jsonable({"kind": result.kind, "base_point": result.base_point,
                            "direction": result.direction, "cone": dump_set(result.cone)}), code

    def op_derivative(self, args: dict, query: Query):
        mapping = self._map(args)
        y, x = self._vector(args, "y"), self._vector(args, "x")
        derivative = derivative_of(mapping, y, x, self._kind(args), self._direction(args))
        code = EXIT_OK
        if query.expected and query.expected.cone is not None:
            if not set_equal(derivative.graph, query.expected.cone.build("expected")):
                code = EXIT_CONSISTENCY
        return {"kind": self._kind(args).value, "derivative": dump_map(derivative)}, code

    def op_check(self, args: dict, query: Query):
        mapping = self._map(args)
        y, x = self._vector(args, "y"), self._vector(args, "x")
        v = parse_vector(args["v"], "v") if args.get("v") is not None else None
        criterion = self.overrides.get("criterion") or args.get("criterion", "LRC")
        if criterion not in CRITERIA:
            raise InstanceError(f"unknown criterion {criterion!r}")
        report: CriterionReport = CRITERIA[criterion](mapping, y, x, v)
        code = EXIT_OK
        if query.expected and query.expected.verdict is not None and query.expected.verdict != report.verdict:
            code = EXIT_WEAKER
        return to_jsonable(report), code

    def _rule(self, args: dict) -> RuleReport:
        rule = args.get("rule")
        kind, direction = self._kind(args), self._direction(args)
        v = self._vector
        if rule == "domain":
            return domain_cones(self._map(args), v(args, "y"), kind, direction)
        if rule == "image_cones":
            return image_cones(self._map(args), v(args, "y"), v(args, "x"), kind, direction)
        if rule == "sum":
            sets = [self._resolve(s) for s in args["sets"]]
            parts = [parse_vector(p, "parts") for p in args["parts"]]
            return sum_rule(sets, v(args, "y"), parts, kind, direction, self.limits)
        if rule == "intersection":
            sets = [self._resolve(s) for s in args["sets"]]
            return intersection_rule(sets, v(args, "x"), kind, direction, self.limits)
        if rule == "image":
            return image_rule(self._matrix(args), v(args, "shift"), self._set(args), v(args, "y"), kind, direction)
        if rule == "preimage":
            return preimage_rule(self._matrix(args), v(args, "shift"), self._set(args), v(args, "x"), kind, direction)
        if rule == "chain":
            return chain_rule(self._map(args, "first"), self._map(args, "second"), v(args, "x"), v(args, "z"),
                              kind, direction)
        if rule == "product":
            return product_rule(self._map(args, "first"), self._map(args, "second"), v(args, "x"), v(args, "z1"),
                                v(args, "z2"), kind, direction, self._pattern(args.get("pattern")))
        if rule == "decoupled_sum":
            return decoupled_sum(self._map(args, "first"), self._map(args, "second"), v(args, "y1"), v(args, "y2"),
                                 v(args, "z"), kind, direction)
        if rule == "intersection_form":
            return intersection_form(self._map(args, "first"), self._map(args, "second"), v(args, "z1"),
                                     v(args, "z2"), v(args, "x"), kind, direction)
        if rule == "marginal":
            return marginal_function(self._function(args), v(args, "y"), kind, direction)
        raise InstanceError(f"unknown rule {rule!r}")

    def _pattern(self, raw: Optional[dict]) -> Optional[ProductPattern]:
        if raw is None:
            return None
        if raw.get("case") != "affine":
            raise InstanceError("only the affine product pattern can be declared in an instance file")
        omega = self._resolve(raw["omega"]) if raw.get("omega") else None
        return ProductPattern(
            "affine",
            factor=int(raw.get("factor", 2)),
            matrix=self._resolve(raw["matrix"]),
            shift=parse_vector(raw["shift"], "shift"),
            omega=omega,
        )

    def _grade(self, report: RuleReport, query: Query) -> int:
        if report.status == Status.VIOLATED:
            return EXIT_CONSISTENCY
        expected = query.expected
        if expected is not None:
            if expected.relation is not None and not report.relation.satisfies(Relation(expected.relation)):
                return EXIT_WEAKER
            if expected.status is not None:
                return EXIT_OK if report.status == Status(expected.status) else EXIT_WEAKER
            return EXIT_OK
        return EXIT_WEAKER if report.status == Status.OBSERVED else EXIT_OK

    def op_rule(self, args: dict, query: Query):
        report = self._rule(args)
        return rule_summary(report), self._grade(report, query)

    def op_semismooth(self, args: dict, query: Query):
        target = self._resolve(args["target"])
        if not isinstance(target, (PolyhedralSet, PolyMap)):
            raise InstanceError("expected a set or a map", args["target"])
        report = semismooth_star_check(target, self._vector(args, "point"), self._direction(args))
        code = EXIT_OK if all(c.verdict for c in report.checks) else EXIT_CONSISTENCY
        return rule_summary(report), max(code, self._grade(report, query))

    def op_minimax(self, args: dict, query: Query):
        report = minimax_certificate(
            self._function(args, "phi"), self._map(args, "G"), self._set(args, "omega"),
            self._vector(args, "x"), self._vector(args, "y"),
        )
        return rule_summary(report), self._grade(report, query)

    def op_verify(self, args: dict, query: Query):
        target = self._set(args)
        point = self._vector(args, "point")
        direction = self._direction(args)
        if self.overrides.get("kind") or args.get("kind"):
            kinds = [self._kind(args)]
        else:
            kinds = [ConeKind.TANGENT, ConeKind.REGULAR_NORMAL, ConeKind.LIMITING_NORMAL]
            if direction is not None:
                kinds.append(ConeKind.DIRECTIONAL)
        comparisons = [verify_cone(target, point, kind, direction) for kind in kinds]
        passed = all(c.passed for c in comparisons)
        code = EXIT_OK if passed else EXIT_CONSISTENCY
        if query.expected and query.expected.passed is not None and query.expected.passed != passed:
            code = EXIT_CONSISTENCY
        return {"passed": passed, "comparisons": to_jsonable(comparisons)}, code

    def op_implications(self, args: dict, query: Query):
        report = implication_report(self._map(args), self._vector(args, "y"), self._vector(args, "x"))
        return to_jsonable(report), EXIT_OK


async def run_queries(runner: QueryRunner, queries: list[tuple[str, Query]]) -> list[dict[str, Any]]:
    """Queries run concurrently in worker threads; the document keeps file order."""
    semaphore = asyncio.Semaphore(CONFIG.run.concurrency)

    async def one(name: str, query: Query):
        async with semaphore:
            return await asyncio.to_thread(runner.run, query, name)

    return list(await asyncio.gather(*(one(name, query) for name, query in queries)))


def _selected(instance: InstanceFile, op: Optional[str], args: argparse.Namespace) -> list[tuple[str, Query]]:
    chosen = []
    for name, query in zip(instance.query_names(), instance.queries):
        if op is not None and canonical_op(query.op) != op:
            continue
        if getattr(args, "query", None) and name != args.query:
            continue
        if getattr(args, "rule", None) and query.args.get("rule") != args.rule:
            continue
        chosen.append((name, query))
    return chosen


def _criteria(args: argparse.Namespace) -> list[Optional[str]]:
    flags = [("lrc", "LRC"), ("mc", "MC"), ("foscclm", "FOSCclm"), ("fuzzy", "FuzzyIC*")]
    chosen = [criterion for flag, criterion in flags if getattr(args, flag, False)]
    return chosen or [None]


def _emit(document: list[dict[str, Any]], args: argparse.Namespace) -> None:
    fmt = args.format or CONFIG.report.format
    text = render_text(document) if fmt == "text" else render_json(document)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def limits_from(args: argparse.Namespace) -> LimitsConfig:
    """The configured limits with the command-line overrides applied, on a copy."""
    update = {}
    if getattr(args, "max_dim", None):
        update["max_dim"] = args.max_dim
    if getattr(args, "max_pieces", None):
        update["max_pieces"] = args.max_pieces
    return CONFIG.limits.model_copy(update=update)


async def evaluate(args: argparse.Namespace, limits: Optional[LimitsConfig] = None) -> int:
    op = None if args.command == "run" else canonical_op(args.command)
    try:
        instance = load_instance(resolve_path(args.instance))
    except InstanceError as e:
        logger.error(f"{args.instance}: {e}")
        _emit([{"query": args.instance, "op": args.command, "exit_code": EXIT_INPUT, "error": str(e)}], args)
        return EXIT_INPUT
    selected = _selected(instance, op, args)
    document: list[dict[str, Any]] = []
    for criterion in _criteria(args):
        overrides = {"kind": getattr(args, "kind", None), "criterion": criterion}
        document.extend(await run_queries(QueryRunner(instance, overrides, limits), selected))
    _emit(document, args)
    return max((entry["exit_code"] for entry in document), default=EXIT_OK)


def generate(args: argparse.Namespace) -> int:
    document = instance_document(args.seed, args.count, args.max_dim or 2, args.max_pieces or 2)
    text = json.dumps(document, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyvar", description="Exact variational analysis of polyhedral objects")
    parser.add_argument("--verbose", action="store_true", help="log at DEBUG level on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("instance", help="instance file, or the name of a bundled one (m1, orthant, bowtie_corpus)")
        p.add_argument("--format", choices=["json", "text"], default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--max-dim", type=int, default=None)
        p.add_argument("--max-pieces", type=int, default=None)
        p.add_argument("--query", default=None, help="run only the named query")

    for op in OPS + ("run",):
        aliases = [alias for alias, target in OP_ALIASES.items() if target == op]
        p = sub.add_parser(op, aliases=aliases)
        common(p)
        if op in ("cone", "derivative", "rule", "verify", "run"):
            p.add_argument("--kind", choices=[k.value for k in ConeKind], default=None)
        if op == "check":
            p.add_argument("--lrc", action="store_true")
            p.add_argument("--mc", action="store_true")
            p.add_argument("--foscclm", action="store_true")
            p.add_argument("--fuzzy", action="store_true")
        if op == "rule":
            p.add_argument(
                "--rule",
                choices=["domain", "image_cones", "sum", "intersection", "image", "preimage", "chain", "product",
                         "decoupled_sum", "intersection_form", "marginal"],
                default=None,
            )

    gen = sub.add_parser("gen")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--count", type=int, default=4)
    gen.add_argument("--max-dim", type=int, default=None)
    gen.add_argument("--max-pieces", type=int, default=None)
    gen.add_argument("--out", default=None)

    sub.add_parser("config")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if args.verbose else "WARNING")
    if args.command == "config":
        show_config()
        return EXIT_OK
    if args.command == "gen":
        return generate(args)
    return asyncio.run(evaluate(args, limits_from(args)))


def start():
    sys.exit(main())


if __name__ == "__main__":
    start()
