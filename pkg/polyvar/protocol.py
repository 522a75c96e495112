"""
Instance files: named objects plus a list of queries, and the JSON form of every result.

Rationals travel as "p/q" strings (plain integers are accepted on input); a convex piece
is {"ineq": [[a_1, ..., a_n, b], ...], "eq": [...]} meaning a.z <= b and a.z = b.
"""

import json
from dataclasses import fields, is_dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator

from .config import CONFIG, LimitsConfig
from .errors import DimensionMismatchError, InstanceError, PolyvarError
from .mappings import PLFunction, PolyMap
from .polyhedron import PolyhedralSet, canonicalize, enforce_limits
from .rational import INF, Matrix, RVector, to_rational

RationalText = Union[str, int]


def _rational(value: Any) -> Fraction:
    try:
        return to_rational(value)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ValueError(f"not an exact rational: {value!r}") from e


class PieceModel(BaseModel):
    ineq: list[list[RationalText]] = Field(default_factory=list)
    eq: list[list[RationalText]] = Field(default_factory=list)

    @field_validator("ineq", "eq")
    @classmethod
    def _rows_are_rational(cls, rows):
        for row in rows:
            if len(row) < 2:
                raise ValueError("a constraint row needs at least one coefficient and a right-hand side")
            for value in row:
                _rational(value)
        return rows

    def row_length(self) -> Optional[int]:
        rows = self.ineq + self.eq
        return len(rows[0]) - 1 if rows else None

    def constraints(self, dim: int) -> tuple[list, list]:
        def parse(rows):
            parsed = []
            for row in rows:
                if len(row) != dim + 1:
                    raise DimensionMismatchError(f"constraint row of length {len(row)} in dimension {dim}")
                values = [_rational(v) for v in row]
                parsed.append((tuple(values[:-1]), values[-1]))
            return parsed

        return parse(self.ineq), parse(self.eq)


class SetModel(BaseModel):
    pieces: list[PieceModel]
    dim: Optional[int] = None

    def build(self, name: str = "set", limits: Optional[LimitsConfig] = None) -> PolyhedralSet:
        lengths = {p.row_length() for p in self.pieces} - {None}
        if self.dim is not None:
            lengths.add(self.dim)
        if len(lengths) > 1:
            raise InstanceError(f"pieces of different dimensions {sorted(lengths)}", name)
        if not lengths:
            raise InstanceError("dimension cannot be inferred; give \"dim\"", name)
        dim = lengths.pop()
        built = []
        for piece in self.pieces:
            ineqs, eqs = piece.constraints(dim)
            built.append(canonicalize(dim, ineqs, eqs))
        target = PolyhedralSet.from_pieces(dim, built)
        enforce_limits(target, limits, name)
        return target


class MapModel(BaseModel):
    graph: SetModel
    m: int
    n: int

    def build(self, name: str = "map", limits: Optional[LimitsConfig] = None) -> PolyMap:
        graph = self.graph.build(name, limits)
        if graph.dim != self.m + self.n:
            raise InstanceError(f"graph of dimension {graph.dim} for a map {self.m} => {self.n}", name)
        return PolyMap(graph, self.m, self.n)


class FunctionModel(BaseModel):
    epi: SetModel
    n: int

    def build(self, name: str = "function", limits: Optional[LimitsConfig] = None) -> PLFunction:
        epigraph = self.epi.build(name, limits)
        if epigraph.dim != self.n + 1:
            raise InstanceError(f"epigraph of dimension {epigraph.dim} for a function on R^{self.n}", name)
        return PLFunction(epigraph, self.n)


class MatrixModel(BaseModel):
    rows: list[list[RationalText]]

    def build(self, name: str = "matrix", limits: Optional[LimitsConfig] = None) -> Matrix:
        if len({len(r) for r in self.rows}) > 1:
            raise InstanceError("ragged matrix", name)
        return tuple(tuple(_rational(v) for v in row) for row in self.rows)


ObjectModel = Union[MapModel, FunctionModel, MatrixModel, SetModel]


class Expected(BaseModel):
    relation: Optional[str] = None
    status: Optional[str] = None
    verdict: Optional[bool] = None
    cone: Optional[SetModel] = None
    passed: Optional[bool] = None


class Query(BaseModel):
    op: str
    name: Optional[str] = None
    args: dict[str, Any] = Field(default_factory=dict)
    expected: Optional[Expected] = None


class InstanceFile(BaseModel):
    objects: dict[str, ObjectModel] = Field(default_factory=dict)
    queries: list[Query] = Field(default_factory=list)

    def query_names(self) -> list[str]:
        return [q.name or f"{q.op}-{i}" for i, q in enumerate(self.queries)]

    def resolve(self, name: str, limits: Optional[LimitsConfig] = None):
        if name not in self.objects:
            raise InstanceError("unknown object", name)
        try:
            return self.objects[name].build(name, limits or CONFIG.limits)
        except PolyvarError as e:
            if isinstance(e, InstanceError):
                raise
            raise InstanceError(str(e), name) from e


def load_instance(path: Union[str, Path]) -> InstanceFile:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InstanceError(f"cannot read: {e}", str(path)) from e
    try:
        return InstanceFile.model_validate(json.loads(text))
    except json.JSONDecodeError as e:
        raise InstanceError(f"not JSON: {e}", str(path)) from e
    except ValidationError as e:
        raise InstanceError(f"schema violation: {e.errors()[0]['msg']} at {e.errors()[0]['loc']}", str(path)) from e


def parse_vector(values: Any, name: str = "vector") -> RVector:
    if not isinstance(values, list):
        raise InstanceError("expected a list of rationals", name)
    try:
        return tuple(_rational(v) for v in values)
    except ValueError as e:
        raise InstanceError(str(e), name) from e


def rational_text(value: Fraction) -> str:
    return str(value)


def dump_set(target: PolyhedralSet) -> dict[str, Any]:
    """Canonical H-representation per piece; re-parses as a SetModel."""
    pieces = []
    for piece in target.pieces:
        pieces.append(
            {
                "ineq": [[rational_text(v) for v in a] + [rational_text(b)] for a, b in piece.ineqs],
                "eq": [[rational_text(v) for v in a] + [rational_text(b)] for a, b in piece.eqs],
            }
        )
    return {"dim": target.dim, "pieces": pieces}


def dump_map(mapping: PolyMap) -> dict[str, Any]:
    return {"graph": dump_set(mapping.graph), "m": mapping.m, "n": mapping.n}


def dump_function(f: PLFunction) -> dict[str, Any]:
    return {"epi": dump_set(f.epigraph), "n": f.n}


def to_jsonable(value: Any) -> Any:
    """Report values with a fixed key order; exact numbers become strings."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, Fraction):
        return rational_text(value)
    if isinstance(value, float):
        if value == INF:
            return "inf"
        if value == -INF:
            return "-inf"
        return value
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, PolyhedralSet):
        return dump_set(value)
    if isinstance(value, PolyMap):
        return dump_map(value)
    if isinstance(value, PLFunction):
        return dump_function(value)
    if isinstance(value, np.ndarray):
        return [float(v) for v in value]
    if isinstance(value, np.floating):
        return to_jsonable(float(value))
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if is_dataclass(value):
        return {f.name: to_jsonable(getattr(value, f.name)) for f in fields(value)}
    raise TypeError(f"cannot serialize {type(value).__name__}")
