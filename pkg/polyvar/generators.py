"""
Seeded pseudo-random desk-scale instances.

Every generated set, graph and epigraph contains the origin, which is the base point of
the generated queries. Small integer coefficients keep the exact arithmetic cheap.
"""

from fractions import Fraction
from typing import Any, Optional

import numpy as np
from loguru import logger

from .mappings import PLFunction, PolyMap
from .polyhedron import ConvexPolyhedron, PolyhedralSet, canonicalize
from .protocol import dump_function, dump_map, dump_set
from .rational import RVector, unit, zeros
from .variational import ConeKind

COEFFICIENTS = (-2, -1, 0, 1, 2)


def _row(rng: np.random.Generator, dim: int) -> RVector:
    while True:
        row = tuple(Fraction(int(rng.choice(COEFFICIENTS))) for _ in range(dim))
        if any(row):
            return row


def random_piece(rng: np.random.Generator, dim: int, constraints: int, conic: bool = False) -> Optional[ConvexPolyhedron]:
    """A piece through the origin; with ``conic`` every constraint is active there."""
    ineqs = []
    for _ in range(constraints):
        offset = Fraction(0) if conic or rng.random() < 0.6 else Fraction(int(rng.integers(1, 4)))
        ineqs.append((_row(rng, dim), offset))
    eqs = []
    if dim > 1 and rng.random() < 0.15:
        eqs.append((_row(rng, dim), Fraction(0)))
    return canonicalize(dim, ineqs, eqs)


def random_set(
    seed: int, dim: int = 2, max_pieces: int = 3, max_constraints: int = 3, conic: bool = False
) -> PolyhedralSet:
    rng = np.random.default_rng(seed)
    count = int(rng.integers(1, max_pieces + 1))
    pieces = [random_piece(rng, dim, int(rng.integers(1, max_constraints + 1)), conic) for _ in range(count)]
    return PolyhedralSet.from_pieces(dim, pieces)


def random_map(seed: int, m: int = 1, n: int = 1, max_pieces: int = 2, max_constraints: int = 3) -> PolyMap:
    return PolyMap(random_set(seed, m + n, max_pieces, max_constraints), m, n)


def random_marginal_function(seed: int, inner: int = 1, outer: int = 1, terms: int = 2) -> PLFunction:
    """max of random affine terms and of +-x_j, so that every inner minimum is attained."""
    rng = np.random.default_rng(seed)
    dim = inner + outer
    pieces = [(_row(rng, dim), Fraction(int(rng.integers(-1, 2)))) for _ in range(terms)]
    for j in range(inner):
        pieces.append((unit(dim, j), Fraction(0)))
        pieces.append((tuple(-v for v in unit(dim, j)), Fraction(0)))
    return PLFunction.max_affine(pieces)


def _point(dim: int) -> list[str]:
    return [str(v) for v in zeros(dim)]


def instance_document(seed: int, count: int = 4, max_dim: int = 2, max_pieces: int = 2) -> dict[str, Any]:
    """An instance file with sets and maps and one query per cone kind, criterion and oracle check."""
    rng = np.random.default_rng(seed)
    objects: dict[str, Any] = {}
    queries: list[dict[str, Any]] = []
    for i in range(count):
        dim = int(rng.integers(1, max_dim + 1))
        target = random_set(int(rng.integers(2**31)), dim, max_pieces)
        name = f"S{i}"
        objects[name] = dump_set(target)
        for kind in (ConeKind.TANGENT, ConeKind.REGULAR_NORMAL, ConeKind.LIMITING_NORMAL):
            queries.append(
                {"name": f"{name}-{kind.value}", "op": "cone",
                 "args": {"set": name, "point": _point(dim), "kind": kind.value}}
            )
        queries.append(
            {"name": f"{name}-verify", "op": "verify",
             "args": {"set": name, "point": _point(dim), "kind": ConeKind.LIMITING_NORMAL.value}}
        )
        queries.append({"name": f"{name}-semismooth", "op": "semismooth", "args": {"target": name, "point": _point(dim)}})

        mapping = random_map(int(rng.integers(2**31)), 1, 1, max_pieces)
        name = f"M{i}"
        objects[name] = dump_map(mapping)
        for criterion in ("LRC", "MC", "FOSCclm"):
            queries.append(
                {"name": f"{name}-{criterion}", "op": "check",
                 "args": {"map": name, "y": ["0"], "x": ["0"], "criterion": criterion}}
            )
        queries.append(
            {"name": f"{name}-domain", "op": "rule",
             "args": {"rule": "domain", "map": name, "y": ["0"], "kind": ConeKind.TANGENT.value}}
        )

        f = random_marginal_function(int(rng.integers(2**31)))
        name = f"F{i}"
        objects[name] = dump_function(f)
        queries.append(
            {"name": f"{name}-marginal", "op": "rule",
             "args": {"rule": "marginal", "function": name, "y": ["0"], "kind": ConeKind.REGULAR_NORMAL.value}}
        )
    logger.info(f"generated {len(objects)} objects and {len(queries)} queries from seed {seed}")
    return {"objects": objects, "queries": queries}
