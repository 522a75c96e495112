"""
Floating-point brute-force checks of the limit definitions behind the exact cones.

Nothing here proves anything. Distances are computed with ``scipy.optimize.linprog``
on polyhedral pieces and with SLSQP projections on sets given by smooth residuals;
every verdict records its schedule so that a run can be reproduced. This is the
only module that touches floating point.
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Literal, Optional, Sequence, Union

import numpy as np
from loguru import logger
from scipy.optimize import linprog, minimize

from .cones import cone_generators, generators
from .config import CONFIG, OracleConfig
from .errors import MembershipError
from .polyhedron import PolyhedralSet
from .rational import RVector
from .variational import ConeKind, ConeResult, cone_of

Decision = Literal["member", "non_member", "undecided"]
Residual = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FloatPiece:
    a: np.ndarray
    b: np.ndarray
    e: np.ndarray
    f: np.ndarray


def _floats(values: Sequence[Fraction]) -> np.ndarray:
    return np.array([float(v) for v in values], dtype=float)


def _float_piece(dim: int, ineqs, eqs) -> FloatPiece:
    a = np.array([_floats(r) for r, _ in ineqs], dtype=float).reshape(-1, dim)
    e = np.array([_floats(r) for r, _ in eqs], dtype=float).reshape(-1, dim)
    return FloatPiece(a, _floats([b for _, b in ineqs]), e, _floats([b for _, b in eqs]))


@dataclass(frozen=True)
class SampledSet:
    """Membership by residuals: z belongs iff every inequality residual is <= 0 and every equality residual is 0."""

    dim: int
    name: str = "set"
    pieces: tuple[FloatPiece, ...] = ()
    inequalities: Optional[Residual] = None
    equalities: Optional[Residual] = None
    box: float = 1.0

    @classmethod
    def polyhedral(cls, target: PolyhedralSet, name: str = "set") -> "SampledSet":
        pieces = tuple(_float_piece(target.dim, p.ineqs, p.eqs) for p in target.pieces)
        return cls(target.dim, name, pieces)

    @classmethod
    def from_residuals(
        cls, dim: int, inequalities: Optional[Residual] = None, equalities: Optional[Residual] = None, name: str = "set"
    ) -> "SampledSet":
        return cls(dim, name, (), inequalities, equalities)

    @property
    def is_polyhedral(self) -> bool:
        return self.inequalities is None and self.equalities is None

    def violation(self, z: np.ndarray) -> float:
        if self.is_polyhedral:
            if not self.pieces:
                return np.inf
            return min(_piece_violation(p, z) for p in self.pieces)
        worst = 0.0
        if self.inequalities is not None:
            worst = max(worst, float(np.max(self.inequalities(z), initial=0.0)))
        if self.equalities is not None:
            worst = max(worst, float(np.max(np.abs(self.equalities(z)), initial=0.0)))
        return worst

    def contains(self, z: np.ndarray, tol: float = 1e-12) -> bool:
        return self.violation(np.asarray(z, dtype=float)) <= tol

    def distance(self, z: np.ndarray, scale: float = 1.0, fixed: Optional[Sequence[int]] = None) -> float:
        """Infinity-norm distance from z, moving only the coordinates outside ``fixed``."""
        z = np.asarray(z, dtype=float)
        fixed = tuple(fixed or ())
        if self.is_polyhedral:
            return min((_linprog_distance(p, z, fixed, self.box, max(scale, 1e-15)) for p in self.pieces), default=np.inf)
        nearest = self.nearest(z, scale, fixed)
        return np.inf if nearest is None else float(np.max(np.abs(nearest - z), initial=0.0))

    def nearest(self, z: np.ndarray, scale: float = 1.0, fixed: Sequence[int] = ()) -> Optional[np.ndarray]:
        """Euclidean projection by SLSQP in coordinates scaled to the query neighbourhood."""
        z = np.asarray(z, dtype=float)
        scale = max(scale, 1e-15)
        if self.is_polyhedral:
            best, best_norm = None, np.inf
            for piece in self.pieces:
                point = _slsqp_projection(z, scale, fixed, self.box, _piece_constraints(piece))
                if point is not None and _piece_violation(piece, point) <= 1e-7 * scale:
                    norm = float(np.linalg.norm(point - z))
                    if norm < best_norm:
                        best, best_norm = point, norm
            return best
        constraints = []
        if self.inequalities is not None:
            constraints.append(("ineq", lambda w, g=self.inequalities: -np.atleast_1d(g(w))))
        if self.equalities is not None:
            constraints.append(("eq", lambda w, h=self.equalities: np.atleast_1d(h(w))))
        point = _slsqp_projection(z, scale, fixed, self.box, constraints)
        if point is None or self.violation(point) > 1e-6 * scale:
            return None
        return point


def _piece_violation(piece: FloatPiece, z: np.ndarray) -> float:
    worst = 0.0
    if piece.a.size:
        worst = max(worst, float(np.max(piece.a @ z - piece.b)))
    if piece.e.size:
        worst = max(worst, float(np.max(np.abs(piece.e @ z - piece.f))))
    return worst


def _piece_constraints(piece: FloatPiece) -> list:
    constraints = []
    if piece.a.size:
        constraints.append(("ineq", lambda w, a=piece.a, b=piece.b: b - a @ w))
    if piece.e.size:
        constraints.append(("eq", lambda w, e=piece.e, f=piece.f: e @ w - f))
    return constraints


def _linprog_distance(piece: FloatPiece, z: np.ndarray, fixed: Sequence[int], box: float, scale: float) -> float:
    """min t subject to z + scale u in the piece and |u_i| <= t on the free coordinates, times scale."""
    dim = len(z)
    c = np.zeros(dim + 1)
    c[-1] = 1.0
    rows, rhs = [], []
    for row, b in zip(piece.a, piece.b):
        rows.append(np.append(row, 0.0))
        rhs.append((b - row @ z) / scale)
    for i in range(dim):
        if i in fixed:
            continue
        for sign in (1.0, -1.0):
            bound = np.zeros(dim + 1)
            bound[i], bound[-1] = sign, -1.0
            rows.append(bound)
            rhs.append(0.0)
    a_eq = np.array([np.append(row, 0.0) for row in piece.e]) if piece.e.size else None
    b_eq = (piece.f - piece.e @ z) / scale if piece.e.size else None
    limit = box / scale
    bounds = [(0.0, 0.0) if i in fixed else (-limit, limit) for i in range(dim)] + [(0, None)]
    result = linprog(
        c,
        A_ub=np.array(rows) if rows else None,
        b_ub=np.array(rhs) if rhs else None,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if not result.success:
        return np.inf
    return max(float(result.x[-1]), 0.0) * scale


def _slsqp_projection(z, scale, fixed, box, constraints) -> Optional[np.ndarray]:
    dim = len(z)
    scaled = [
        {"type": kind, "fun": (lambda u, fn=fn: fn(z + scale * u) / scale)} for kind, fn in constraints
    ]
    limit = box / scale
    bounds = [(0.0, 0.0) if i in fixed else (-limit, limit) for i in range(dim)]
    result = minimize(
        lambda u: float(u @ u),
        np.zeros(dim),
        jac=lambda u: 2 * u,
        method="SLSQP",
        bounds=bounds,
        constraints=scaled,
        options={"ftol": 1e-14, "maxiter": 200},
    )
    if not np.all(np.isfinite(result.x)):
        return None
    return z + scale * result.x


@dataclass(frozen=True)
class OracleVerdict:
    kind: str
    decision: Decision
    trace: tuple[tuple[float, float], ...] = ()
    schedule: dict = field(default_factory=dict)


def _decide(ratios: Sequence[float], config: OracleConfig) -> Decision:
    window = list(ratios[-config.final_window:])
    if all(r < config.member_tol for r in window) and all(b <= a + 1e-12 for a, b in zip(window, window[1:])):
        return "member"
    if all(r > config.non_member_floor for r in window):
        return "non_member"
    return "undecided"


def _grid(center: np.ndarray, radius: float, points: int) -> list[np.ndarray]:
    offsets = np.linspace(-1.0, 1.0, points)
    dim = len(center)
    if points**dim <= 729:
        return [center + radius * np.array(o) for o in itertools.product(offsets, repeat=dim)]
    grid = [center]
    for i in range(dim):
        for o in offsets:
            if o != 0:
                step = np.zeros(dim)
                step[i] = radius * o
                grid.append(center + step)
    return grid


def tangent_membership(
    target: SampledSet, point: Sequence[float], direction: Sequence[float], config: Optional[OracleConfig] = None
) -> OracleVerdict:
    """dist(point + t w', set) / t along t = 2^-k with w' on a shrinking grid around the direction."""
    config = config or CONFIG.oracle
    point = np.asarray(point, dtype=float)
    w = np.asarray(direction, dtype=float)
    if not target.contains(point, config.member_tol):
        raise MembershipError(f"{point.tolist()} is not in {target.name}")
    trace = []
    for k in range(config.k_min, config.k_max + 1):
        t = 2.0**-k
        radius = 2.0 ** (-k / 2)
        best = min(target.distance(point + t * c, scale=t) / t for c in _grid(w, radius, config.grid_points))
        trace.append((t, best))
    decision = _decide([r for _, r in trace], config)
    logger.debug(f"tangent membership of {w.tolist()} in {target.name}: {decision}")
    if decision == "undecided":
        logger.warning(f"tangent membership of {w.tolist()} undecided")
    schedule = {"k_min": config.k_min, "k_max": config.k_max, "grid_points": config.grid_points}
    return OracleVerdict("tangent", decision, tuple(trace), schedule)


def _unit(v: np.ndarray) -> Optional[np.ndarray]:
    norm = float(np.linalg.norm(v))
    return None if norm == 0 else v / norm


def _sample_directions(dim: int, config: OracleConfig, rng: np.random.Generator) -> list[np.ndarray]:
    axes = [s * np.eye(dim)[i] for i in range(dim) for s in (1.0, -1.0)]
    count = config.directions_per_axis * 2 * dim
    random = rng.standard_normal((count, dim))
    return axes + [r / np.linalg.norm(r) for r in random]


def cluster_rays(rays: Sequence[np.ndarray], tol: float) -> list[np.ndarray]:
    kept: list[np.ndarray] = []
    for ray in rays:
        if all(np.arccos(np.clip(ray @ other, -1.0, 1.0)) >= tol for other in kept):
            kept.append(ray)
    return kept


def sample_limiting_normals(
    target: SampledSet,
    point: Sequence[float],
    radii: Optional[Sequence[float]] = None,
    config: Optional[OracleConfig] = None,
) -> list[np.ndarray]:
    """Proximal normals z - proj(z) at projections near the point, clustered by angle."""
    config = config or CONFIG.oracle
    point = np.asarray(point, dtype=float)
    radii = list(radii or config.sample_radii)
    rng = np.random.default_rng(config.seed)
    rays = []
    for r in radii:
        for d in _sample_directions(target.dim, config, rng):
            z = point + r * d
            if target.contains(z, config.member_tol * r):
                continue
            nearest = target.nearest(z, scale=r)
            if nearest is None:
                continue
            ray = _unit(z - nearest)
            if ray is not None:
                rays.append(ray)
    clustered = cluster_rays(rays, config.angular_tol)
    logger.info(f"{len(clustered)} normal directions sampled on {target.name} from {len(rays)} projections")
    return clustered


def _nearby_members(target: SampledSet, point: np.ndarray, r: float, config, rng) -> list[np.ndarray]:
    members = []
    for d in _sample_directions(target.dim, config, rng):
        z = point + r * d
        nearest = z if target.contains(z, config.member_tol * r) else target.nearest(z, scale=r)
        if nearest is not None and np.linalg.norm(nearest - point) > config.member_tol * r:
            members.append(nearest)
    return members


def is_regular_normal(
    target: SampledSet, point: Sequence[float], ray: np.ndarray, config: Optional[OracleConfig] = None
) -> bool:
    """<z*, z - point> / ||z - point|| stays below the angular tolerance on nearby members."""
    config = config or CONFIG.oracle
    point = np.asarray(point, dtype=float)
    rng = np.random.default_rng(config.seed)
    worst = 0.0
    for r in config.sample_radii:
        for z in _nearby_members(target, point, r, config, rng):
            step = z - point
            worst = max(worst, float(ray @ step) / float(np.linalg.norm(step)))
    return worst <= config.angular_tol


def sample_regular_normals(
    target: SampledSet,
    point: Sequence[float],
    candidates: Sequence[np.ndarray] = (),
    config: Optional[OracleConfig] = None,
) -> list[np.ndarray]:
    """Candidate unit rays (axes, random ones and the given ones) that pass the regular normal test."""
    config = config or CONFIG.oracle
    rng = np.random.default_rng(config.seed + 1)
    pool = _sample_directions(target.dim, config, rng) + [u for u in map(_unit, candidates) if u is not None]
    return cluster_rays([c for c in pool if is_regular_normal(target, point, c, config)], config.angular_tol)


def sample_directional_normals(
    target: SampledSet,
    point: Sequence[float],
    direction: Sequence[float],
    config: Optional[OracleConfig] = None,
) -> list[np.ndarray]:
    """Limiting normals sampled around the tangent-shifted base point point + t w."""
    config = config or CONFIG.oracle
    w = _unit(np.asarray(direction, dtype=float))
    if w is None:
        return sample_limiting_normals(target, point, config=config)
    t = config.sample_radii[0]
    base = np.asarray(point, dtype=float) + t * w
    if not target.contains(base, config.member_tol * t):
        return []
    return sample_limiting_normals(target, base, [r * t for r in config.sample_radii], config)


def calmness_search(
    graph: SampledSet, m: int, y: Sequence[float], x: Sequence[float], config: Optional[OracleConfig] = None
) -> OracleVerdict:
    """
    Largest dist(x', M(y)) / dist(y, M^-1(x')) over graph points (y', x') in shrinking neighbourhoods.

    "member" is calm evidence, "non_member" is non-calm evidence.
    """
    config = config or CONFIG.oracle
    base = np.concatenate([np.asarray(y, dtype=float), np.asarray(x, dtype=float)])
    if not graph.contains(base, config.member_tol):
        raise MembershipError(f"({list(y)}, {list(x)}) is not on {graph.name}")
    fixed_y = list(range(m))
    fixed_x = list(range(m, graph.dim))
    rng = np.random.default_rng(config.seed)
    trace = []
    for k in range(1, config.calm_budget + 1):
        r = 2.0**-k
        worst = 0.0
        for d in _sample_directions(graph.dim, config, rng):
            point = graph.nearest(base + r * d, scale=r)
            if point is None:
                continue
            numerator = graph.distance(np.concatenate([base[:m], point[m:]]), scale=r, fixed=fixed_y)
            denominator = graph.distance(np.concatenate([base[:m], point[m:]]), scale=r, fixed=fixed_x)
            if numerator <= config.member_tol * r:
                continue
            ratio = np.inf if denominator <= 1e-15 else numerator / denominator
            worst = max(worst, ratio)
        trace.append((r, worst))
        if worst > config.calm_ratio:
            logger.info(f"non-calm evidence on {graph.name}: ratio {worst:.3g} at radius {r:.3g}")
            return OracleVerdict("calmness", "non_member", tuple(trace), {"calm_budget": config.calm_budget})
    ratios = [ratio for _, ratio in trace]
    window = ratios[-config.final_window:]
    stable = max(window) <= 2 * max(max(ratios[: -config.final_window], default=0.0), 1.0)
    decision: Decision = "member" if stable else "undecided"
    if decision == "undecided":
        logger.warning(f"calmness search on {graph.name} undecided")
    return OracleVerdict("calmness", decision, tuple(trace), {"calm_budget": config.calm_budget})


@dataclass(frozen=True)
class Comparison:
    kind: ConeKind
    passed: bool
    checked: int
    failures: tuple[tuple[tuple[float, ...], str], ...] = ()
    undecided: tuple[str, ...] = ()


Sampled = Union[Sequence[np.ndarray], Sequence[tuple[RVector, OracleVerdict]]]


def _generator_rays(exact: PolyhedralSet) -> tuple[list[np.ndarray], list[str]]:
    """Unit generators of the pieces of dimension at most one, and a note per skipped piece."""
    rays, skipped = [], []
    for piece in exact.pieces:
        if piece.affine_dim > 1:
            skipped.append(f"recall undecided on a piece of dimension {piece.affine_dim}")
            continue
        found, lines = generators(piece)
        for g in list(found) + list(lines) + [tuple(-c for c in l) for l in lines]:
            unit = _unit(_floats(g))
            if unit is not None:
                rays.append(unit)
    return rays, skipped


def compare_with_exact(exact: ConeResult, sampled: Sampled, config: Optional[OracleConfig] = None) -> Comparison:
    """Every sampled ray lies in the exact union; every generator of a low-dimensional piece is recalled."""
    config = config or CONFIG.oracle
    failures = []
    undecided = []
    if exact.kind == ConeKind.TANGENT:
        for direction, verdict in sampled:
            inside = exact.cone.contains(tuple(direction))
            if verdict.decision == "undecided":
                undecided.append(f"membership undecided for {tuple(float(c) for c in direction)}")
            if inside and verdict.decision == "non_member":
                failures.append((tuple(float(c) for c in direction), "exact member, sampled non-member"))
            if not inside and verdict.decision == "member":
                failures.append((tuple(float(c) for c in direction), "exact non-member, sampled member"))
        return Comparison(exact.kind, not failures, len(sampled), tuple(failures), tuple(undecided))
    region = SampledSet.polyhedral(exact.cone, "exact cone")
    for ray in sampled:
        if region.distance(ray) > config.angular_tol:
            failures.append((tuple(float(c) for c in ray), "sampled ray outside the exact cone"))
    generator_rays, undecided = _generator_rays(exact.cone)
    for g in generator_rays:
        if not any(np.linalg.norm(g - ray) <= config.angular_tol for ray in sampled):
            failures.append((tuple(g.tolist()), "exact generator not recalled"))
    for ray, reason in failures:
        logger.error(f"oracle disagreement on {exact.kind.value}: {reason} {ray}")
    for note in undecided:
        logger.warning(f"{exact.kind.value}: {note}")
    return Comparison(exact.kind, not failures, len(sampled), tuple(failures), tuple(undecided))


def _tangent_test_directions(exact: PolyhedralSet) -> list[RVector]:
    directions = {tuple(Fraction(int(i == j)) * s for j in range(exact.dim)) for i in range(exact.dim) for s in (1, -1)}
    for rays, lines in cone_generators(exact):
        directions.update(tuple(r) for r in rays)
        directions.update(tuple(l) for l in lines)
    return sorted(directions)


def verify_cone(
    target: PolyhedralSet,
    point: RVector,
    kind: ConeKind,
    direction: Optional[RVector] = None,
    config: Optional[OracleConfig] = None,
) -> Comparison:
    """Exact cone of one kind against its sampled counterpart."""
    config = config or CONFIG.oracle
    kind = ConeKind(kind)
    exact = cone_of(kind, target, point, direction)
    sampled_set = SampledSet.polyhedral(target)
    base = _floats(point)
    if kind == ConeKind.TANGENT:
        directions = _tangent_test_directions(exact.cone)
        verdicts = [(p, tangent_membership(sampled_set, base, _floats(p), config)) for p in directions]
        return compare_with_exact(exact, verdicts, config)
    if kind == ConeKind.REGULAR_NORMAL:
        rays = sample_regular_normals(sampled_set, base, _generator_rays(exact.cone)[0], config)
    elif kind == ConeKind.LIMITING_NORMAL:
        rays = sample_limiting_normals(sampled_set, base, config=config)
    else:
        rays = sample_directional_normals(sampled_set, base, _floats(direction), config)
    return compare_with_exact(exact, rays, config)


def m2_graph() -> SampledSet:
    """Graph of y => [-y^2, y^2] in (y, x) coordinates."""
    return SampledSet.from_residuals(2, lambda z: np.array([z[1] - z[0] ** 2, -z[1] - z[0] ** 2]), name="M2")


def sqrt_graph() -> SampledSet:
    """Graph of y => [-|y|^(1/2), inf): inner calm but not calm at the origin."""
    return SampledSet.from_residuals(2, lambda z: np.array([-np.sqrt(abs(z[0])) - z[1]]), name="sqrt")


def reciprocal_graph() -> SampledSet:
    """Graph of y -> 1/y."""
    return SampledSet.from_residuals(
        2, equalities=lambda z: np.array([z[0] * z[1] - 1.0]), name="reciprocal"
    )
