"""
Exact two-phase simplex over ``Fraction`` with Bland's anti-cycling rule.

Free variables are split as z = z+ - z-, inequalities receive slacks, and
artificial columns are added only for rows whose slack cannot start basic.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Literal, Optional, Sequence

from loguru import logger

from .errors import DimensionMismatchError
from .rational import RVector, dot, primitive

if TYPE_CHECKING:
    from .polyhedron import ConvexPolyhedron

Constraint = tuple[RVector, Fraction]
LPStatus = Literal["optimal", "unbounded", "infeasible"]


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    value: Optional[Fraction] = None
    point: Optional[RVector] = None
    ray: Optional[RVector] = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _pivot(tableau: list[list[Fraction]], basis: list[int], row: int, col: int) -> None:
    p = tableau[row][col]
    tableau[row] = [x / p for x in tableau[row]]
    pivot_row = tableau[row]
    for i, other in enumerate(tableau):
        if i != row and other[col] != 0:
            f = other[col]
            tableau[i] = [x - f * y for x, y in zip(other, pivot_row)]
    basis[row] = col


def _run(tableau: list[list[Fraction]], basis: list[int], cost: Sequence[Fraction]) -> Optional[int]:
    """Pivot to optimality; returns the entering column of an unbounded direction, else None."""
    width = len(cost)
    while True:
        in_basis = set(basis)
        entering = None
        for j in range(width):
            if j in in_basis:
                continue
            reduced = cost[j] - sum(
                (cost[b] * tableau[i][j] for i, b in enumerate(basis) if cost[b] != 0),
                Fraction(0),
            )
            if reduced < 0:
                entering = j
                break
        if entering is None:
            return None
        leaving = None
        best = None
        for i, row in enumerate(tableau):
            a = row[entering]
            if a > 0:
                ratio = row[-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leaving]):
                    best, leaving = ratio, i
        if leaving is None:
            return entering
        _pivot(tableau, basis, leaving, entering)


def minimize(
    objective: Sequence[Fraction],
    ineqs: Sequence[Constraint],
    eqs: Sequence[Constraint] = (),
) -> LPResult:
    """Minimize ``objective . z`` subject to ``a . z <= b`` and ``e . z = f`` with z free."""
    n = len(objective)
    k = len(ineqs)
    ncols = 2 * n + k
    rows: list[list[Fraction]] = []
    basis: list[int] = []
    needs_artificial: list[int] = []
    for i, (a, b) in enumerate(ineqs):
        if len(a) != n:
            raise DimensionMismatchError(f"constraint of length {len(a)} in an LP of dimension {n}")
        row = list(a) + [-x for x in a] + [Fraction(0)] * k + [Fraction(b)]
        row[2 * n + i] = Fraction(1)
        if b < 0:
            row = [-x for x in row]
            needs_artificial.append(len(rows))
            basis.append(-1)
        else:
            basis.append(2 * n + i)
        rows.append(row)
    for e, f in eqs:
        if len(e) != n:
            raise DimensionMismatchError(f"constraint of length {len(e)} in an LP of dimension {n}")
        row = list(e) + [-x for x in e] + [Fraction(0)] * k + [Fraction(f)]
        if f < 0:
            row = [-x for x in row]
        needs_artificial.append(len(rows))
        basis.append(-1)
        rows.append(row)

    total = ncols + len(needs_artificial)
    tableau = []
    for i, row in enumerate(rows):
        extra = [Fraction(0)] * len(needs_artificial)
        if i in needs_artificial:
            j = needs_artificial.index(i)
            extra[j] = Fraction(1)
            basis[i] = ncols + j
        tableau.append(row[:-1] + extra + row[-1:])

    if needs_artificial:
        phase_one = [Fraction(0)] * ncols + [Fraction(1)] * len(needs_artificial)
        _run(tableau, basis, phase_one)
        infeasibility = sum((tableau[i][-1] for i, b in enumerate(basis) if b >= ncols), Fraction(0))
        if infeasibility > 0:
            return LPResult("infeasible")
        for i in range(len(tableau) - 1, -1, -1):
            if basis[i] < ncols:
                continue
            col = next((j for j in range(ncols) if tableau[i][j] != 0), None)
            if col is None:
                del tableau[i]
                del basis[i]
            else:
                _pivot(tableau, basis, i, col)
        tableau = [row[:ncols] + row[-1:] for row in tableau]

    cost = list(objective) + [-c for c in objective] + [Fraction(0)] * k
    entering = _run(tableau, basis, cost)
    values = [Fraction(0)] * ncols
    for i, b in enumerate(basis):
        values[b] = tableau[i][-1]
    point = tuple(values[j] - values[n + j] for j in range(n))
    if entering is not None:
        direction = [Fraction(0)] * ncols
        direction[entering] = Fraction(1)
        for i, b in enumerate(basis):
            direction[b] = -tableau[i][entering]
        ray = primitive(tuple(direction[j] - direction[n + j] for j in range(n)))
        return LPResult("unbounded", point=point, ray=ray)
    return LPResult("optimal", value=dot(objective, point), point=point)


def maximize(objective: Sequence[Fraction], ineqs: Sequence[Constraint], eqs: Sequence[Constraint] = ()) -> LPResult:
    result = minimize(tuple(-c for c in objective), ineqs, eqs)
    if result.optimal:
        return LPResult("optimal", value=-result.value, point=result.point)
    return result


def solve_lp(objective: RVector, feasible: "ConvexPolyhedron") -> LPResult:
    """Minimize ``objective`` over one convex piece."""
    if len(objective) != feasible.dim:
        raise DimensionMismatchError(
            f"objective of length {len(objective)} over a polyhedron of dimension {feasible.dim}"
        )
    return minimize(objective, feasible.ineqs, feasible.eqs)


def strict_solution(
    dim: int,
    ineqs: Sequence[Constraint],
    eqs: Sequence[Constraint],
    strict: Sequence[Constraint],
) -> Optional[RVector]:
    """
    Point satisfying the closed system with every ``strict`` inequality holding strictly.

    Solved as max eps s.t. a.z + eps <= b on the strict rows, eps <= 1; None when eps* <= 0.
    """
    lifted = [(tuple(a) + (Fraction(0),), b) for a, b in ineqs]
    lifted += [(tuple(a) + (Fraction(1),), b) for a, b in strict]
    lifted.append(((Fraction(0),) * dim + (Fraction(1),), Fraction(1)))
    lifted_eqs = [(tuple(a) + (Fraction(0),), b) for a, b in eqs]
    objective = (Fraction(0),) * dim + (Fraction(-1),)
    result = minimize(objective, lifted, lifted_eqs)
    if not result.optimal:
        return None
    if strict and result.value >= 0:
        logger.debug("strict system has no interior solution")
        return None
    return result.point[:dim]
