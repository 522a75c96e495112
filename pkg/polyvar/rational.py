"""
Exact rational vectors and matrices.

Vectors are plain tuples of ``Fraction`` so they hash, compare and sort
lexicographically; matrices are tuples of row vectors.
"""

import math
from fractions import Fraction
from typing import Iterable, Sequence, Union

RVector = tuple[Fraction, ...]
Matrix = tuple[RVector, ...]
Number = Union[int, str, Fraction]

INF = math.inf


def to_rational(value: Number) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"expected an exact rational, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"expected an exact rational, got {value!r}")


def vec(values: Iterable[Number]) -> RVector:
    return tuple(to_rational(v) for v in values)


def zeros(dim: int) -> RVector:
    return (Fraction(0),) * dim


def unit(dim: int, index: int) -> RVector:
    return tuple(Fraction(1) if i == index else Fraction(0) for i in range(dim))


def add(a: Sequence[Fraction], b: Sequence[Fraction]) -> RVector:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence[Fraction], b: Sequence[Fraction]) -> RVector:
    return tuple(x - y for x, y in zip(a, b))


def scale(factor: Fraction, a: Sequence[Fraction]) -> RVector:
    return tuple(factor * x for x in a)


def neg(a: Sequence[Fraction]) -> RVector:
    return tuple(-x for x in a)


def dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def is_zero(a: Sequence[Fraction]) -> bool:
    return all(x == 0 for x in a)


def norm_inf(a: Sequence[Fraction]) -> Fraction:
    return max((abs(x) for x in a), default=Fraction(0))


def concat(*parts: Sequence[Fraction]) -> RVector:
    out: list[Fraction] = []
    for part in parts:
        out.extend(part)
    return tuple(out)


def leading_index(a: Sequence[Fraction]) -> int:
    for i, x in enumerate(a):
        if x != 0:
            return i
    return -1


def normalize_leading(a: Sequence[Fraction]) -> tuple[RVector, Fraction]:
    """Scale by a positive factor so the first nonzero entry is +-1; returns (vector, factor)."""
    i = leading_index(a)
    if i < 0:
        return tuple(a), Fraction(1)
    factor = 1 / abs(a[i])
    return scale(factor, a), factor


def primitive(a: Sequence[Fraction]) -> RVector:
    """Positive multiple of ``a`` with coprime integer entries."""
    if is_zero(a):
        return tuple(Fraction(0) for _ in a)
    denominators = math.lcm(*(x.denominator for x in a))
    ints = [int(x * denominators) for x in a]
    divisor = math.gcd(*ints)
    return tuple(Fraction(x // divisor) for x in ints)


def matrix(rows: Iterable[Iterable[Number]]) -> Matrix:
    return tuple(vec(row) for row in rows)


def identity(n: int) -> Matrix:
    return tuple(unit(n, i) for i in range(n))


def zero_matrix(rows: int, cols: int) -> Matrix:
    return tuple(zeros(cols) for _ in range(rows))


def transpose(a: Matrix, cols: int = 0) -> Matrix:
    if not a:
        return zero_matrix(cols, 0)
    return tuple(tuple(row[j] for row in a) for j in range(len(a[0])))


def mat_vec(a: Matrix, x: Sequence[Fraction]) -> RVector:
    return tuple(dot(row, x) for row in a)


def selector(dim: int, coords: Sequence[int]) -> Matrix:
    """Matrix picking ``coords`` out of a vector of length ``dim``."""
    return tuple(unit(dim, c) for c in coords)


def rref(rows: Sequence[Sequence[Fraction]], width: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the first ``width`` columns; extra columns ride along."""
    work = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(width):
        pivot = next((i for i in range(r, len(work)) if work[i][c] != 0), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        p = work[r][c]
        work[r] = [x / p for x in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c] != 0:
                f = work[i][c]
                work[i] = [x - f * y for x, y in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
        if r == len(work):
            break
    return work[:r] + [w for w in work[r:] if any(x != 0 for x in w)], pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    if not rows:
        return 0
    return len(rref(rows, len(rows[0]))[1])

def inverse(a: Matrix) -> Matrix:
    n = len(a)
    augmented = [list(row) + list(unit(n, i)) for i, row in enumerate(a)]
    reduced, pivots = rref(augmented, n)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    return tuple(tuple(row[n:]) for row in reduced[:n])
