"""Integer and rational lattices given by row bases.

Row-style Hermite normal form is the canonical representative everywhere:
rows are in echelon form, pivots are positive and the entries above each pivot
lie in ``[0, pivot)``. Rational lattices are scaled by the lcm of their
denominators, put into HNF over Z and scaled back.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

IntMatrix = list[list[int]]
RatRow = tuple[Fraction, ...]
RatMatrix = tuple[RatRow, ...]


def _echelon(rows: Sequence[Sequence[int]], ncols: int) -> tuple[IntMatrix, IntMatrix]:
    """Unimodular row reduction on the first ``ncols`` columns.

    Returns ``(pivot_rows, rest)``; the rows of ``rest`` vanish on those
    columns and span, together with ``pivot_rows``, the same module.
    """
    work = [list(row) for row in rows]
    r = 0
    for col in range(ncols):
        while True:
            candidates = [i for i in range(r, len(work)) if work[i][col] != 0]
            if not candidates:
                break
            best = min(candidates, key=lambda i: abs(work[i][col]))
            work[r], work[best] = work[best], work[r]
            if work[r][col] < 0:
                work[r] = [-x for x in work[r]]
            pivot = work[r][col]
            clean = True
            for i in range(r + 1, len(work)):
                if work[i][col]:
                    k = work[i][col] // pivot
                    work[i] = [a - k * b for a, b in zip(work[i], work[r])]
                    if work[i][col]:
                        clean = False
            if clean:
                break
        if r < len(work) and work[r][col] != 0:
            pivot = work[r][col]
            for i in range(r):
                k = work[i][col] // pivot
                if k:
                    work[i] = [a - k * b for a, b in zip(work[i], work[r])]
            r += 1
    return work[:r], work[r:]


def hnf(rows: Sequence[Sequence[int]]) -> IntMatrix:
    """Hermite normal form of the Z-span of ``rows`` (zero rows dropped)."""
    rows = [list(row) for row in rows if any(row)]
    if not rows:
        return []
    pivots, _ = _echelon(rows, len(rows[0]))
    return pivots


def kernel(rows: Sequence[Sequence[int]]) -> IntMatrix:
    """Basis (in HNF) of ``{x in Z^k : sum_i x_i * rows[i] = 0}``."""
    k = len(rows)
    if k == 0:
        return []
    ncols = len(rows[0])
    augmented = [list(row) + [1 if j == i else 0 for j in range(k)] for i, row in enumerate(rows)]
    _, rest = _echelon(augmented, ncols)
    return hnf([row[ncols:] for row in rest])


def intersect(basis1: Sequence[Sequence[int]], basis2: Sequence[Sequence[int]]) -> IntMatrix:
    if not basis1 or not basis2:
        return []
    n = len(basis1[0])
    augmented = [list(row) + list(row) for row in basis1]
    augmented += [list(row) + [0] * n for row in basis2]
    _, rest = _echelon(augmented, n)
    return hnf([row[n:] for row in rest])


# ---------------------------------------------------------------------------
# Rational lattices
# ---------------------------------------------------------------------------
def _common_denominator(rows: Sequence[Sequence[Fraction | int]]) -> int:
    den = 1
    for row in rows:
        for x in row:
            den = math.lcm(den, Fraction(x).denominator)
    return den


def _scale_to_int(rows: Sequence[Sequence[Fraction | int]], den: int) -> IntMatrix:
    return [[int(Fraction(x) * den) for x in row] for row in rows]


def _scale_back(rows: IntMatrix, den: int) -> RatMatrix:
    return tuple(tuple(Fraction(x, den) for x in row) for row in rows)


def rational_hnf(rows: Sequence[Sequence[Fraction | int]]) -> RatMatrix:
    rows = [row for row in rows if any(row)]
    if not rows:
        return ()
    den = _common_denominator(rows)
    return _scale_back(hnf(_scale_to_int(rows, den)), den)


def rational_intersect(
    basis1: Sequence[Sequence[Fraction | int]], basis2: Sequence[Sequence[Fraction | int]]
) -> RatMatrix:
    den = _common_denominator(list(basis1) + list(basis2))
    return _scale_back(intersect(_scale_to_int(basis1, den), _scale_to_int(basis2, den)), den)


def rational_kernel(rows: Sequence[Sequence[Fraction | int]]) -> IntMatrix:
    """Integer relations between rational row vectors."""
    if not rows:
        return []
    den = _common_denominator(rows)
    return kernel(_scale_to_int(rows, den))


# ---------------------------------------------------------------------------
# Exact linear algebra over Q
# ---------------------------------------------------------------------------
def determinant(matrix: Sequence[Sequence[Fraction | int]]) -> Fraction:
    work = [[Fraction(x) for x in row] for row in matrix]
    n = len(work)
    det = Fraction(1)
    for col in range(n):
        pivot = next((i for i in range(col, n) if work[i][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            work[col], work[pivot] = work[pivot], work[col]
            det = -det
        det *= work[col][col]
        for i in range(col + 1, n):
            if work[i][col]:
                factor = work[i][col] / work[col][col]
                work[i] = [a - factor * b for a, b in zip(work[i], work[col])]
    return det


def solve(matrix: Sequence[Sequence[Fraction | int]], rhs: Sequence[Fraction | int]) -> list[Fraction] | None:
    """Solve ``matrix @ x = rhs`` for square ``matrix``; ``None`` when singular."""
    n = len(matrix)
    work = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if work[i][col] != 0), None)
        if pivot is None:
            return None
        work[col], work[pivot] = work[pivot], work[col]
        inv = 1 / work[col][col]
        work[col] = [x * inv for x in work[col]]
        for i in range(n):
            if i != col and work[i][col]:
                factor = work[i][col]
                work[i] = [a - factor * b for a, b in zip(work[i], work[col])]
    return [row[n] for row in work]


def coordinates(basis: Sequence[Sequence[Fraction | int]], vector: Sequence[Fraction | int]) -> list[Fraction] | None:
    """Coordinates ``c`` with ``sum_i c_i * basis[i] == vector`` (square basis)."""
    transposed = [[basis[i][j] for i in range(len(basis))] for j in range(len(basis[0]))]
    return solve(transposed, vector)


def in_lattice(basis: Sequence[Sequence[Fraction | int]], vector: Sequence[Fraction | int]) -> bool:
    """Membership for lattices in echelon form of any rank."""
    remainder = [Fraction(x) for x in vector]
    for row in basis:
        col = next(j for j, x in enumerate(row) if x != 0)
        k = remainder[col] / Fraction(row[col])
        if k.denominator != 1:
            return False
        remainder = [a - k * Fraction(b) for a, b in zip(remainder, row)]
    return not any(remainder)


def index(sub: Sequence[Sequence[Fraction | int]], sup: Sequence[Sequence[Fraction | int]]) -> Fraction:
    """``[sup : sub]`` for full-rank square bases."""
    return abs(determinant(sub) / determinant(sup))
