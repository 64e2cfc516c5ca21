"""Exact rational linear algebra.

Everything here works on :class:`fractions.Fraction` entries.  Elimination is
fraction-free: each row is scaled to integers first and the Bareiss update is
run on Python ints, which keeps intermediate entries bounded by minors of the
input instead of letting denominators explode.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

Rational = Fraction


class SingularMatrix(ValueError):
    pass


class CompletionImpossible(ValueError):
    pass


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions, decimal strings or ``"p/q"`` strings exactly.

    Floats are converted through their decimal repr, so ``0.3`` becomes 3/10
    rather than the binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


@dataclass(frozen=True)
class RatMatrix:
    """Immutable dense matrix of Fractions stored row-major."""

    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"expected {self.rows * self.cols} entries, got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence], cols: int | None = None) -> "RatMatrix":
        data = [tuple(as_fraction(v) for v in row) for row in rows]
        if cols is None:
            cols = len(data[0]) if data else 0
        for row in data:
            if len(row) != cols:
                raise ValueError("ragged rows")
        return cls(len(data), cols, tuple(v for row in data for v in row))

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls.from_rows(
            [[1 if i == j else 0 for j in range(n)] for i in range(n)], cols=n
        )

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def submatrix(self, row_indices: Iterable[int]) -> "RatMatrix":
        idx = list(row_indices)
        return RatMatrix(
            len(idx), self.cols, tuple(v for i in idx for v in self.row(i))
        )

    def matvec(self, x: Sequence[Fraction]) -> list[Fraction]:
        if len(x) != self.cols:
            raise ValueError("dimension mismatch")
        return [sum((a * b for a, b in zip(self.row(i), x) if a), Fraction(0))
                for i in range(self.rows)]

    def vecmat(self, y: Sequence[Fraction]) -> list[Fraction]:
        if len(y) != self.rows:
            raise ValueError("dimension mismatch")
        out = [Fraction(0)] * self.cols
        for i, yi in enumerate(y):
            if yi:
                for j, a in enumerate(self.row(i)):
                    if a:
                        out[j] += yi * a
        return out


def _integer_rows(rows: Iterable[Sequence[Fraction]]) -> list[list[int]]:
    """Scale every row by the lcm of its denominators (row space is unchanged)."""
    out = []
    for row in rows:
        den = 1
        for v in row:
            den = lcm(den, Fraction(v).denominator)
        out.append([int(Fraction(v) * den) for v in row])
    return out


def _bareiss_rank(mat: list[list[int]], ncols: int) -> tuple[int, list[int]]:
    """Fraction-free forward elimination in place.

    Returns the rank and the original indices of the rows used as pivots,
    in pivot order.  Rows are only swapped, never recombined across the pivot
    boundary, so the pivot-row indices identify an independent subset.
    """
    nrows = len(mat)
    order = list(range(nrows))
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if mat[i][c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            mat[r], mat[piv] = mat[piv], mat[r]
            order[r], order[piv] = order[piv], order[r]
        p = mat[r][c]
        prow = mat[r]
        for i in range(r + 1, nrows):
            row = mat[i]
            f = row[c]
            if f == 0:
                if p != prev:
                    mat[i] = [(p * a) // prev for a in row]
                continue
            mat[i] = [(p * a - f * b) // prev for a, b in zip(row, prow)]
        prev = p
        r += 1
    return r, order[:r]


def rank(M: RatMatrix | Sequence[Sequence]) -> int:
    """Rank over the rationals."""
    rows = M.to_rows() if isinstance(M, RatMatrix) else [list(r) for r in M]
    if not rows:
        return 0
    ncols = len(rows[0])
    r, _ = _bareiss_rank(_integer_rows(rows), ncols)
    return r


def rank_of_rows(M: RatMatrix, row_indices: Iterable[int]) -> int:
    idx = list(row_indices)
    if not idx:
        return 0
    return rank([M.row(i) for i in idx])


def independent_rows(rows: Sequence[Sequence]) -> list[int]:
    """Indices of a maximal independent subset, greedily preferring early rows."""
    chosen: list[int] = []
    echelon: list[tuple[int, list[Fraction]]] = []
    for i, row in enumerate(rows):
        v = [Fraction(a) for a in row]
        for pc, erow in echelon:
            if v[pc]:
                f = v[pc] / erow[pc]
                v = [a - f * b for a, b in zip(v, erow)]
        pc = next((j for j, a in enumerate(v) if a), None)
        if pc is not None:
            echelon.append((pc, v))
            chosen.append(i)
    return chosen


def complete_to_nonsingular(
    pool: RatMatrix, N: Iterable[int], order: Iterable[int] | None = None
) -> list[int]:
    """Extend the independent rows ``N`` of ``pool`` to ``pool.cols`` rows.

    Candidates are tried in ``order`` (default: increasing row index) and a
    row is kept whenever it raises the rank.  Returns ``N`` followed by the
    added indices.
    """
    N = list(N)
    n = pool.cols
    if rank_of_rows(pool, N) != len(N):
        raise ValueError("rows in N are linearly dependent")
    if len(N) == n:
        return N
    taken = set(N)
    candidates = [j for j in (range(pool.rows) if order is None else order)
                  if j not in taken]
    rows = [pool.row(i) for i in N] + [pool.row(j) for j in candidates]
    picked = independent_rows(rows)
    if len(picked) < n:
        raise CompletionImpossible(f"pool only reaches rank {len(picked)} < {n}")
    extra = [candidates[k - len(N)] for k in picked if k >= len(N)]
    return N + extra[: n - len(N)]


def solve_square(M: RatMatrix, rhs: Sequence) -> list[Fraction]:
    """Exact solution of ``M x = rhs`` by fraction-free elimination."""
    if M.rows != M.cols:
        raise ValueError("matrix is not square")
    n = M.rows
    b = [as_fraction(v) for v in rhs]
    if len(b) != n:
        raise ValueError("dimension mismatch")
    aug = _integer_rows([list(M.row(i)) + [b[i]] for i in range(n)])
    prev = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if piv is None:
            raise SingularMatrix("matrix is singular")
        if piv != c:
            aug[c], aug[piv] = aug[piv], aug[c]
        p = aug[c][c]
        prow = aug[c]
        for i in range(c + 1, n):
            row = aug[i]
            f = row[c]
            aug[i] = [(p * a - f * bb) // prev for a, bb in zip(row, prow)]
        prev = p
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        s = Fraction(aug[i][n])
        for j in range(i + 1, n):
            if aug[i][j]:
                s -= aug[i][j] * x[j]
        x[i] = s / aug[i][i]
    return x


def determinant(M: RatMatrix) -> Fraction:
    if M.rows != M.cols:
        raise ValueError("matrix is not square")
    n = M.rows
    if n == 0:
        return Fraction(1)
    scale = Fraction(1)
    rows = []
    for i in range(n):
        den = 1
        for v in M.row(i):
            den = lcm(den, v.denominator)
        scale /= den
        rows.append([int(v * den) for v in M.row(i)])
    sign = 1
    prev = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if rows[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            rows[c], rows[piv] = rows[piv], rows[c]
            sign = -sign
        p = rows[c][c]
        for i in range(c + 1, n):
            f = rows[i][c]
            rows[i] = [(p * a - f * b) // prev for a, b in zip(rows[i], rows[c])]
        prev = p
    return sign * rows[n - 1][n - 1] * scale
