"""Exact bounded-variable primal simplex.

Rows are scaled to integers so that the basis inverse can be carried as an
integer adjugate ``adj`` together with a positive determinant ``det``
(``B^-1 = adj / det``).  A pivot then is a single fraction-free update with
exact integer division.  Values, ratios and reduced costs are compared
exactly; floating point never decides anything.

For large programs an optional HiGHS run supplies a starting basis.  That
basis is re-factored exactly, checked, and the exact primal simplex takes
over from it (or from scratch when the guess is unusable).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Sequence

from .ratlin import RatMatrix, SingularMatrix, as_fraction, solve_square

log = logging.getLogger(__name__)

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"
AT_LOWER, AT_UPPER, FREE_ZERO = "L", "U", "F"

STALL_LIMIT = 50
PIVOT_CAP = 200_000
WARM_START_SIZE = 500


@dataclass(frozen=True)
class LinearProgram:
    """``min/max c x`` s.t. sparse rows ``a_i x (>=|<=|=) b_i``, ``l <= x <= u``.

    Bounds use ``None`` for infinity.
    """

    rows: tuple[tuple[tuple[int, Fraction], ...], ...]
    senses: tuple[str, ...]
    rhs: tuple[Fraction, ...]
    c: tuple[Fraction, ...]
    lower: tuple[Fraction | None, ...]
    upper: tuple[Fraction | None, ...]
    sense: str = "min"

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def m(self) -> int:
        return len(self.rows)

    def with_bounds(self, lower=None, upper=None) -> "LinearProgram":
        return LinearProgram(
            self.rows, self.senses, self.rhs, self.c,
            self.lower if lower is None else tuple(lower),
            self.upper if upper is None else tuple(upper),
            self.sense,
        )

    def row_activity(self, i: int, x: Sequence[Fraction]) -> Fraction:
        return sum((a * x[j] for j, a in self.rows[i]), Fraction(0))

    def is_feasible(self, x: Sequence[Fraction]) -> bool:
        for j, v in enumerate(x):
            if self.lower[j] is not None and v < self.lower[j]:
                return False
            if self.upper[j] is not None and v > self.upper[j]:
                return False
        for i, sense in enumerate(self.senses):
            act = self.row_activity(i, x)
            if sense == ">=" and act < self.rhs[i]:
                return False
            if sense == "<=" and act > self.rhs[i]:
                return False
            if sense == "=" and act != self.rhs[i]:
                return False
        return True


class LpBuilder:
    """Incremental construction of a :class:`LinearProgram`."""

    def __init__(self, sense: str = "min"):
        self.sense = sense
        self.c: list[Fraction] = []
        self.lower: list[Fraction | None] = []
        self.upper: list[Fraction | None] = []
        self.rows: list[tuple[tuple[int, Fraction], ...]] = []
        self.senses: list[str] = []
        self.rhs: list[Fraction] = []

    def add_var(self, lower=0, upper=None, obj=0) -> int:
        self.c.append(as_fraction(obj))
        self.lower.append(None if lower is None else as_fraction(lower))
        self.upper.append(None if upper is None else as_fraction(upper))
        return len(self.c) - 1

    def add_vars(self, count: int, lower=0, upper=None, obj=0) -> list[int]:
        return [self.add_var(lower, upper, obj) for _ in range(count)]

    def add_row(self, coeffs, sense: str, rhs) -> int:
        if sense not in (">=", "<=", "="):
            raise ValueError(f"bad sense {sense!r}")
        merged: dict[int, Fraction] = {}
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        for j, a in items:
            a = as_fraction(a)
            if a:
                merged[j] = merged.get(j, Fraction(0)) + a
        self.rows.append(tuple(sorted((j, a) for j, a in merged.items() if a)))
        self.senses.append(sense)
        self.rhs.append(as_fraction(rhs))
        return len(self.rows) - 1

    def build(self) -> LinearProgram:
        return LinearProgram(
            tuple(self.rows), tuple(self.senses), tuple(self.rhs), tuple(self.c),
            tuple(self.lower), tuple(self.upper), self.sense,
        )


@dataclass(frozen=True)
class Basis:
    """Final basis over structural columns ``0..n-1`` and row logicals.

    The logical of row ``i`` has index ``n + i``; it is the surplus
    ``a_i x - b_i`` of a ``>=`` row, the slack of a ``<=`` row, and is fixed at
    zero for an equality row.  ``at_upper`` lists nonbasic columns sitting at
    their upper bound.
    """

    n: int
    basic: tuple[int, ...]
    nonbasic: tuple[int, ...]
    at_upper: frozenset[int] = frozenset()

    @property
    def tight_rows(self) -> tuple[int, ...]:
        """Rows whose logical is nonbasic."""
        return tuple(j - self.n for j in self.nonbasic if j >= self.n)

    @property
    def nonbasic_structurals(self) -> tuple[int, ...]:
        return tuple(j for j in self.nonbasic if j < self.n)


@dataclass
class LpSolution:
    status: str
    x: list[Fraction] | None = None
    objective: Fraction | None = None
    basis: Basis | None = None
    duals: list[Fraction] | None = None
    reduced_costs: list[Fraction] | None = None
    ray: list[Fraction] | None = None
    pivots: int = 0
    warm_started: bool = False


class PivotCapExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Core solver


class _Simplex:
    """Working state: integer data, adjugate basis inverse, exact values."""

    def __init__(self, lp: LinearProgram, pivot_cap: int):
        self.lp = lp
        self.pivot_cap = pivot_cap
        n, m = lp.n, lp.m
        self.n, self.m = n, m
        self.row_scale: list[int] = []
        self.b: list[int] = []
        # columns as sparse lists of (row, int coefficient)
        cols: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for i, row in enumerate(lp.rows):
            den = lp.rhs[i].denominator
            for _, a in row:
                den = lcm(den, a.denominator)
            self.row_scale.append(den)
            self.b.append(int(lp.rhs[i] * den))
            for j, a in row:
                cols[j].append((i, int(a * den)))
        sign = 1 if lp.sense == "min" else -1
        den = 1
        for v in lp.c:
            den = lcm(den, v.denominator)
        self.obj_scale = den
        cost = [int(sign * v * den) for v in lp.c]
        self.lower = list(lp.lower)
        self.upper = list(lp.upper)
        for i, sense in enumerate(lp.senses):
            coef = 1 if sense == "<=" else -1
            cols.append([(i, coef)])
            cost.append(0)
            self.lower.append(Fraction(0))
            self.upper.append(Fraction(0) if sense == "=" else None)
        self.cols = cols
        self.cost2 = cost           # phase-2 costs (integers)
        self.n_real = n + m          # columns excluding artificials
        self.pivots = 0

    # -- helpers -------------------------------------------------------------

    def nonbasic_value(self, j: int) -> Fraction:
        st = self.status[j]
        if st == AT_LOWER:
            return self.lower[j]
        if st == AT_UPPER:
            return self.upper[j]
        return Fraction(0)

    def col_times_adj(self, j: int) -> list[int]:
        """``adj @ a_j`` (so ``B^-1 a_j = result / det``)."""
        out = [0] * self.m
        adj = self.adj
        for r, a in self.cols[j]:
            if a == 1:
                for i in range(self.m):
                    v = adj[i][r]
                    if v:
                        out[i] += v
            elif a == -1:
                for i in range(self.m):
                    v = adj[i][r]
                    if v:
                        out[i] -= v
            else:
                for i in range(self.m):
                    v = adj[i][r]
                    if v:
                        out[i] += v * a
        return out

    def recompute_values(self):
        rhs = [Fraction(v) for v in self.b]
        for j in range(len(self.cols)):
            if self.pos[j] < 0:
                v = self.nonbasic_value(j)
                if v:
                    for r, a in self.cols[j]:
                        rhs[r] -= a * v
        self.xB = [
            sum((Fraction(self.adj[i][k]) * rhs[k] for k in range(self.m) if self.adj[i][k] and rhs[k]),
                Fraction(0)) / self.det
            for i in range(self.m)
        ]

    def factor(self, basic: list[int]):
        """Exact adjugate/determinant of the basis matrix; raises if singular."""
        m = self.m
        B = [[0] * m for _ in range(m)]
        for k, j in enumerate(basic):
            for r, a in self.cols[j]:
                B[r][k] = a
        adj, det = _adjugate(B)
        if det == 0:
            raise SingularMatrix("basis is singular")
        if det < 0:
            adj = [[-v for v in row] for row in adj]
            det = -det
        self.adj, self.det = adj, det
        self.basic = list(basic)
        self.pos = [-1] * len(self.cols)
        for k, j in enumerate(basic):
            self.pos[j] = k

    def duals_num(self, cost: list[int]) -> list[int]:
        """``c_B @ adj`` (so ``y = result / det``)."""
        y = [0] * self.m
        for k, j in enumerate(self.basic):
            cb = cost[j]
            if cb:
                row = self.adj[k]
                for i in range(self.m):
                    if row[i]:
                        y[i] += cb * row[i]
        return y

    def reduced_num(self, cost: list[int], y: list[int], j: int) -> int:
        return cost[j] * self.det - sum(y[r] * a for r, a in self.cols[j])

    # -- pivoting ------------------------------------------------------------

    def pivot(self, q: int, r: int, d: list[int]):
        """Bring column ``q`` in at basis position ``r``; ``d = adj a_q``."""
        p = d[r]
        det = self.det
        adj = self.adj
        prow = adj[r]
        if p < 0:
            p_abs, s = -p, -1
        else:
            p_abs, s = p, 1
        for i in range(self.m):
            if i == r:
                continue
            di = d[i]
            row = adj[i]
            if di == 0:
                adj[i] = [(v * p_abs) // det for v in row]
            else:
                adj[i] = [(v * p_abs - s * di * w) // det for v, w in zip(row, prow)]
        adj[r] = [s * w for w in prow]
        self.det = p_abs
        leaving = self.basic[r]
        self.pos[leaving] = -1
        self.basic[r] = q
        self.pos[q] = r
        self.pivots += 1
        if self.pivots > self.pivot_cap:
            raise PivotCapExceeded(f"more than {self.pivot_cap} pivots")
        return leaving

    def run(self, cost: list[int], allowed: int) -> tuple[str, int | None, int]:
        """Primal simplex on columns ``< allowed``; returns (status, q, dir)."""
        stall = 0
        bland = False
        while True:
            y = self.duals_num(cost)
            best = None
            best_score = 0
            for j in range(allowed):
                if self.pos[j] >= 0:
                    continue
                lo, up = self.lower[j], self.upper[j]
                if lo is not None and up is not None and lo == up:
                    continue
                dj = self.reduced_num(cost, y, j)
                if dj == 0:
                    continue
                st = self.status[j]
                if dj < 0 and (st in (AT_LOWER, FREE_ZERO)) and up != self.nonbasic_value(j):
                    direction = 1
                elif dj > 0 and (st in (AT_UPPER, FREE_ZERO)) and lo != self.nonbasic_value(j):
                    direction = -1
                else:
                    continue
                if bland:
                    best = (j, direction)
                    break
                score = abs(dj)
                if score > best_score:
                    best, best_score = (j, direction), score
            if best is None:
                return OPTIMAL, None, 0
            q, direction = best
            d = self.col_times_adj(q)
            # ratio test; x_B changes by -direction * t * d / det
            t_best: Fraction | None = None
            leave = None
            for i in range(self.m):
                di = d[i] * direction
                if di == 0:
                    continue
                j = self.basic[i]
                if di > 0:
                    bound = self.lower[j]
                    if bound is None:
                        continue
                    t = (self.xB[i] - bound) * self.det / di
                else:
                    bound = self.upper[j]
                    if bound is None:
                        continue
                    t = (bound - self.xB[i]) * self.det / -di
                if t_best is None or t < t_best or (t == t_best and j < self.basic[leave]):
                    t_best, leave = t, i
            span = None
            if self.lower[q] is not None and self.upper[q] is not None:
                span = self.upper[q] - self.lower[q]
            if span is not None and (t_best is None or span < t_best or
                                     (span == t_best and q < self.basic[leave])):
                # bound flip, no basis change
                for i in range(self.m):
                    if d[i]:
                        self.xB[i] -= direction * span * d[i] / self.det
                self.status[q] = AT_UPPER if direction > 0 else AT_LOWER
                self.pivots += 1
                stall = 0
                continue
            if t_best is None:
                return UNBOUNDED, q, direction
            start = self.nonbasic_value(q)
            for i in range(self.m):
                if d[i]:
                    self.xB[i] -= direction * t_best * d[i] / self.det
            entering_value = start + direction * t_best
            leaving_value = self.xB[leave]
            old = self.pivot(q, leave, d)
            lo, up = self.lower[old], self.upper[old]
            if lo is not None and leaving_value == lo:
                self.status[old] = AT_LOWER
            elif up is not None and leaving_value == up:
                self.status[old] = AT_UPPER
            else:  # free variable leaving (cannot happen for bounded ones)
                self.status[old] = FREE_ZERO
            self.status[q] = None
            self.xB[leave] = entering_value
            if self.status[old] == FREE_ZERO and leaving_value != 0:
                self.recompute_values()
            if t_best == 0:
                stall += 1
                if stall > STALL_LIMIT:
                    bland = True
            else:
                stall = 0


def _adjugate(B: list[list[int]]) -> tuple[list[list[int]], int]:
    """Integer adjugate and determinant of a square integer matrix."""
    m = len(B)
    if m == 0:
        return [], 1
    try:
        import flint
    except ImportError:  # pragma: no cover
        flint = None
    if flint is not None and m > 12:
        M = flint.fmpz_mat(B)
        det = int(M.det())
        if det == 0:
            return [], 0
        inv = M.inv()  # fmpq_mat
        adj = [[int(inv[i, j] * det) for j in range(m)] for i in range(m)]
        return adj, det
    # Bareiss on [B | I]: after full Gauss-Jordan the right block is adj*sign
    aug = [list(B[i]) + [1 if i == j else 0 for j in range(m)] for i in range(m)]
    prev = 1
    sign = 1
    for c in range(m):
        piv = next((i for i in range(c, m) if aug[i][c] != 0), None)
        if piv is None:
            return [], 0
        if piv != c:
            aug[c], aug[piv] = aug[piv], aug[c]
            sign = -sign
        p = aug[c][c]
        prow = aug[c]
        for i in range(m):
            if i == c:
                continue
            f = aug[i][c]
            aug[i] = [(p * a - f * b) // prev for a, b in zip(aug[i], prow)]
        prev = p
    det = aug[0][0]  # every diagonal entry equals the determinant up to sign
    adj = [row[m:] for row in aug]
    if sign < 0:
        det = -det
        adj = [[-v for v in row] for row in adj]
    return adj, det


def _initial_status(lower, upper) -> str:
    if lower is not None:
        return AT_LOWER
    if upper is not None:
        return AT_UPPER
    return FREE_ZERO


# ---------------------------------------------------------------------------
# Warm start


def _highs_guess(lp: LinearProgram) -> tuple[list[int], dict[int, str]] | None:
    """Ask HiGHS for an optimal basis; returns (basic columns, nonbasic status)."""
    try:
        import highspy
        import numpy as np
    except ImportError:  # pragma: no cover
        return None
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("threads", 1)
    h.setOptionValue("random_seed", 0)
    h.setOptionValue("solver", "simplex")
    inf = highspy.kHighsInf
    sign = 1 if lp.sense == "min" else -1
    n = lp.n
    h.addVars(n, np.array([-inf if v is None else float(v) for v in lp.lower]),
              np.array([inf if v is None else float(v) for v in lp.upper]))
    h.changeColsCost(n, np.arange(n, dtype=np.int32),
                     np.array([sign * float(v) for v in lp.c]))
    for i, row in enumerate(lp.rows):
        b = float(lp.rhs[i])
        lo = b if lp.senses[i] in (">=", "=") else -inf
        up = b if lp.senses[i] in ("<=", "=") else inf
        idx = np.array([j for j, _ in row], dtype=np.int32)
        val = np.array([float(a) for _, a in row])
        h.addRow(lo, up, len(idx), idx, val)
    h.run()
    if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        return None
    basis = h.getBasis()
    BS = highspy.HighsBasisStatus
    basic: list[int] = []
    status: dict[int, str] = {}
    for j, st in enumerate(basis.col_status):
        if st == BS.kBasic:
            basic.append(j)
        elif st == BS.kUpper:
            status[j] = AT_UPPER
        elif st == BS.kZero:
            status[j] = FREE_ZERO
        else:
            status[j] = AT_LOWER
    for i, st in enumerate(basis.row_status):
        if st == BS.kBasic:
            basic.append(n + i)
        else:
            status[n + i] = AT_LOWER
    return basic, status


# ---------------------------------------------------------------------------
# Public entry point


def solve_lp(
    lp: LinearProgram,
    *,
    warm_start: str | bool = "auto",
    pivot_cap: int = PIVOT_CAP,
    basic_free: bool = True,
) -> LpSolution:
    """Solve ``lp`` exactly.

    ``warm_start`` is ``"auto"`` (HiGHS guess for programs with more than
    ``WARM_START_SIZE`` nonzeros-plus-rows), ``True`` or ``False``.  With
    ``basic_free`` the final basis holds every free structural column that
    can be made basic through a degenerate pivot.
    """
    S = _Simplex(lp, pivot_cap)
    n, m = S.n, S.m
    warm = False
    size = sum(len(r) for r in lp.rows) + m
    use_guess = warm_start is True or (warm_start == "auto" and size > WARM_START_SIZE)
    if use_guess and m:
        guess = _highs_guess(lp)
        if guess is not None and len(guess[0]) == m:
            basic, st = guess
            S.status = [st.get(j) for j in range(n + m)]
            for j in range(n + m):
                if S.status[j] is None and j not in basic:
                    S.status[j] = _initial_status(S.lower[j], S.upper[j])
                if S.status[j] == AT_UPPER and S.upper[j] is None:
                    S.status[j] = _initial_status(S.lower[j], S.upper[j])
                if S.status[j] == AT_LOWER and S.lower[j] is None:
                    S.status[j] = _initial_status(S.lower[j], S.upper[j])
            try:
                S.factor(basic)
                for j in basic:
                    S.status[j] = None
                S.recompute_values()
                warm = all(_within(S, i) for i in range(m))
            except SingularMatrix:
                warm = False
            if not warm:
                log.debug("warm start rejected, falling back to a cold start")
    if not warm:
        status = _cold_phase_one(S)
        if status is not None:
            return status
    else:
        S.cost = S.cost2
    result, q, direction = S.run(S.cost2 + [0] * (len(S.cols) - S.n_real), S.n_real)
    if result == UNBOUNDED:
        ray = [Fraction(0)] * n
        d = S.col_times_adj(q)
        if q < n:
            ray[q] = Fraction(direction)
        for i, j in enumerate(S.basic):
            if j < n:
                ray[j] = Fraction(-direction * d[i], S.det)
        return LpSolution(UNBOUNDED, ray=ray, pivots=S.pivots, warm_started=warm)
    if basic_free:
        _pivot_in_free(S)
    return _finish(S, warm)


def _within(S: _Simplex, i: int) -> bool:
    j = S.basic[i]
    v = S.xB[i]
    lo, up = S.lower[j], S.upper[j]
    return (lo is None or v >= lo) and (up is None or v <= up)


def _cold_phase_one(S: _Simplex) -> LpSolution | None:
    """Crash basis of logicals plus artificials; minimise artificial sum."""
    n, m = S.n, S.m
    S.status = [_initial_status(S.lower[j], S.upper[j]) for j in range(n + m)]
    resid = [Fraction(v) for v in S.b]
    for j in range(n):
        v = S.nonbasic_value(j)
        if v:
            for r, a in S.cols[j]:
                resid[r] -= a * v
    basic = []
    art_rows = []
    for i in range(m):
        lj = n + i
        coef = S.cols[lj][0][1]
        val = resid[i] / coef
        if S.lower[lj] <= val and (S.upper[lj] is None or val <= S.upper[lj]):
            basic.append(lj)
        else:
            sgn = 1 if resid[i] >= 0 else -1
            S.cols.append([(i, sgn)])
            S.lower.append(Fraction(0))
            S.upper.append(None)
            S.status.append(AT_LOWER)
            S.cost2.append(0)
            basic.append(len(S.cols) - 1)
            art_rows.append(i)
    S.factor(basic)
    for j in basic:
        S.status[j] = None
    S.recompute_values()
    if art_rows:
        cost1 = [0] * S.n_real + [1] * (len(S.cols) - S.n_real)
        S.run(cost1, len(S.cols))
        infeas = sum((S.xB[i] for i, j in enumerate(S.basic) if j >= S.n_real), Fraction(0))
        if infeas > 0:
            y = S.duals_num(cost1)
            farkas = [Fraction(y[i] * S.row_scale[i], S.det) for i in range(m)]
            return LpSolution(INFEASIBLE, ray=farkas, pivots=S.pivots)
        # fix artificials at zero and drive the basic ones out
        for j in range(S.n_real, len(S.cols)):
            S.upper[j] = Fraction(0)
            if S.pos[j] < 0:
                S.status[j] = AT_LOWER
        for r in range(m):
            j = S.basic[r]
            if j < S.n_real:
                continue
            row = S.adj[r]
            for q in range(S.n_real):
                if S.pos[q] >= 0:
                    continue
                dq = sum(row[k] * a for k, a in S.cols[q])
                if dq:
                    d = S.col_times_adj(q)
                    value = S.nonbasic_value(q)
                    S.pivot(q, r, d)
                    S.status[q] = None
                    S.status[j] = AT_LOWER
                    S.xB[r] = value
                    break
    return None


def _pivot_in_free(S: _Simplex):
    """Degenerate pivots making nonbasic free structurals basic."""
    for q in range(S.n):
        if S.pos[q] >= 0 or S.lower[q] is not None or S.upper[q] is not None:
            continue
        if S.nonbasic_value(q) != 0:
            continue
        d = S.col_times_adj(q)
        for r in range(S.m):
            j = S.basic[r]
            if d[r] and not (j < S.n and S.lower[j] is None and S.upper[j] is None):
                value = S.xB[r]
                lo, up = S.lower[j], S.upper[j]
                if lo is not None and value == lo:
                    new_status = AT_LOWER
                elif up is not None and value == up:
                    new_status = AT_UPPER
                else:
                    continue
                S.pivot(q, r, d)
                S.status[q] = None
                S.status[j] = new_status
                S.xB[r] = Fraction(0)
                break


def _finish(S: _Simplex, warm: bool) -> LpSolution:
    lp = S.lp
    n, m = S.n, S.m
    full = [S.nonbasic_value(j) if S.pos[j] < 0 else S.xB[S.pos[j]] for j in range(S.n_real)]
    x = full[:n]
    objective = sum((c * v for c, v in zip(lp.c, x)), Fraction(0))
    y = S.duals_num(S.cost2)
    sign = 1 if lp.sense == "min" else -1
    scale = Fraction(sign, S.obj_scale * S.det)
    duals = [y[i] * S.row_scale[i] * scale for i in range(m)]
    reduced = [S.reduced_num(S.cost2, y, j) * scale for j in range(n)]
    artificial_basic = [j for j in S.basic if j >= S.n_real]
    basic = tuple(sorted(j for j in S.basic if j < S.n_real))
    nonbasic = tuple(j for j in range(S.n_real) if S.pos[j] < 0)
    at_upper = frozenset(j for j in nonbasic if S.status[j] == AT_UPPER)
    if artificial_basic:
        log.debug("redundant rows keep %d artificials basic", len(artificial_basic))
    basis = Basis(n, basic, nonbasic, at_upper)
    return LpSolution(OPTIMAL, x, objective, basis, duals, reduced, None, S.pivots, warm)


# ---------------------------------------------------------------------------
# LP relaxation helpers


def lp_relaxation(sf, c: Sequence, sense: str = "min") -> LinearProgram:
    """``min/max c x`` over ``Ãx ≥ b̃`` with free ``x``."""
    b = LpBuilder(sense)
    for j in range(sf.n):
        b.add_var(None, None, c[j])
    for i in range(sf.q):
        b.add_row([(j, a) for j, a in enumerate(sf.A_tilde.row(i)) if a], ">=", sf.b_tilde[i])
    return b.build()


def solve_relaxation(sf, c: Sequence, sense: str = "min", **kw) -> LpSolution:
    return solve_lp(lp_relaxation(sf, c, sense), **kw)


def fractional_binaries(sol, model) -> list[int]:
    """Binary indices strictly between 0 and 1.

    ``sol`` is an :class:`LpSolution` or a point; ``model`` is a model or an
    iterable of binary indices.
    """
    x = sol.x if isinstance(sol, LpSolution) else sol
    binaries = getattr(model, "binaries", model)
    return [j for j in binaries if 0 < x[j] < 1]


@dataclass(frozen=True)
class Cone:
    """Apex ``x(J) = Ã_J^-1 b̃_J`` and x-space rays ``r^j`` (columns of ``Ã_J^-1``)."""

    J: tuple[int, ...]
    apex: tuple[Fraction, ...]
    rays: dict = field(hash=False)

    def point(self, steps: dict) -> list[Fraction]:
        x = list(self.apex)
        for j, lam in steps.items():
            x = [a + lam * r for a, r in zip(x, self.rays[j])]
        return x


class SingularBasis(ValueError):
    pass


def inverse(M: RatMatrix) -> list[list[Fraction]]:
    """Exact inverse via the integer adjugate."""
    dens = []
    B = []
    for i in range(M.rows):
        den = 1
        for v in M.row(i):
            den = lcm(den, v.denominator)
        dens.append(den)
        B.append([int(v * den) for v in M.row(i)])
    adj, det = _adjugate(B)
    if det == 0:
        raise SingularMatrix("matrix is singular")
    # (D M)^-1 = adj/det  =>  M^-1 = (adj/det) D
    return [[Fraction(adj[i][k] * dens[k], det) for k in range(M.rows)] for i in range(M.rows)]


def cone_at_basis(sf, J) -> Cone:
    """LP cone of the cobasis ``J`` (row indices of ``Ã``, or a :class:`Basis`)."""
    if isinstance(J, Basis):
        J = J.tight_rows
    J = tuple(J)
    if len(J) != sf.n:
        raise SingularBasis(f"cobasis has {len(J)} rows, need {sf.n}")
    AJ = sf.A_tilde.submatrix(J)
    try:
        inv = inverse(AJ)
    except SingularMatrix as exc:
        raise SingularBasis("rows of the cobasis are dependent") from exc
    bJ = [sf.b_tilde[i] for i in J]
    apex = tuple(sum((inv[r][k] * bJ[k] for k in range(sf.n)), Fraction(0)) for r in range(sf.n))
    rays = {j: tuple(inv[r][k] for r in range(sf.n)) for k, j in enumerate(J)}
    return Cone(J, apex, rays)


def apex_of(sf, J) -> list[Fraction]:
    return solve_square(sf.A_tilde.submatrix(J), [sf.b_tilde[i] for i in J])
