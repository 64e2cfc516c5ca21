"""Cut generating LP, basic-solution regularity and split detection."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, TextIO

from .disjunction import Disjunction
from .instance import SchemaError, StandardForm
from .ratlin import as_fraction, rank_of_rows
from .simplex import OPTIMAL, LinearProgram, LpBuilder, solve_lp


class DimensionMismatch(ValueError):
    pass


class MissingLabels(ValueError):
    pass


@dataclass(frozen=True)
class Cut:
    """``alpha x >= beta``."""

    alpha: tuple[Fraction, ...]
    beta: Fraction

    def __post_init__(self):
        if not any(self.alpha) and not self.beta:
            raise ValueError("the zero inequality is not a cut")

    def value(self, x: Sequence[Fraction]) -> Fraction:
        """``alpha x - beta`` (negative means violated)."""
        return sum((a * v for a, v in zip(self.alpha, x)), Fraction(0)) - self.beta


@dataclass
class CglpSolution:
    alpha: list[Fraction]
    beta: Fraction
    u: list[list[Fraction]]
    v: list[list[Fraction]]
    objective: Fraction | None = None
    is_basic: bool = True
    term_v_sums: list[Fraction] = field(default_factory=list)

    def __post_init__(self):
        if not self.term_v_sums:
            self.term_v_sums = [sum(vt, Fraction(0)) for vt in self.v]

    @property
    def cut(self) -> Cut:
        return Cut(tuple(self.alpha), self.beta)

    @property
    def zero_terms(self) -> list[int]:
        """Terms with ``Σ v^t = 0``; such cuts are implied by the relaxation."""
        return [t for t, s in enumerate(self.term_v_sums) if s == 0]

    @property
    def flagged(self) -> bool:
        return bool(self.zero_terms)

    def check_feasible(self, sf: StandardForm, d: Disjunction) -> bool:
        """Exact check of the multiplier equations, signs and normalisation."""
        total = Fraction(0)
        for t, term in enumerate(d.terms):
            ut, vt = self.u[t], self.v[t]
            if any(x < 0 for x in ut) or any(x < 0 for x in vt):
                return False
            total += sum(ut) + sum(vt)
            lhs = [a + b for a, b in zip(sf.A_tilde.vecmat(ut), term.D.vecmat(vt))]
            if lhs != list(self.alpha):
                return False
            rhs = sum((a * b for a, b in zip(ut, sf.b_tilde)), Fraction(0)) + \
                sum((a * b for a, b in zip(vt, term.d)), Fraction(0))
            if rhs != self.beta:
                return False
        return total == 1


@dataclass(frozen=True)
class BasisVerdict:
    regular: bool
    N: tuple[int, ...]
    rank_N: int


@dataclass(frozen=True)
class CglpLayout:
    n: int
    q: int
    r: int
    T: int

    @property
    def beta(self) -> int:
        return self.n

    def u(self, t: int, i: int) -> int:
        return self.n + 1 + t * (self.q + self.r) + i

    def v(self, t: int, i: int) -> int:
        return self.n + 1 + t * (self.q + self.r) + self.q + i

    @property
    def size(self) -> int:
        return self.n + 1 + self.T * (self.q + self.r)


def build_cglp(sf: StandardForm, d: Disjunction, xbar: Sequence) -> tuple[LinearProgram, CglpLayout]:
    if not d.terms:
        raise DimensionMismatch("disjunction has no terms")
    if d.n != sf.n or len(xbar) != sf.n:
        raise DimensionMismatch("disjunction, relaxation and point disagree on n")
    n, q, r = sf.n, sf.q, d.r
    lay = CglpLayout(n, q, r, len(d.terms))
    b = LpBuilder("min")
    for j in range(n):
        b.add_var(None, None, as_fraction(xbar[j]))
    b.add_var(None, None, -1)
    for _ in range(lay.T):
        b.add_vars(q + r, 0, None, 0)
    A_cols: list[list[tuple[int, Fraction]]] = [[] for _ in range(n)]
    for i in range(q):
        for j, a in enumerate(sf.A_tilde.row(i)):
            if a:
                A_cols[j].append((i, a))
    for t, term in enumerate(d.terms):
        for j in range(n):
            coeffs = [(j, 1)]
            coeffs += [(lay.u(t, i), -a) for i, a in A_cols[j]]
            coeffs += [(lay.v(t, i), -term.D[i, j]) for i in range(r) if term.D[i, j]]
            b.add_row(coeffs, "=", 0)
        coeffs = [(lay.beta, 1)]
        coeffs += [(lay.u(t, i), -sf.b_tilde[i]) for i in range(q) if sf.b_tilde[i]]
        coeffs += [(lay.v(t, i), -term.d[i]) for i in range(r) if term.d[i]]
        b.add_row(coeffs, "=", 0)
    b.add_row([(j, 1) for j in range(n + 1, lay.size)], "=", 1)
    return b.build(), lay


def solution_from_vector(x: Sequence[Fraction], lay: CglpLayout, objective=None) -> CglpSolution:
    return CglpSolution(
        alpha=list(x[:lay.n]),
        beta=x[lay.beta],
        u=[[x[lay.u(t, i)] for i in range(lay.q)] for t in range(lay.T)],
        v=[[x[lay.v(t, i)] for i in range(lay.r)] for t in range(lay.T)],
        objective=objective,
    )


def solve_cglp(sf: StandardForm, d: Disjunction, xbar: Sequence, **kw) -> CglpSolution:
    lp, lay = build_cglp(sf, d, xbar)
    sol = solve_lp(lp, **kw)
    if sol.status != OPTIMAL:  # the normalisation keeps the CGLP bounded and feasible
        raise RuntimeError(f"CGLP returned {sol.status}")
    return solution_from_vector(sol.x, lay, sol.objective)


def generate_cut(sf: StandardForm, d: Disjunction, xbar: Sequence, **kw):
    """Basic optimal CGLP solution and its cut, or None when ``xbar`` is not separable."""
    sol = solve_cglp(sf, d, xbar, **kw)
    if sol.objective >= 0:
        return None
    return sol.cut, sol


def support_N(u: Sequence[Sequence[Fraction]]) -> tuple[int, ...]:
    if not u:
        return ()
    q = len(u[0])
    return tuple(j for j in range(q) if any(ut[j] > 0 for ut in u))


def classify_basis(sol: CglpSolution, sf: StandardForm) -> BasisVerdict:
    N = support_N(sol.u)
    rk = rank_of_rows(sf.A_tilde, N)
    return BasisVerdict(rk == len(N), N, rk)


def detect_split(sol: CglpSolution, d: Disjunction) -> int | None:
    """The variable ``k`` when every term uses exactly one disjunction row, all on ``x_k``."""
    if not d.labelled:
        raise MissingLabels("split detection needs labelled terms")
    k = None
    for t, term in enumerate(d.terms):
        pos = [i for i, val in enumerate(sol.v[t]) if val > 0]
        if len(pos) != 1:
            return None
        var = term.labels[pos[0]][0]
        if k is None:
            k = var
        elif var != k:
            return None
    return k


# -- JSON ---------------------------------------------------------------------


def cut_to_dict(sol: CglpSolution) -> dict:
    return {
        "alpha": [str(a) for a in sol.alpha],
        "beta": str(sol.beta),
        "u": [[str(a) for a in ut] for ut in sol.u],
        "v": [[str(a) for a in vt] for vt in sol.v],
    }


def cut_from_dict(data: dict) -> CglpSolution:
    try:
        alpha = [as_fraction(a) for a in data["alpha"]]
        beta = as_fraction(data["beta"])
        u = [[as_fraction(a) for a in ut] for ut in data.get("u", [])]
        v = [[as_fraction(a) for a in vt] for vt in data.get("v", [])]
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad cut JSON: {exc}") from exc
    if len(u) != len(v):
        raise SchemaError("u and v must have one vector per term")
    return CglpSolution(alpha, beta, u, v)


def load_cut(stream: TextIO | str) -> CglpSolution:
    text = stream if isinstance(stream, str) else stream.read()
    try:
        return cut_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
