"""Intersection cuts from an LP cone and the set ``S(v) = {x : g_t x ≤ h_t}``.

A cobasis ``J`` (n independent rows of ``Ã``) fixes the apex ``x(J)`` and,
per row ``j``, the ray ``r^j`` along which only the surplus of row ``j``
grows.  The cut ``Σ_j s_j / λ*_j ≥ 1`` on surpluses ``s_j = Ã_j x − b̃_j``
is mapped back to structural space before any comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, islice
from typing import Sequence

from .cglp import CglpSolution, Cut, classify_basis, support_N
from .disjunction import Disjunction
from .instance import StandardForm
from .ratlin import independent_rows, rank_of_rows
from .simplex import Cone, SingularBasis, cone_at_basis

COMPLETION_CAP = 2000


class ZeroTermMultipliers(ValueError):
    def __init__(self, t: int):
        super().__init__(f"term {t} has v^t = 0")
        self.t = t


class ApexNotInterior(ValueError):
    pass


class IrregularSolution(ValueError):
    pass


@dataclass(frozen=True)
class PFreeSet:
    rows: tuple[tuple[tuple[Fraction, ...], Fraction], ...]

    def slack(self, x: Sequence[Fraction]) -> list[Fraction]:
        """``h - g x`` per row; all positive means ``x`` is interior."""
        return [h - sum((a * b for a, b in zip(g, x)), Fraction(0)) for g, h in self.rows]

    def interior(self, x: Sequence[Fraction]) -> bool:
        return all(s > 0 for s in self.slack(x))


@dataclass(frozen=True)
class IntersectionCut:
    J: tuple[int, ...]
    coefficients: tuple[Fraction, ...]          # 1/λ*_j, aligned with J
    lambda_star: tuple[Fraction | None, ...]    # None = ray never leaves S

    def to_x_space(self, sf: StandardForm) -> Cut:
        alpha = [Fraction(0)] * sf.n
        beta = Fraction(1)
        for j, c in zip(self.J, self.coefficients):
            if c:
                for k, a in enumerate(sf.A_tilde.row(j)):
                    alpha[k] += c * a
                beta += c * sf.b_tilde[j]
        return Cut(tuple(alpha), beta)


def pfree_from_v(d: Disjunction, v: Sequence[Sequence[Fraction]]) -> PFreeSet:
    rows = []
    for t, term in enumerate(d.terms):
        vt = list(v[t])
        if not any(vt):
            raise ZeroTermMultipliers(t)
        g = term.D.vecmat(vt)
        h = sum((a * b for a, b in zip(vt, term.d)), Fraction(0))
        # D^t x ≥ d^t aggregated gives g x ≥ h; S keeps the complement side
        rows.append((tuple(g), h))
    return PFreeSet(tuple(rows))


def intersection_cut(cone: Cone, s: PFreeSet) -> IntersectionCut:
    if not s.interior(cone.apex):
        raise ApexNotInterior("the cone apex is not interior to S")
    slack = s.slack(cone.apex)
    coeffs, lams = [], []
    for j in cone.J:
        r = cone.rays[j]
        lam = None
        for (g, _), sl in zip(s.rows, slack):
            rate = sum((a * b for a, b in zip(g, r)), Fraction(0))
            if rate > 0:
                step = sl / rate
                if lam is None or step < lam:
                    lam = step
        lams.append(lam)
        coeffs.append(Fraction(0) if lam is None else 1 / lam)
    return IntersectionCut(cone.J, tuple(coeffs), tuple(lams))


def cuts_equivalent(c1: Cut, c2: Cut) -> bool:
    """``c2 = μ c1`` for some rational ``μ > 0``."""
    a1 = list(c1.alpha) + [c1.beta]
    a2 = list(c2.alpha) + [c2.beta]
    if len(a1) != len(a2):
        return False
    mu = None
    for x, y in zip(a1, a2):
        if (x == 0) != (y == 0):
            return False
        if x:
            ratio = y / x
            if ratio <= 0 or (mu is not None and ratio != mu):
                return False
            mu = ratio
    return mu is not None


def completion_order(sf: StandardForm) -> list[int]:
    """Bound rows first (lowest index), then structural rows."""
    bounds = [i for i, tag in enumerate(sf.provenance) if tag.kind != "structural"]
    return bounds + [i for i, tag in enumerate(sf.provenance) if tag.kind == "structural"]


def completions(sf: StandardForm, N: Sequence[int], cap: int = COMPLETION_CAP):
    """Cobases ``J ⊇ N`` in deterministic order, greedy completion first."""
    N = list(N)
    need = sf.n - len(N)
    if need == 0:
        yield tuple(N)
        return
    order = [i for i in completion_order(sf) if i not in set(N)]
    seen = set()
    rows = [sf.A_tilde.row(i) for i in N] + [sf.A_tilde.row(i) for i in order]
    picked = independent_rows(rows)
    first = tuple(N + [order[k - len(N)] for k in picked if k >= len(N)][:need])
    if len(first) == sf.n:
        seen.add(frozenset(first))
        yield first
    for extra in islice(combinations(order, need), cap):
        J = tuple(N) + extra
        key = frozenset(J)
        if key in seen:
            continue
        if rank_of_rows(sf.A_tilde, J) == sf.n:
            seen.add(key)
            yield J


@dataclass(frozen=True)
class Reconstruction:
    equivalent: bool
    J: tuple[int, ...] | None
    cut: Cut | None
    tried: int


def reconstruct(sol: CglpSolution, sf: StandardForm, d: Disjunction,
                cap: int = COMPLETION_CAP) -> Reconstruction:
    verdict = classify_basis(sol, sf)
    if not verdict.regular:
        raise IrregularSolution("reconstruction needs a regular solution")
    s = pfree_from_v(d, sol.v)
    target = sol.cut
    tried = 0
    interior_seen = False
    for J in completions(sf, verdict.N, cap):
        tried += 1
        try:
            cone = cone_at_basis(sf, J)
        except SingularBasis:
            continue
        if not s.interior(cone.apex):
            continue
        interior_seen = True
        ic = intersection_cut(cone, s)
        cut = ic.to_x_space(sf)
        if cuts_equivalent(target, cut):
            return Reconstruction(True, J, cut, tried)
    if not interior_seen:
        raise ApexNotInterior(f"no cobasis around N={verdict.N} has an interior apex")
    return Reconstruction(False, None, None, tried)


def verify_theorem1(sol: CglpSolution, sf: StandardForm, d: Disjunction) -> bool:
    return reconstruct(sol, sf, d).equivalent


__all__ = [
    "PFreeSet", "IntersectionCut", "ZeroTermMultipliers", "ApexNotInterior",
    "IrregularSolution", "pfree_from_v", "intersection_cut", "cuts_equivalent",
    "verify_theorem1", "reconstruct", "completions", "support_N",
]
