"""Regular cut verification.

``build_ircv`` writes the MILP that looks for multipliers reproducing a given
cut (up to the factor ``θ``) while their row support ``N`` avoids every
rank-deficient set collected so far.  ``is_cut_regular`` runs the lazy loop:
solve, and either stop (``θ = 0`` or a full-rank support) or forbid the
offending support and solve again.

Two MILP engines exist.  ``exact`` is a depth-first branch and bound over
``δ`` whose node LPs go through the exact simplex; ``highs`` hands the model
to HiGHS in floating point (``θ ≤ 1e-6`` counts as zero) and certifies every
Regular answer with exact per-term LPs.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .cglp import CglpSolution, Cut, classify_basis, support_N
from .disjunction import Disjunction
from .instance import StandardForm
from .ratlin import as_fraction, rank, rank_of_rows
from .simplex import INFEASIBLE, OPTIMAL, LinearProgram, LpBuilder, solve_lp

log = logging.getLogger(__name__)

REGULAR, STRICTLY_IRREGULAR, UNKNOWN = "Regular", "StrictlyIrregular", "Unknown"
LOOP_LIMIT, TIME_LIMIT, NODE_LIMIT, UNVERIFIED = "LoopLimit", "TimeLimit", "NodeLimit", "Unverified"
THETA_TOL = 1e-6
SUPPORT_TOL = 1e-9


@dataclass(frozen=True)
class Limits:
    loop_limit: int | None = None
    time_limit: float | None = None   # seconds per verification
    node_cap: int | None = None


@dataclass
class RcvModel:
    cut: Cut
    sf: StandardForm
    d: Disjunction
    epsilon: Fraction
    pool_Q: dict = field(default_factory=dict)      # frozenset(N) -> rank
    parallel_pairs: list = field(default_factory=list)
    lp: LinearProgram | None = None
    theta: int = 0
    delta: list = field(default_factory=list)
    u: list = field(default_factory=list)          # u[t][j] -> column
    v: list = field(default_factory=list)

    def windows(self) -> list[tuple[Fraction, Fraction]]:
        """Per coefficient ``(lo, hi)`` so that the row reads ``θ lo ≤ expr ≤ θ hi``."""
        out = []
        for a in list(self.cut.alpha) + [self.cut.beta]:
            w = self.epsilon * max(Fraction(1), abs(a))
            out.append((a - w, a + w))
        return out


@dataclass
class MilpResult:
    status: str                      # "optimal" | "limit"
    theta: Fraction
    delta: list
    u: list
    v: list
    nodes: int = 0
    early: bool = False
    reason: str | None = None


@dataclass
class RegularityVerdict:
    kind: str
    theta: Fraction | None = None
    witness_N: tuple[int, ...] | None = None
    loop_count: int = 0
    reason: str | None = None
    pool_size: int = 0
    wall_ms: float = 0.0
    cut_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "cut_id": self.cut_id,
            "kind": self.kind,
            "theta": None if self.theta is None else str(self.theta),
            "witness_N": None if self.witness_N is None else list(self.witness_N),
            "loop_count": self.loop_count,
            "wall_ms": round(self.wall_ms, 3),
            **({"reason": self.reason} if self.reason else {}),
        }


def normalize_cut(cut: Cut) -> Cut:
    """Scale so the largest ``|coefficient|`` is 1.

    The verification works on this representative, which makes verdicts
    independent of how the cut was scaled and keeps float engines away
    from tiny coefficients.
    """
    g = max(abs(a) for a in list(cut.alpha) + [cut.beta])
    return Cut(tuple(a / g for a in cut.alpha), cut.beta / g)


def parallel_pairs(sf: StandardForm) -> list[tuple[int, int]]:
    """``(lower row, upper row)`` for each variable carrying both bound rows."""
    lower = {tag.index: i for i, tag in enumerate(sf.provenance) if tag.kind == "lower"}
    pairs = []
    for i, tag in enumerate(sf.provenance):
        if tag.kind == "upper" and tag.index in lower:
            pairs.append((lower[tag.index], i))
    return sorted(pairs)


def build_ircv(cut: Cut, sf: StandardForm, d: Disjunction, eps=0,
               pool_Q: dict | None = None) -> RcvModel:
    eps = as_fraction(eps)
    if eps < 0:
        raise ValueError("epsilon must be nonnegative")
    if len(cut.alpha) != sf.n or d.n != sf.n:
        raise ValueError("cut, relaxation and disjunction disagree on n")
    model = RcvModel(cut, sf, d, eps, dict(pool_Q or {}), parallel_pairs(sf))
    n, q, r = sf.n, sf.q, d.r
    b = LpBuilder("max")
    model.theta = b.add_var(0, 1, 1)
    model.delta = b.add_vars(q, 0, 1, 0)
    for _ in d.terms:
        model.u.append(b.add_vars(q, 0, None, 0))
        model.v.append(b.add_vars(r, 0, None, 0))
    A_cols = [[] for _ in range(n)]
    for i in range(q):
        for j, a in enumerate(sf.A_tilde.row(i)):
            if a:
                A_cols[j].append((i, a))
    win = model.windows()
    for t, term in enumerate(d.terms):
        u, v = model.u[t], model.v[t]
        exprs = []
        for j in range(n):
            e = [(u[i], a) for i, a in A_cols[j]]
            e += [(v[k], term.D[k, j]) for k in range(r) if term.D[k, j]]
            exprs.append(e)
        e = [(u[i], sf.b_tilde[i]) for i in range(q) if sf.b_tilde[i]]
        e += [(v[k], term.d[k]) for k in range(r) if term.d[k]]
        exprs.append(e)
        for e, (lo, hi) in zip(exprs, win):
            if lo == hi:
                b.add_row(e + [(model.theta, -lo)], "=", 0)
            else:
                b.add_row(e + [(model.theta, -lo)], ">=", 0)
                b.add_row(e + [(model.theta, -hi)], "<=", 0)
        for i in range(q):
            b.add_row([(u[i], 1), (model.delta[i], -1)], "<=", 0)
    b.add_row([(dj, 1) for dj in model.delta], "<=", n)
    for N, rk in sorted(model.pool_Q.items(), key=lambda kv: sorted(kv[0])):
        b.add_row([(model.delta[j], 1) for j in sorted(N)], "<=", rk)
    for j1, j2 in model.parallel_pairs:
        b.add_row([(model.delta[j1], 1), (model.delta[j2], 1)], "<=", 1)
    model.lp = b.build()
    return model


# ---------------------------------------------------------------------------
# MILP engines


def _extract(model: RcvModel, x) -> tuple[Fraction, list, list, list]:
    theta = x[model.theta]
    delta = [x[j] for j in model.delta]
    u = [[x[j] for j in ut] for ut in model.u]
    v = [[x[j] for j in vt] for vt in model.v]
    return theta, delta, u, v


def _support_ok(model: RcvModel, N: Sequence[int]) -> bool:
    """Does the indicator of ``N`` satisfy every δ-only row?"""
    S = set(N)
    if len(S) > model.sf.n:
        return False
    for P, rk in model.pool_Q.items():
        if len(S & P) > rk:
            return False
    return all(not (j1 in S and j2 in S) for j1, j2 in model.parallel_pairs)


def solve_milp(model: RcvModel, limits: Limits | None = None, *, engine: str = "exact",
               deadline: float | None = None) -> MilpResult:
    if engine == "highs":
        return _solve_highs(model, limits or Limits(), deadline)
    return _solve_exact(model, limits or Limits(), deadline)


def _solve_exact(model: RcvModel, limits: Limits, deadline: float | None) -> MilpResult:
    """Depth-first branch and bound on δ, up-branch first."""
    lp = model.lp
    q = len(model.delta)
    best = MilpResult("optimal", Fraction(0), [Fraction(0)] * q,
                      [[Fraction(0)] * len(ut) for ut in model.u],
                      [[Fraction(0)] * len(vt) for vt in model.v])
    stack = [({}, None)]
    nodes = 0
    A = model.sf.A_tilde
    while stack:
        fixed, _ = stack.pop()
        if limits.node_cap is not None and nodes >= limits.node_cap:
            best.status, best.reason = "limit", NODE_LIMIT
            break
        if deadline is not None and time.monotonic() > deadline:
            best.status, best.reason = "limit", TIME_LIMIT
            break
        nodes += 1
        lower = list(lp.lower)
        upper = list(lp.upper)
        for j, val in fixed.items():
            col = model.delta[j]
            lower[col] = upper[col] = Fraction(val)
            if val == 0:
                for ut in model.u:
                    upper[ut[j]] = Fraction(0)
        sol = solve_lp(lp.with_bounds(lower, upper), warm_start=False)
        if sol.status == INFEASIBLE:
            continue
        theta, delta, u, v = _extract(model, sol.x)
        if theta <= best.theta:
            continue
        # rounding: δ = indicator of the u-support is feasible when it fits
        N = support_N(u)
        if _support_ok(model, N):
            rd = [Fraction(1) if j in set(N) else Fraction(0) for j in range(q)]
            best = MilpResult("optimal", theta, rd, u, v)
            if theta > 0 and rank_of_rows(A, N) == len(N):
                best.early = True
                break
            continue
        frac = [(abs(dj - Fraction(1, 2)), j) for j, dj in enumerate(delta)
                if j not in fixed and 0 < dj < 1]
        if not frac:
            # δ integral but the u-support rounding was rejected: δ itself is feasible
            best = MilpResult("optimal", theta, delta, u, v)
            if theta > 0 and rank_of_rows(A, N) == len(N):
                best.early = True
                break
            continue
        _, j = min(frac)
        stack.append(({**fixed, j: 0}, None))
        stack.append(({**fixed, j: 1}, None))
    best.nodes = nodes
    return best


def _solve_highs(model: RcvModel, limits: Limits, deadline: float | None) -> MilpResult:
    import highspy
    import numpy as np

    lp = model.lp
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("threads", 1)
    h.setOptionValue("random_seed", 0)
    # zero gaps never close when the optimum is θ = ±1e-11 noise
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", THETA_TOL * 1e-3)
    # only the sign of θ matters: prune nodes that cannot beat the tolerance
    h.setOptionValue("objective_bound", -THETA_TOL)
    # sub-MIP heuristics can stall for minutes on these models; an incumbent
    # is not needed to prove θ = 0
    h.setOptionValue("mip_heuristic_effort", 0.0)
    h.setOptionValue("mip_heuristic_run_rens", False)
    h.setOptionValue("mip_heuristic_run_rins", False)
    if deadline is not None:
        h.setOptionValue("time_limit", max(1.0, deadline - time.monotonic()))
    if limits.node_cap is not None:
        h.setOptionValue("mip_max_nodes", limits.node_cap)
    inf = highspy.kHighsInf
    nv = lp.n
    h.addVars(nv, np.array([-inf if v is None else float(v) for v in lp.lower]),
              np.array([inf if v is None else float(v) for v in lp.upper]))
    h.changeColsCost(nv, np.arange(nv, dtype=np.int32), np.array([-float(c) for c in lp.c]))
    for i, row in enumerate(lp.rows):
        rhs = float(lp.rhs[i])
        lo = rhs if lp.senses[i] in (">=", "=") else -inf
        up = rhs if lp.senses[i] in ("<=", "=") else inf
        h.addRow(lo, up, len(row), np.array([j for j, _ in row], dtype=np.int32),
                 np.array([float(a) for _, a in row]))
    dcols = np.array(model.delta, dtype=np.int32)
    h.changeColsIntegrality(len(dcols), dcols,
                            np.array([highspy.HighsVarType.kInteger] * len(dcols)))
    h.run()
    status = h.getModelStatus()
    S = highspy.HighsModelStatus
    x = list(h.getSolution().col_value)
    q = len(model.delta)
    if status in (S.kInfeasible, S.kObjectiveBound):
        # nothing beats the cutoff, which proves θ ≤ THETA_TOL
        return MilpResult("optimal", Fraction(0), [0] * q, [], [])
    if status != S.kOptimal:
        reason = TIME_LIMIT if status == S.kTimeLimit else NODE_LIMIT
        return MilpResult("limit", Fraction(0), [Fraction(0)] * q, [], [], reason=reason)
    theta = x[model.theta]
    delta = [round(x[j]) for j in model.delta]
    u = [[x[j] for j in ut] for ut in model.u]
    v = [[x[j] for j in vt] for vt in model.v]
    th = Fraction(0) if theta <= THETA_TOL else as_fraction(theta)
    return MilpResult("optimal", th, delta, u, v)


# ---------------------------------------------------------------------------
# Exact per-support checks


def support_feasible(cut: Cut, sf: StandardForm, d: Disjunction, N: Sequence[int],
                     eps=0, terms: Sequence[int] | None = None, cache: dict | None = None) -> bool:
    """Is there ``θ > 0`` with multipliers supported on ``N``?

    Dividing by ``θ`` decouples the terms, so each term is one exact
    feasibility LP: ``u ≥ 0`` on ``N``, ``v ≥ 0`` with ``(uÃ + vD, ub̃ + vd)``
    inside the ε windows around ``(ᾱ, β̄)``.
    """
    eps = as_fraction(eps)
    N = tuple(sorted(N))
    target = list(cut.alpha) + [cut.beta]
    wins = [eps * max(Fraction(1), abs(a)) for a in target]
    for t in (range(len(d.terms)) if terms is None else terms):
        key = (t, N)
        if cache is not None and key in cache:
            ok = cache[key]
        else:
            ok = _term_feasible(sf, d.terms[t], N, target, wins)
            if cache is not None:
                cache[key] = ok
        if not ok:
            return False
    return True


def _term_feasible(sf, term, N, target, wins) -> bool:
    b = LpBuilder("min")
    u = [b.add_var(0) for _ in N]
    v = b.add_vars(term.D.rows, 0)
    n = sf.n
    for j in range(n + 1):
        if j < n:
            e = [(u[k], sf.A_tilde[i, j]) for k, i in enumerate(N) if sf.A_tilde[i, j]]
            e += [(v[k], term.D[k, j]) for k in range(term.D.rows) if term.D[k, j]]
        else:
            e = [(u[k], sf.b_tilde[i]) for k, i in enumerate(N) if sf.b_tilde[i]]
            e += [(v[k], term.d[k]) for k in range(term.D.rows) if term.d[k]]
        if wins[j] == 0:
            b.add_row(e, "=", target[j])
        else:
            b.add_row(e, ">=", target[j] - wins[j])
            b.add_row(e, "<=", target[j] + wins[j])
    return solve_lp(b.build(), warm_start=False).status == OPTIMAL


def oracle_extended_regular(cut: Cut, sf: StandardForm, d: Disjunction, eps=0) -> bool:
    """Brute force: some independent row set ``N`` admits ``θ > 0``.

    Feasibility only grows with ``N``, so the maximal independent sets
    (``rank(Ã)`` rows of full rank) are the only ones to try.
    """
    cut = normalize_cut(cut)
    A = sf.A_tilde
    full = rank(A)
    cache: dict = {}
    for N in combinations(range(sf.q), full):
        if rank_of_rows(A, N) < full:
            continue
        if support_feasible(cut, sf, d, N, eps, cache=cache):
            return True
    return False


def oracle_witnesses(cut: Cut, sf: StandardForm, d: Disjunction, eps=0) -> list[tuple[int, ...]]:
    cut = normalize_cut(cut)
    A = sf.A_tilde
    full = rank(A)
    return [N for N in combinations(range(sf.q), full)
            if rank_of_rows(A, N) == full and support_feasible(cut, sf, d, N, eps)]


# ---------------------------------------------------------------------------
# Pool loop


def is_cut_regular(cut: Cut, sol: CglpSolution | None, sf: StandardForm, d: Disjunction,
                   eps=0, limits: Limits | None = None, *, engine: str = "exact",
                   cut_id: str | None = None) -> RegularityVerdict:
    limits = limits or Limits()
    cut = normalize_cut(cut)
    start = time.monotonic()
    deadline = None if limits.time_limit is None else start + limits.time_limit

    def done(v: RegularityVerdict) -> RegularityVerdict:
        v.wall_ms = (time.monotonic() - start) * 1000
        v.cut_id = cut_id
        return v

    if sol is not None and sol.u:
        basis = classify_basis(sol, sf)
        if basis.regular:
            return done(RegularityVerdict(REGULAR, Fraction(1), basis.N, 0))
    pool: dict = {}
    loops = 0
    while True:
        if limits.loop_limit is not None and loops >= limits.loop_limit:
            return done(RegularityVerdict(UNKNOWN, loop_count=loops, reason=LOOP_LIMIT,
                                          pool_size=len(pool)))
        if deadline is not None and time.monotonic() > deadline:
            return done(RegularityVerdict(UNKNOWN, loop_count=loops, reason=TIME_LIMIT,
                                          pool_size=len(pool)))
        model = build_ircv(cut, sf, d, eps, pool)
        res = solve_milp(model, limits, engine=engine, deadline=deadline)
        loops += 1
        if res.status != "optimal":
            return done(RegularityVerdict(UNKNOWN, loop_count=loops, reason=res.reason,
                                          pool_size=len(pool)))
        if res.theta <= 0:
            return done(RegularityVerdict(STRICTLY_IRREGULAR, Fraction(0), None, loops,
                                          pool_size=len(pool)))
        if engine == "highs":
            N = tuple(j for j in range(sf.q)
                      if any(ut[j] > SUPPORT_TOL for ut in res.u))
        else:
            N = support_N(res.u)
        rk = rank_of_rows(sf.A_tilde, N)
        if rk < len(N):
            key = frozenset(N)
            if key in pool:
                if engine != "highs":
                    raise AssertionError(f"support {N} was already forbidden")
                # float support blurred the forbidden set; fall back to δ
                key = frozenset(j for j, dj in enumerate(res.delta) if dj)
                rk = rank_of_rows(sf.A_tilde, sorted(key))
                if key in pool or rk == len(key):
                    return done(RegularityVerdict(UNKNOWN, loop_count=loops,
                                                  reason=UNVERIFIED, pool_size=len(pool)))
            pool[key] = rk
            continue
        if engine == "highs" and not support_feasible(cut, sf, d, N, eps):
            return done(RegularityVerdict(UNKNOWN, loop_count=loops, reason=UNVERIFIED,
                                          pool_size=len(pool)))
        return done(RegularityVerdict(REGULAR, res.theta, N, loops, pool_size=len(pool)))
