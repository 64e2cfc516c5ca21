"""Disjunctions ``∨_t {D^t x ≥ d^t}`` and the simple t-branch family."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Sequence, TextIO

from .instance import SchemaError
from .ratlin import RatMatrix, as_fraction

LOW, HIGH = "<=0", ">=1"


class EmptyK(ValueError):
    pass


@dataclass(frozen=True)
class Term:
    D: RatMatrix
    d: tuple[Fraction, ...]
    labels: tuple[tuple[int, str], ...] | None = None

    def satisfied(self, x: Sequence[Fraction]) -> bool:
        return all(lhs >= rhs for lhs, rhs in zip(self.D.matvec(list(x)), self.d))


@dataclass(frozen=True)
class Disjunction:
    terms: tuple[Term, ...]
    n: int

    def __post_init__(self):
        if self.terms:
            r = self.terms[0].D.rows
            for term in self.terms:
                if term.D.cols != self.n or term.D.rows != r or len(term.d) != r:
                    raise ValueError("terms disagree on dimensions")

    @property
    def r(self) -> int:
        return self.terms[0].D.rows if self.terms else 0

    @property
    def labelled(self) -> bool:
        return bool(self.terms) and all(t.labels is not None for t in self.terms)

    @property
    def K(self) -> tuple[int, ...]:
        if not self.labelled:
            return ()
        return tuple(k for k, _ in self.terms[0].labels)

    def satisfied_by(self, x: Sequence[Fraction]) -> list[int]:
        return [t for t, term in enumerate(self.terms) if term.satisfied(x)]


def label_row(k: int, side: str, n: int) -> tuple[list[Fraction], Fraction]:
    row = [Fraction(0)] * n
    if side == HIGH:
        row[k] = Fraction(1)
        return row, Fraction(1)
    if side == LOW:
        row[k] = Fraction(-1)
        return row, Fraction(0)
    raise ValueError(f"unknown side {side!r}")


def simple_tbranch(K: Iterable[int], n: int) -> Disjunction:
    """One term per ``K' ⊆ K``: ``x_k ≥ 1`` on ``K'`` and ``-x_k ≥ 0`` elsewhere.

    Terms are ordered like binary counting over ``K`` in the given order,
    the all-low term first.
    """
    K = list(K)
    if not K:
        raise EmptyK("the branching set K is empty")
    if len(set(K)) != len(K) or any(not 0 <= k < n for k in K):
        raise ValueError(f"bad branching set {K}")
    terms = []
    for sides in product((LOW, HIGH), repeat=len(K)):
        rows, rhs = zip(*(label_row(k, s, n) for k, s in zip(K, sides)))
        terms.append(Term(RatMatrix.from_rows(rows, cols=n), tuple(rhs),
                          tuple(zip(K, sides))))
    return Disjunction(tuple(terms), n)


def enumerate_subsets(frac: Sequence[int], size: int, cap: int | None = None) -> list[tuple[int, ...]]:
    out = []
    for K in combinations(sorted(frac), size):
        if cap is not None and len(out) >= cap:
            break
        out.append(K)
    return out


def check_excludes(d: Disjunction, xbar: Sequence[Fraction]) -> bool:
    """True iff ``xbar`` strictly violates some row of every term."""
    return not d.satisfied_by(xbar)


# -- JSON ---------------------------------------------------------------------


def disjunction_to_dict(d: Disjunction) -> dict:
    if d.labelled and d == simple_tbranch(d.K, d.n):
        return {"n": d.n, "K": list(d.K)}
    return {
        "n": d.n,
        "terms": [
            {"rows": [{"coeffs": {str(j): str(a) for j, a in enumerate(t.D.row(i)) if a},
                       "rhs": str(t.d[i])} for i in range(t.D.rows)]}
            for t in d.terms
        ],
    }


def disjunction_from_dict(data: dict) -> Disjunction:
    """Either ``{"n": n, "K": [...]}`` or explicit ``{"n": n, "terms": [...]}``."""
    if not isinstance(data, dict) or "n" not in data:
        raise SchemaError("disjunction needs n")
    n = data["n"]
    if not isinstance(n, int) or n < 1:
        raise SchemaError("n must be a positive integer")
    if "K" in data:
        try:
            return simple_tbranch([int(k) for k in data["K"]], n)
        except (EmptyK, ValueError) as exc:
            raise SchemaError(str(exc)) from exc
    terms = []
    for t, term in enumerate(data.get("terms", [])):
        rows, rhs = [], []
        for row in term.get("rows", []):
            vec = [Fraction(0)] * n
            for j, a in dict(row["coeffs"]).items():
                if not 0 <= int(j) < n:
                    raise SchemaError(f"terms[{t}]: index {j} out of range")
                vec[int(j)] = as_fraction(a)
            rows.append(vec)
            rhs.append(as_fraction(row["rhs"]))
        terms.append(Term(RatMatrix.from_rows(rows, cols=n), tuple(rhs)))
    if not terms:
        raise SchemaError("disjunction has no terms")
    try:
        return Disjunction(tuple(terms), n)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def load_disjunction(stream: TextIO | str) -> Disjunction:
    text = stream if isinstance(stream, str) else stream.read()
    try:
        return disjunction_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
