"""First-round experiment: one CGLP cut per branching set, then regularity."""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .cglp import Cut, classify_basis, detect_split, generate_cut
from .disjunction import enumerate_subsets, simple_tbranch
from .instance import Model, to_standard_form
from .intersection import ApexNotInterior, verify_theorem1
from .ratlin import as_fraction
from .rcv import REGULAR, STRICTLY_IRREGULAR, UNKNOWN, Limits, is_cut_regular
from .simplex import OPTIMAL, fractional_binaries, solve_relaxation

log = logging.getLogger(__name__)

COLUMNS = ("instance", "k", "frac", "bases_reg", "bases_irr", "split", "cuts_reg",
           "cuts_irr", "cuts_unk", "avg_gap", "avg_dist", "gap_with", "gap_without")
EXACT_ENGINE_MAX_ROWS = 40

METADATA = {
    "gap_closed": "(z_cuts - z_lp) / (z_mip - z_lp), clamped to [0, 1]; 0 when z_mip = z_lp",
    "averages": "over cuts with a Regular or StrictlyIrregular verdict",
    "gap_with": "LP with every cut except Unknown verdicts",
    "gap_without": "LP with Regular cuts only",
    "cut_scaling": "verification runs on the cut scaled to max |coefficient| = 1",
}


class NoFractionalVariables(ValueError):
    pass


class MissingMipOptimum(ValueError):
    pass


class ZeroAlpha(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    k_sizes: tuple[int, ...] = (2,)
    epsilon: Fraction = Fraction(1, 10000)
    loop_limit: int | None = None
    time_limit_per_cut: float | None = None
    mip_optimum: Fraction | None = None
    subset_cap: int | None = None
    engine: str = "auto"
    jobs: int = 1

    def __post_init__(self):
        if any(k < 2 for k in self.k_sizes):
            raise ValueError("k sizes must be at least 2")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")


@dataclass
class ReportRow:
    instance: str
    k_size: int
    frac_var_count: int
    bases_regular: int = 0
    bases_irregular: int = 0
    split_count: int = 0
    cuts_regular: int = 0
    cuts_irregular: int = 0
    cuts_unknown: int = 0
    avg_gap_closed: Fraction | None = None
    avg_distance: float | None = None
    total_gap_with: Fraction | None = None
    total_gap_without: Fraction | None = None

    def values(self) -> tuple:
        return (self.instance, self.k_size, self.frac_var_count, self.bases_regular,
                self.bases_irregular, self.split_count, self.cuts_regular,
                self.cuts_irregular, self.cuts_unknown, self.avg_gap_closed,
                self.avg_distance, self.total_gap_with, self.total_gap_without)


@dataclass
class CutRecord:
    K: tuple[int, ...]
    cut: Cut
    basis_regular: bool
    flagged: bool
    split: int | None
    verdict: object = None
    theorem1: bool | None = None
    gap: Fraction | None = None
    distance: float | None = None
    z_cut: Fraction | None = None


def gap_closed(z_lp, z_with_cuts, z_mip) -> Fraction:
    if z_mip is None:
        raise MissingMipOptimum("a MIP optimum is needed for gap closed")
    z_lp, z_with_cuts, z_mip = (as_fraction(z) for z in (z_lp, z_with_cuts, z_mip))
    if z_mip == z_lp:
        return Fraction(0)
    g = (z_with_cuts - z_lp) / (z_mip - z_lp)
    return min(Fraction(1), max(Fraction(0), g))


def cut_distance(cut: Cut, xbar: Sequence) -> float:
    norm2 = sum((a * a for a in cut.alpha), Fraction(0))
    if norm2 == 0:
        raise ZeroAlpha("cut has alpha = 0")
    return float(-cut.value(xbar)) / math.sqrt(norm2)


def _engine(cfg: RunConfig, q: int) -> str:
    if cfg.engine != "auto":
        return cfg.engine
    return "exact" if q <= EXACT_ENGINE_MAX_ROWS else "highs"


def _one_cut(args):
    sf, xbar, K, cfg = args
    d = simple_tbranch(K, sf.n)
    found = generate_cut(sf, d, xbar)
    if found is None:
        return None
    cut, sol = found
    basis = classify_basis(sol, sf)
    split = detect_split(sol, d)
    rec = CutRecord(tuple(K), cut, basis.regular, sol.flagged, split)
    if split is not None:
        try:
            rec.theorem1 = verify_theorem1(sol, sf, d)
        except ApexNotInterior:
            rec.theorem1 = None
    if not sol.flagged:
        limits = Limits(cfg.loop_limit, cfg.time_limit_per_cut)
        rec.verdict = is_cut_regular(cut, sol, sf, d, cfg.epsilon, limits,
                                     engine=_engine(cfg, sf.q), cut_id="K=" + ",".join(map(str, K)))
    rec.distance = cut_distance(cut, xbar)
    return rec


def _lp_value(sf, model: Model, cuts) -> Fraction:
    sol = solve_relaxation(sf.with_rows([(c.alpha, c.beta) for c in cuts]),
                           model.objective.c, model.objective.sense)
    if sol.status != OPTIMAL:
        raise RuntimeError(f"LP with cuts is {sol.status}")
    return sol.objective


def run_first_round_detailed(model: Model, cfg: RunConfig = RunConfig()):
    sf = to_standard_form(model, "auto")
    lp = solve_relaxation(sf, model.objective.c, model.objective.sense)
    if lp.status != OPTIMAL:
        raise ValueError(f"LP relaxation is {lp.status}")
    xbar, z_lp = lp.x, lp.objective
    frac = fractional_binaries(xbar, model.binaries)
    if not frac:
        raise NoFractionalVariables("the LP optimum is integral on the binaries")
    sign = 1 if model.objective.sense == "min" else -1
    rows, records = [], {}
    for k in cfg.k_sizes:
        subsets = enumerate_subsets(frac, k, cfg.subset_cap)
        work = [(sf, xbar, K, cfg) for K in subsets]
        if cfg.jobs > 1 and len(work) > 1:
            with ProcessPoolExecutor(cfg.jobs) as pool:
                recs = list(pool.map(_one_cut, work))
        else:
            recs = [_one_cut(w) for w in work]
        recs = [r for r in recs if r is not None]
        row = ReportRow(model.name, k, len(frac))
        for r in recs:
            if r.basis_regular:
                row.bases_regular += 1
            else:
                row.bases_irregular += 1
            if r.split is not None:
                row.split_count += 1
            if r.verdict is not None:
                kind = r.verdict.kind
                row.cuts_regular += kind == REGULAR
                row.cuts_irregular += kind == STRICTLY_IRREGULAR
                row.cuts_unknown += kind == UNKNOWN
        done = [r for r in recs if r.verdict is not None and r.verdict.kind != UNKNOWN]
        if done:
            row.avg_distance = sum(r.distance for r in done) / len(done)
        if cfg.mip_optimum is not None and done:
            z_mip = as_fraction(cfg.mip_optimum)
            for r in done:
                r.z_cut = _lp_value(sf, model, [r.cut])
                r.gap = gap_closed(sign * z_lp, sign * r.z_cut, sign * z_mip)
            row.avg_gap_closed = sum((r.gap for r in done), Fraction(0)) / len(done)
            row.total_gap_with = gap_closed(
                sign * z_lp, sign * _lp_value(sf, model, [r.cut for r in done]), sign * z_mip)
            regular = [r.cut for r in done if r.verdict.kind == REGULAR]
            row.total_gap_without = gap_closed(
                sign * z_lp, sign * _lp_value(sf, model, regular), sign * z_mip)
        rows.append(row)
        records[k] = recs
    return rows, records, xbar


def run_first_round(model: Model, cfg: RunConfig = RunConfig()) -> list[ReportRow]:
    return run_first_round_detailed(model, cfg)[0]


# -- reports ------------------------------------------------------------------


def _dec(value) -> str:
    if value is None:
        return ""
    if isinstance(value, Fraction):
        value = float(value)
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_report(rows: Sequence[ReportRow], fmt: str, path) -> None:
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COLUMNS)
            for row in rows:
                w.writerow([_dec(v) for v in row.values()])
    elif fmt == "json":
        out = []
        for row in rows:
            entry = {}
            for col, v in zip(COLUMNS, row.values()):
                entry[col] = v if isinstance(v, (int, str)) or v is None else _dec(v)
                if isinstance(v, Fraction):
                    entry[col + "_exact"] = str(v)
            out.append(entry)
        path.write_text(json.dumps({"metadata": METADATA, "rows": out}, indent=2) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def load_report(path) -> list[ReportRow]:
    data = json.loads(Path(path).read_text())
    rows = []
    for e in data["rows"]:
        def exact(col):
            if e.get(col + "_exact") is not None:
                return Fraction(e[col + "_exact"])
            return None
        rows.append(ReportRow(
            e["instance"], e["k"], e["frac"], e["bases_reg"], e["bases_irr"], e["split"],
            e["cuts_reg"], e["cuts_irr"], e["cuts_unk"], exact("avg_gap"),
            None if e["avg_dist"] is None else float(e["avg_dist"]),
            exact("gap_with"), exact("gap_without"),
        ))
    return rows


def format_table(rows: Sequence[ReportRow]) -> str:
    widths = [max(len(c), *(len(_dec(v)) for v in (r.values()[i] for r in rows)))
              if rows else len(c) for i, c in enumerate(COLUMNS)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(COLUMNS, widths))]
    for r in rows:
        lines.append("  ".join(_dec(v).rjust(w) for v, w in zip(r.values(), widths)))
    return "\n".join(lines)


__all__ = ["RunConfig", "ReportRow", "CutRecord", "run_first_round", "run_first_round_detailed",
           "gap_closed", "cut_distance", "write_report", "load_report", "format_table",
           "NoFractionalVariables", "MissingMipOptimum", "ZeroAlpha",
           "COLUMNS", "METADATA"]
