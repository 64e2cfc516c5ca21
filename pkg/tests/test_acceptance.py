"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even under
capture) or directly with ``python tests/test_acceptance.py``. The instance
runs for criterion 5 are marked ``slow``.
"""

import json
import random
import time
from fractions import Fraction as F
from itertools import combinations
from importlib.resources import files

import flint
import pytest

from gen import random_case
from cutlab.cglp import CglpSolution, Cut, classify_basis, detect_split, generate_cut, support_N
from cutlab.disjunction import LOW, simple_tbranch
from cutlab.experiment import RunConfig, run_first_round_detailed
from cutlab.instance import load_fixture, model_from_dict, read_model, to_standard_form
from cutlab.intersection import ApexNotInterior, reconstruct, verify_theorem1
from cutlab.rcv import (REGULAR, STRICTLY_IRREGULAR, UNKNOWN, is_cut_regular,
                        oracle_extended_regular)
from cutlab.simplex import cone_at_basis

FIXTURES = files("cutlab") / "fixtures"
DATA = files("cutlab") / "data"


@pytest.fixture
def report(capsys):
    def emit(cid, ok, detail):
        with capsys.disabled():
            print(f"\n[{cid}] {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return emit


def _fig1(extra=()):
    data = json.loads((FIXTURES / "fig1.json").read_text())
    for cut in extra:
        data["constraints"].append({"coeffs": {str(j): str(a) for j, a in enumerate(cut.alpha)},
                                    "sense": ">=", "rhs": str(cut.beta)})
    return to_standard_form(model_from_dict(data), "auto")


def _cut(name):
    d = json.loads((FIXTURES / name).read_text())
    return Cut(tuple(F(a) for a in d["alpha"]), F(d["beta"]))


def test_c1_fig1_end_to_end(report):
    start = time.monotonic()
    d = simple_tbranch([0, 1], 2)
    z, a = _cut("z.json"), _cut("a.json")
    before = is_cut_regular(z, None, _fig1(), d, 0)
    after = is_cut_regular(z, None, _fig1([a]), d, 0)
    elapsed = time.monotonic() - start
    ok = before.kind == STRICTLY_IRREGULAR and after.kind == REGULAR and elapsed < 5
    report("C1", ok, f"Z before: {before.kind}; after adding {[str(x) for x in a.alpha]} >= {a.beta}: "
                     f"{after.kind} witness {after.witness_N}; {elapsed:.2f}s")
    assert ok


def test_c2_oracle_equivalence(report):
    start = time.monotonic()
    rng = random.Random(2024)
    cases = agree = 0
    while cases < 200:
        _, sf, xbar, d = random_case(rng, max_n=4, max_m=5)
        found = generate_cut(sf, d, xbar)
        if found is None:
            continue
        cut, _ = found
        cases += 1
        v = is_cut_regular(cut, None, sf, d, 0)
        agree += v.kind != UNKNOWN and (v.kind == REGULAR) == oracle_extended_regular(cut, sf, d, 0)
    elapsed = time.monotonic() - start
    ok = agree == cases and elapsed < 600
    report("C2", ok, f"{agree}/{cases} cuts agree with the brute-force oracle; {elapsed:.0f}s")
    assert ok


def _flint_regular(sf, u):
    N = set(support_N(u))
    rows = sf.A_tilde.to_rows()
    for J in combinations(range(sf.q), sf.n):
        if N <= set(J):
            M = flint.fmpq_mat([[flint.fmpq(x.numerator, x.denominator) for x in rows[j]] for j in J])
            if M.det() != 0:
                return True
    return False


def test_c3_basis_classification(report):
    rng = random.Random(3)
    total = agree = 0
    while total < 500:
        _, sf, xbar, d = random_case(rng, max_n=5, max_m=4)
        if sf.q > 12:
            continue
        found = generate_cut(sf, d, xbar)
        if found is None:
            continue
        _, sol = found
        total += 1
        agree += classify_basis(sol, sf).regular == _flint_regular(sf, sol.u)
    ok = agree == total
    report("C3", ok, f"{agree}/{total} basic CGLP solutions match determinant enumeration")
    assert ok


def _regular_solutions():
    """Regular basic CGLP solutions from every fixture and a seeded random suite."""
    A, B = (F(3, 8), F(5, 8)), (F(21, 16), F(15, 16))
    for name in ("fig1.json", "fig1_bounded.json"):
        sf = to_standard_form(load_fixture((FIXTURES / name).read_text()), "auto")
        for K in ([0], [1], [0, 1]):
            d = simple_tbranch(K, 2)
            for point in (A, B):
                found = generate_cut(sf, d, point)
                if found and not found[1].flagged and classify_basis(found[1], sf).regular:
                    yield sf, d, found[1]
    rng = random.Random(4)
    for _ in range(150):
        _, sf, xbar, d = random_case(rng, max_n=4, max_m=4)
        found = generate_cut(sf, d, xbar)
        if found and not found[1].flagged and classify_basis(found[1], sf).regular:
            yield sf, d, found[1]


def test_c4_reconstruction(report):
    seen = fails = 0
    for sf, d, sol in _regular_solutions():
        seen += 1
        try:
            fails += not reconstruct(sol, sf, d).equivalent
        except ApexNotInterior:
            fails += 1
    ok = fails == 0 and seen > 0
    report("C4", ok, f"{seen - fails}/{seen} regular solutions reconstructed exactly")
    assert ok


def _instance_row(name):
    path = DATA / f"{name}.mps.gz"
    if not path.is_file():
        return None, None
    model = read_model(str(path))
    rows, records, _ = run_first_round_detailed(model, RunConfig(k_sizes=(2,), epsilon=F(1, 10000)))
    return rows[0], records[2]


BM23_MISSING = pytest.mark.xfail(strict=True, reason="bm23 is not bundled and cannot be "
                                                    "fetched offline; see the decisions ledger")


@pytest.mark.slow
@pytest.mark.parametrize("name", [pytest.param("bm23", marks=BM23_MISSING), "markshare1"])
def test_c5_robust_rows(report, name):
    start = time.monotonic()
    row, recs = _instance_row(name)
    if row is None:
        report(f"C5 {name}", False, "instance file not available offline")
        pytest.fail(f"{name} missing")
    n = len(recs)
    elapsed = time.monotonic() - start
    ok = (n == 15 and row.bases_irregular == n and row.cuts_irregular == n and elapsed < 900)
    report(f"C5 {name}", ok,
           f"{n} cuts, irregular bases {row.bases_irregular}/{n}, irregular cuts "
           f"{row.cuts_irregular}/{n} (regular {row.cuts_regular}, unknown {row.cuts_unknown}); "
           f"{elapsed:.0f}s")
    assert ok


@pytest.mark.slow
@pytest.mark.parametrize("name", ["stein27", "p0033"])
def test_c5_accounting(report, name):
    model = read_model(str(DATA / f"{name}.mps.gz"))
    rows, records, xbar = run_first_round_detailed(model, RunConfig(subset_cap=3, time_limit_per_cut=60))
    row, recs = rows[0], records[2]
    ok = (row.bases_regular + row.bases_irregular == len(recs)
          and row.cuts_regular + row.cuts_irregular + row.cuts_unknown == len(recs)
          and row.split_count <= row.bases_regular + row.bases_irregular
          and all(r.verdict.kind == REGULAR for r in recs if r.basis_regular))
    report(f"C5 {name}", ok, f"accounting identities on {len(recs)} cuts "
                             f"(reg {row.cuts_regular}, irr {row.cuts_irregular}, unk {row.cuts_unknown})")
    assert ok


def test_c6_termination_and_invariants(report):
    rng = random.Random(6)
    checked = bad = 0
    for _ in range(120):
        _, sf, xbar, d = random_case(rng, max_n=3, max_m=4)
        found = generate_cut(sf, d, xbar)
        if found is None:
            continue
        cut, _ = found
        v = is_cut_regular(cut, None, sf, d, 0)
        scaled = is_cut_regular(Cut(tuple(7 * a for a in cut.alpha), 7 * cut.beta), None, sf, d, 0)
        wide = is_cut_regular(cut, None, sf, d, F(1, 20))
        checked += 1
        bad += (v.loop_count != v.pool_size + 1 or scaled.kind != v.kind
                or (v.kind == REGULAR and wide.kind != REGULAR))
    ok = bad == 0 and checked > 0
    report("C6", ok, f"{checked - bad}/{checked} cuts: loop count = pool + 1, scaling and "
                     f"epsilon invariants hold")
    assert ok


def _slab_solution(sf, d, J, k):
    """Analytic CGLP multipliers of the split cut on x_k from the cone at J."""
    cone = cone_at_basis(sf, J)
    xk = cone.apex[k]
    lo, hi = 1 / xk, 1 / (1 - xk)
    # surplus form: sum_j s_j / lambda_j >= 1
    inv = {}
    for j, ray in cone.rays.items():
        r = ray[k]
        inv[j] = r / (1 - xk) if r > 0 else (-r / xk if r < 0 else F(0))
    ulist, vlist = [], []
    for term in d.terms:
        side = dict(term.labels)[k]
        ut = [F(0)] * sf.q
        if side == LOW:
            for j, ray in cone.rays.items():
                ut[j] = inv[j] + ray[k] / xk
            vt = [lo if lab == (k, side) else F(0) for lab in term.labels]
        else:
            for j, ray in cone.rays.items():
                ut[j] = inv[j] - ray[k] / (1 - xk)
            vt = [hi if lab == (k, side) else F(0) for lab in term.labels]
        ulist.append(ut)
        vlist.append(vt)
    alpha = [sum((inv[j] * sf.A_tilde[j, c] for j in J), F(0)) for c in range(sf.n)]
    beta = 1 + sum((inv[j] * sf.b_tilde[j] for j in J), F(0))
    scale = sum(sum(ut) + sum(vt) for ut, vt in zip(ulist, vlist))
    return CglpSolution([a / scale for a in alpha], beta / scale,
                        [[x / scale for x in ut] for ut in ulist],
                        [[x / scale for x in vt] for vt in vlist])


def test_c7_split_detection(report):
    rng = random.Random(7)
    slabs = slab_ok = multi = multi_ok = 0
    while slabs < 60:
        _, sf, xbar, d2 = random_case(rng, max_n=4, max_m=4)
        found = generate_cut(sf, d2, xbar)
        if found is None:
            continue
        sol = found[1]
        basis = classify_basis(sol, sf)
        if not basis.regular:
            continue
        J = reconstruct(sol, sf, d2).J if not sol.flagged else None
        if J is None:
            continue
        apex = cone_at_basis(sf, J).apex
        for k in d2.K:
            if not 0 < apex[k] < 1:
                continue
            for d in (simple_tbranch([k], sf.n), d2):
                s = _slab_solution(sf, d, J, k)
                if not s.check_feasible(sf, d):
                    continue
                slabs += 1
                slab_ok += detect_split(s, d) == k and verify_theorem1(s, sf, d)
        if any(sum(x > 0 for x in vt) > 1 for vt in sol.v):
            multi += 1
            multi_ok += detect_split(sol, d2) is None
    ok = slab_ok == slabs and multi_ok == multi and slabs > 0
    report("C7", ok, f"{slab_ok}/{slabs} slab solutions split and reconstructed; "
                     f"{multi_ok}/{multi} multi-row solutions rejected")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
