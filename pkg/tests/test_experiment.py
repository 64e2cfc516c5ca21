import math
import random
from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen import random_model
from cutlab.cglp import Cut
from cutlab.experiment import (COLUMNS, MissingMipOptimum, NoFractionalVariables, ReportRow,
                               RunConfig, ZeroAlpha, cut_distance, format_table, gap_closed,
                               load_report, run_first_round, run_first_round_detailed,
                               write_report)
from cutlab.instance import load_fixture, to_standard_form
from cutlab.rcv import REGULAR
from cutlab.simplex import OPTIMAL, solve_relaxation


def test_gap_closed():
    assert gap_closed(0, 0, 4) == 0
    assert gap_closed(0, 4, 4) == 1
    assert gap_closed(0, 1, 4) == F(1, 4)
    assert gap_closed(2, 7, 3) == 1
    assert gap_closed(3, 3, 3) == 0
    with pytest.raises(MissingMipOptimum):
        gap_closed(0, 1, None)


def test_cut_distance():
    assert cut_distance(Cut((F(1), F(0)), F(1)), (F(0), F(5))) == 1
    c = Cut((F(2), F(-2)), F(1))
    # A = (3/8, 5/8): violation 3/2 over norm 2√2
    assert cut_distance(c, (F(3, 8), F(5, 8))) == pytest.approx(1.5 / (2 * math.sqrt(2)))
    assert cut_distance(Cut((F(6), F(-6)), F(3)), (F(3, 8), F(5, 8))) == pytest.approx(
        cut_distance(c, (F(3, 8), F(5, 8))))
    with pytest.raises(ZeroAlpha):
        cut_distance(Cut((F(0), F(0)), F(1)), (F(0), F(0)))


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(k_sizes=(1,))
    with pytest.raises(ValueError):
        RunConfig(epsilon=F(-1))


def test_header_only_csv(tmp_path):
    p = tmp_path / "r.csv"
    write_report([], "csv", p)
    assert p.read_text() == ",".join(COLUMNS) + "\n"
    assert len(COLUMNS) == 13


def test_json_round_trip(tmp_path):
    row = ReportRow("x", 2, 4, 3, 3, 1, 2, 3, 1, F(1, 3), 0.25, F(1, 2), F(0))
    p = tmp_path / "r.json"
    write_report([row], "json", p)
    assert load_report(p) == [row]
    with pytest.raises(ValueError):
        write_report([row], "xml", p)
    assert format_table([row]).splitlines()[0].split() == list(COLUMNS)


def test_integral_lp_rejected(fixture_path):
    model = load_fixture("""{"variables": [{"name": "a", "lower": "0", "upper": "1", "kind": "binary"}],
        "constraints": [{"coeffs": {"0": "1"}, "sense": ">=", "rhs": "1"}],
        "objective": {"sense": "min", "c": ["1"]}}""")
    with pytest.raises(NoFractionalVariables):
        run_first_round(model)


def brute_force_optimum(model):
    """Enumerate 0/1 points; every variable in these models is binary."""
    best = None
    for bits in product((0, 1), repeat=len(model.variables)):
        if all(c.satisfied(bits) for c in model.constraints):
            z = sum(a * b for a, b in zip(model.objective.c, bits))
            best = z if best is None else min(best, z)
    return best


def fractional_case(rng):
    for _ in range(300):
        model = random_model(rng, rng.randint(3, 4), rng.randint(1, 3))
        sf = to_standard_form(model)
        lp = solve_relaxation(sf, model.objective.c)
        z = brute_force_optimum(model)
        if lp.status != OPTIMAL or z is None:
            continue
        if sum(0 < x < 1 for x in lp.x) >= 2:
            return model, z
    pytest.skip("no case")


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_report_accounting(seed):
    rng = random.Random(seed)
    model, z_mip = fractional_case(rng)
    rows, records, xbar = run_first_round_detailed(model, RunConfig(mip_optimum=z_mip))
    (row,) = rows
    recs = records[2]
    assert row.frac_var_count == sum(0 < x < 1 for x in xbar)
    assert row.bases_regular + row.bases_irregular == len(recs)
    assert row.cuts_regular + row.cuts_irregular + row.cuts_unknown == len(recs)
    assert row.split_count <= len(recs)
    # a regular CGLP basis already is a regular representation
    assert all(r.verdict.kind == REGULAR for r in recs if r.basis_regular)
    assert row.cuts_unknown == 0
    if recs:
        assert 0 <= row.total_gap_without <= row.total_gap_with <= 1
        assert all(0 <= r.gap <= 1 for r in recs)
        assert row.avg_distance > 0


def test_csv_and_determinism(tmp_path):
    model, z_mip = fractional_case(random.Random(11))
    cfg = RunConfig(mip_optimum=z_mip)
    rows = run_first_round(model, cfg)
    assert rows == run_first_round(model, cfg)
    p = tmp_path / "r.csv"
    write_report(rows, "csv", p)
    lines = p.read_text().splitlines()
    assert len(lines) == 2 and lines[1].startswith(f"rand,2,{rows[0].frac_var_count},")
    assert len(lines[1].split(",")) == 13
