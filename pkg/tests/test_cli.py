import json
import random
import subprocess
import sys

import pytest

from gen import random_case
from cutlab.cli import main
from cutlab.instance import dump_fixture


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_no_subcommand(capsys):
    code, _, err = run([], capsys)
    assert code == 1 and "usage" in err


def test_bad_flag(capsys):
    assert run(["analyze", "--bogus"], capsys)[0] == 1


def test_missing_file(capsys, tmp_path):
    code, _, err = run(["show-lp", "--input", str(tmp_path / "none.json")], capsys)
    assert code == 2 and err.startswith("cutlab:")


def test_malformed_fixture(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{")
    assert run(["show-lp", "--input", str(p)], capsys)[0] == 2


def test_show_lp(capsys, fixture_path):
    code, out, _ = run(["show-lp", "--input", fixture_path("fig1.json")], capsys)
    data = json.loads(out)
    assert code == 0
    assert data["x"] == ["21/16", "15/16"] and data["objective"] == "-6" and data["q"] == 3


def test_verify_cut_z(capsys, fixture_path):
    code, out, _ = run(["verify-cut", "--instance", fixture_path("fig1.json"),
                        "--cut", fixture_path("z.json"), "--disjunction", fixture_path("d.json")],
                       capsys)
    data = json.loads(out)
    assert code == 0
    assert (data["cut_id"], data["kind"], data["theta"]) == ("z", "StrictlyIrregular", "0")


def test_oracle(capsys, fixture_path):
    code, out, _ = run(["oracle", "--instance", fixture_path("fig1.json"),
                        "--cut", fixture_path("a.json"), "--disjunction", fixture_path("d.json")],
                       capsys)
    assert code == 0 and json.loads(out) == {"extended_regular": True, "witnesses": [[0, 1]]}


def test_dimension_mismatch(capsys, fixture_path, tmp_path):
    d = tmp_path / "d3.json"
    d.write_text('{"n": 3, "K": [0, 1]}')
    code, _, _ = run(["verify-cut", "--instance", fixture_path("fig1.json"),
                      "--cut", fixture_path("z.json"), "--disjunction", str(d)], capsys)
    assert code == 2


def test_analyze_reports(capsys, tmp_path):
    model, *_ = random_case(random.Random(5), max_n=4, max_m=3)
    inst = tmp_path / "m.json"
    inst.write_text(dump_fixture(model))
    outs = []
    for i in range(2):
        rep = tmp_path / f"r{i}.csv"
        code, table, _ = run(["analyze", "--input", str(inst), "--out", str(rep)], capsys)
        assert code == 0 and table.splitlines()[0].split()[0] == "instance"
        outs.append(rep.read_text())
    assert outs[0] == outs[1]
    rep = tmp_path / "r.json"
    assert run(["analyze", "--input", str(inst), "--out", str(rep)], capsys)[0] == 0
    assert set(json.loads(rep.read_text())) == {"metadata", "rows"}


def test_module_entry(fixture_path):
    res = subprocess.run([sys.executable, "-m", "cutlab", "show-lp", "--input",
                          fixture_path("fig1_bounded.json")], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["q"] == 5


@pytest.mark.parametrize("k", ["1", "x"])
def test_bad_k(capsys, tmp_path, k):
    model, *_ = random_case(random.Random(5), max_n=4, max_m=3)
    inst = tmp_path / "m.json"
    inst.write_text(dump_fixture(model))
    assert run(["analyze", "--input", str(inst), "--k", k], capsys)[0] in (1, 2)
