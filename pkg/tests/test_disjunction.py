import json
from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cutlab.disjunction import (HIGH, LOW, EmptyK, check_excludes, disjunction_from_dict,
                                disjunction_to_dict, enumerate_subsets, label_row, load_disjunction,
                                simple_tbranch)
from cutlab.instance import SchemaError


def test_two_branch_shape():
    d = simple_tbranch([1, 2], 4)
    assert len(d.terms) == 4 and d.r == 2 and d.K == (1, 2)
    assert d.terms[0].labels == ((1, LOW), (2, LOW))
    assert d.terms[3].labels == ((1, HIGH), (2, HIGH))


def test_single_split():
    d = simple_tbranch([0], 1)
    assert [(t.D.to_rows(), t.d) for t in d.terms] == [([[-1]], (0,)), ([[1]], (1,))]


def test_empty_and_bad_k():
    with pytest.raises(EmptyK):
        simple_tbranch([], 3)
    with pytest.raises(ValueError):
        simple_tbranch([3], 3)
    with pytest.raises(ValueError):
        simple_tbranch([1, 1], 3)


@given(st.integers(1, 6))
def test_partition_property(t):
    """Every 0/1 assignment of K satisfies exactly one term."""
    n = t + 1
    d = simple_tbranch(range(t), n)
    assert len(d.terms) == 2 ** t
    for bits in product((0, 1), repeat=t):
        x = [F(b) for b in bits] + [F(1, 2)]
        assert len(d.satisfied_by(x)) == 1


@given(st.integers(1, 4), st.integers(0, 5))
def test_labels_round_trip(t, extra):
    n = t + extra
    d = simple_tbranch(range(t), n)
    for term in d.terms:
        for i, (k, side) in enumerate(term.labels):
            row, rhs = label_row(k, side, n)
            assert list(term.D.row(i)) == row and term.d[i] == rhs


def test_enumerate_subsets():
    assert len(enumerate_subsets(range(6), 2)) == 15
    assert enumerate_subsets([1, 2], 3) == []
    assert enumerate_subsets([5, 1, 3, 2], 2, cap=3) == [(1, 2), (1, 3), (1, 5)]


def test_check_excludes():
    assert check_excludes(simple_tbranch([0], 1), [F(1, 2)])
    assert not check_excludes(simple_tbranch([0], 1), [F(1)])
    assert not check_excludes(simple_tbranch([0], 1), [F(0)])
    # B = (21/16, 15/16): x1 ≥ 1 holds but 0 < x2 < 1 fails both x2 sides, so every term is violated
    assert check_excludes(simple_tbranch([0, 1], 2), [F(21, 16), F(15, 16)])


def test_json_forms():
    d = simple_tbranch([0, 2], 3)
    assert disjunction_to_dict(d) == {"n": 3, "K": [0, 2]}
    assert load_disjunction(json.dumps(disjunction_to_dict(d))) == d
    explicit = {"n": 2, "terms": [{"rows": [{"coeffs": {"0": "1", "1": "1"}, "rhs": "1"}]},
                                  {"rows": [{"coeffs": {"0": "-1", "1": "-1"}, "rhs": "0"}]}]}
    e = disjunction_from_dict(explicit)
    assert not e.labelled and e.r == 1
    assert disjunction_from_dict(disjunction_to_dict(e)) == e


@pytest.mark.parametrize("bad", ['{"K": [0]}', '{"n": 2, "K": []}', '{"n": 2, "terms": []}', "[",
                                 '{"n": 1, "terms": [{"rows": [{"coeffs": {"3": "1"}, "rhs": "0"}]}]}'])
def test_json_errors(bad):
    with pytest.raises(SchemaError):
        load_disjunction(bad)
