import itertools
import math
import random

import numpy as np
import pytest

from lsgp.core import Algebra, UsageError
from lsgp.problems import (
    DataError, ParseError, ParitySpec, load_regression_csv, make_parity, make_quartic, quartic,
    write_regression_csv,
)

from .conftest import EVEN3_TABLE


def test_even3_matches_the_published_table():
    t = make_parity(3)
    rows = [tuple(int(v) for v in xs) + (int(f),) for xs, f in zip(t.inputs, t.targets)]
    assert rows == EVEN3_TABLE


def test_small_parities():
    t1 = make_parity(1)
    assert t1.inputs[:, 0].tolist() == [0, 1]
    assert t1.targets.tolist() == [1, 0]
    assert make_parity(2).targets.tolist() == [1, 0, 0, 1]


def test_parity_range():
    with pytest.raises(UsageError):
        make_parity(0)
    with pytest.raises(UsageError):
        ParitySpec(21)


@pytest.mark.parametrize("k", range(1, 9))
def test_parity_against_enumeration(k):
    t = make_parity(k)
    assert t.m == 2 ** k and t.n == k
    expected = list(itertools.product((0, 1), repeat=k))
    assert [tuple(r) for r in t.inputs.tolist()] == expected
    assert len(set(expected)) == 2 ** k
    assert t.targets[0] == 1
    assert t.targets.tolist() == [int(sum(r) % 2 == 0) for r in expected]


@pytest.mark.parametrize("k", range(1, 7))
def test_single_bit_flip_flips_parity(k):
    t = make_parity(k)
    index = {tuple(r): f for r, f in zip(t.inputs.tolist(), t.targets.tolist())}
    for row, f in index.items():
        for j in range(k):
            flipped = list(row)
            flipped[j] ^= 1
            assert index[tuple(flipped)] == 1 - f


def test_quartic_values():
    assert quartic(0.0) == 0.0
    assert quartic(1.0) == 4.0
    assert quartic(-1.0) == 0.0


def test_make_quartic():
    t = make_quartic(20, random.Random(3))
    assert (t.m, t.n, t.algebra) == (20, 1, Algebra.ARITHMETIC)
    assert np.all(np.abs(t.inputs) <= 1.0)
    assert np.allclose(t.targets, quartic(t.inputs[:, 0]))
    with pytest.raises(UsageError):
        make_quartic(0, random.Random(0))


def test_csv_single_row(tmp_path):
    p = tmp_path / "one.csv"
    p.write_text("1.0,2.0,3.0\n")
    t = load_regression_csv(p, 2)
    assert t.m == 1
    assert t.inputs[0].tolist() == [1.0, 2.0]
    assert t.targets.tolist() == [3.0]


def test_csv_header_and_crlf(tmp_path):
    p = tmp_path / "h.csv"
    p.write_bytes(b"x1,f\r\n0.5,1.5\r\n-1,0\r\n")
    t = load_regression_csv(p, 1)
    assert t.inputs[:, 0].tolist() == [0.5, -1.0]


def test_csv_empty_file(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("")
    with pytest.raises(DataError):
        load_regression_csv(p, 1)


def test_csv_malformed_row_reports_row(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1,2\n3,oops\n")
    with pytest.raises(ParseError) as info:
        load_regression_csv(p, 1)
    assert info.value.row == 2
    p.write_text("1,2\n1,2,3\n")
    with pytest.raises(ParseError):
        load_regression_csv(p, 1)


def test_csv_non_finite(tmp_path):
    p = tmp_path / "nan.csv"
    p.write_text("1,nan\n")
    with pytest.raises(DataError):
        load_regression_csv(p, 1)


def test_quartic_round_trip(tmp_path):
    t = make_quartic(20, random.Random(11))
    p = tmp_path / "q.csv"
    write_regression_csv(p, t)
    back = load_regression_csv(p, 1)
    assert np.array_equal(back.inputs, t.inputs)
    assert np.array_equal(back.targets, t.targets)
    assert all(math.isfinite(v) for v in back.targets)
