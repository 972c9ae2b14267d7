import io
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from greedylds.core import (
    CandidateRational,
    PointSet,
    candidate_value,
    read_points,
    validate_point_set,
    write_points,
)


def test_single_point_valid():
    assert validate_point_set([[0.5]]).ok


def test_coordinate_one_rejected():
    v = validate_point_set([[1.0, 0.2]])
    assert not v.ok
    assert (v.violations[0].index, v.violations[0].coordinate) == (0, 0)


def test_mixed_dimensions_reported():
    v = validate_point_set([[0.3], [0.1, 0.2]])
    assert not v.ok
    assert any("dimension" in x.message for x in v.violations)


def test_negative_and_nan_reported():
    v = validate_point_set(np.array([[-0.1, 0.2], [0.3, np.nan]]))
    assert {(x.index, x.coordinate) for x in v.violations} == {(0, 0), (1, 1)}


def test_zero_allowed():
    assert validate_point_set([[0.0, 0.0]]).ok


def test_pointset_rejects_invalid():
    with pytest.raises(ValueError):
        PointSet([[0.2, 1.0]])


def test_pointset_immutable_and_prefix():
    ps = PointSet([[0.1, 0.2], [0.3, 0.4], [0.5, 0.6]])
    with pytest.raises(ValueError):
        ps.coords[0, 0] = 0.9
    head = ps[:2]
    assert isinstance(head, PointSet) and head.n == 2 and head.d == 2
    assert head == PointSet([[0.1, 0.2], [0.3, 0.4]])


def test_flat_array_is_one_dimensional():
    ps = PointSet(np.array([0.1, 0.2, 0.3]))
    assert ps.d == 1 and ps.n == 3


@pytest.mark.parametrize("num,den,value", [(1, 4, 0.25), (3, 4, 0.75), (5, 6, 0.8333333333333334)])
def test_candidate_value(num, den, value):
    # correctly rounded: 5/6 lies nearer ...334 than ...333
    got = candidate_value(CandidateRational(num, den))
    assert got == value == float(Fraction(num, den))


@pytest.mark.parametrize("num,den", [(2, 4), (1, 3), (5, 4), (1, 0)])
def test_candidate_rejects_bad_pairs(num, den):
    with pytest.raises(ValueError):
        CandidateRational(num, den)


@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_candidate_round_trip(n, i):
    i = i % (n + 1)
    c = CandidateRational.from_cell(i, n)
    assert (c.index, c.n) == (i, n)
    assert c.as_fraction() == Fraction(2 * i + 1, 2 * (n + 1))


def test_point_file_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    ps = PointSet(rng.random((20, 3)))
    path = tmp_path / "p.txt"
    write_points(ps, path, comments=["made by a test"])
    raw = path.read_bytes()
    assert b"\r" not in raw and raw.startswith(b"# made by a test\n")
    assert read_points(path) == ps


def test_point_file_17_digits():
    buf = io.StringIO()
    write_points(PointSet([[0.1]]), buf)
    assert buf.getvalue() == "0.10000000000000001\n"


def test_read_points_errors():
    with pytest.raises(ValueError, match="line 2"):
        read_points(io.StringIO("0.1\nabc\n"))
    with pytest.raises(ValueError):
        read_points(io.StringIO("0.1\n1.5\n"))
    with pytest.raises(ValueError):
        read_points(io.StringIO("# only comments\n"))
    assert read_points(io.StringIO(""), d=2).n == 0
