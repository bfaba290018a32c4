"""Digit expansions, radical inverses, and stratum bookkeeping."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from haltongain import (
    DigitVector,
    PrecisionError,
    default_precision,
    digits_of,
    first_primes,
    halton_points,
    radical_inverse,
    residue_match,
    stratum_counts,
    stratum_index,
    stratum_occupancy,
)

SMALL_PRIMES = (2, 3, 5, 7, 11, 13)


@given(
    st.integers(min_value=0, max_value=2**32 - 1),
    st.sampled_from(SMALL_PRIMES),
)
def test_digit_round_trip(i, base):
    p = default_precision(base)
    dv = digits_of(i, base, p)
    assert dv.index() == i
    assert len(dv.digits) == p
    assert all(0 <= a < base for a in dv.digits)


def test_van_der_corput_base2():
    want = [
        Fraction(0),
        Fraction(1, 2),
        Fraction(1, 4),
        Fraction(3, 4),
        Fraction(1, 8),
        Fraction(5, 8),
        Fraction(3, 8),
        Fraction(7, 8),
    ]
    assert [radical_inverse(i, 2) for i in range(8)] == want


def test_radical_inverse_base3():
    assert radical_inverse(5, 3) == Fraction(7, 9)
    assert radical_inverse(4, 3) == Fraction(4, 9)


@given(
    st.integers(min_value=0, max_value=10**6),
    st.sampled_from((2, 3, 5, 7)),
)
def test_radical_inverse_digit_reversal(i, base):
    # Independent oracle: write i in base b, reverse the digit string.
    s = ""
    rem = i
    while rem:
        rem, a = divmod(rem, base)
        s = str(a) + s
    if not s:
        s = "0"
    assert radical_inverse(i, base) == Fraction(int(s[::-1], base), base ** len(s))


def test_digit_vector_fraction_and_float():
    dv = DigitVector(2, (1, 0, 1))
    assert dv.fraction() == Fraction(5, 8)
    assert dv.float() == 0.625
    assert dv.precision == 3
    assert dv.index() == 5


def test_precision_guard():
    with pytest.raises(PrecisionError):
        digits_of(8, 2, 3)
    digits_of(7, 2, 3)


def test_default_precision_covers_64_bit_indices():
    for b in SMALL_PRIMES:
        p = default_precision(b)
        assert b**p >= 2**64
        assert b ** (p - 1) < 2**64


def test_first_points(basis3):
    pts = halton_points(basis3, 0, 2)
    assert pts.coords[0] == (0.0, 0.0, 0.0)
    assert pts.coords[1] == (0.5, 1 / 3, 0.2)
    assert pts.digits[1][0].digits[0] == 1
    assert pts.dimension == 3
    assert pts.bases == (2, 3, 5)


def test_point_fractions_match_radical_inverse(basis3):
    pts = halton_points(basis3, 37, 20)
    for p in range(pts.count):
        i = 37 + p
        for c, dv in enumerate(pts.digits[p]):
            assert dv.fraction() == radical_inverse(i, pts.bases[c])


def test_float_realization_error(basis3):
    pts = halton_points(basis3, 1000, 50)
    for p in range(pts.count):
        for c, dv in enumerate(pts.digits[p]):
            x = pts.coords[p][c]
            assert 0.0 <= x < 1.0
            assert abs(x - float(dv.fraction())) < 2.0**-50


def test_column_permutation(basis3):
    plain = halton_points(basis3, 5, 4)
    swapped = halton_points(basis3, 5, 4, permutation=[2, 1, 3])
    assert swapped.bases == (3, 2, 5)
    for p in range(4):
        assert swapped.coords[p][0] == plain.coords[p][1]
        assert swapped.coords[p][1] == plain.coords[p][0]
    with pytest.raises(ValueError):
        halton_points(basis3, 0, 2, permutation=[1, 1, 2])


def test_precision_override(basis3):
    pts = halton_points(basis3, 0, 4, precision={1: 3})
    assert pts.digits[0][0].precision == 3
    with pytest.raises(PrecisionError):
        halton_points(basis3, 6, 4, precision={1: 3})
    with pytest.raises(ValueError):
        halton_points(basis3, 0, 4, precision={1: 0})


def test_point_count_validation(basis3):
    with pytest.raises(ValueError):
        halton_points(basis3, 0, 0)
    with pytest.raises(ValueError):
        halton_points(basis3, -1, 2)


@given(
    st.integers(min_value=0, max_value=3**6 - 1),
    st.integers(min_value=0, max_value=4),
)
def test_stratum_index_is_scaled_floor(i, k):
    dv = digits_of(i, 3, 6)
    (r,) = stratum_index([dv], [k])
    assert r == math.floor(dv.fraction() * 3**k)


def test_stratum_index_validation():
    dv = digits_of(3, 2, 4)
    with pytest.raises(ValueError):
        stratum_index([dv], [1, 2])
    with pytest.raises(ValueError):
        stratum_index([dv], [-1])
    with pytest.raises(PrecisionError):
        stratum_index([dv], [5])


def test_residue_match_is_interval_agreement():
    for i in range(54):
        xi = radical_inverse(i, 3)
        for i2 in range(54):
            x2 = radical_inverse(i2, 3)
            for r in range(4):
                same_box = math.floor(xi * 3**r) == math.floor(x2 * 3**r)
                assert residue_match(i, i2, 3, r) == same_box


def test_stratum_counts_match_occupancy(basis3):
    levels = (1, 2, 2)
    counts = stratum_counts(basis3, 117, 300, levels)
    pts = halton_points(basis3, 117, 300)
    assert counts == stratum_occupancy(pts, levels)
    assert sum(counts.values()) == 300


def test_one_dimensional_window_balance():
    basis = first_primes(1)
    for start in (0, 3, 11):
        counts = stratum_counts(basis, start, 8, (3,))
        assert sorted(counts) == [(r,) for r in range(8)]
        assert set(counts.values()) == {1}


def test_full_window_balance(basis3):
    # One full cycle of 2 * 9 * 25 indices hits every box exactly once.
    counts = stratum_counts(basis3, 12345, 450, (1, 2, 2))
    assert len(counts) == 450
    assert set(counts.values()) == {1}
