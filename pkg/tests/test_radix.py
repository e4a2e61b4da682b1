import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vilenkin.radix import (
    IntervalZ,
    RadixSequence,
    digit_table,
    dotminus,
    dotplus,
    dotplus_array,
    from_digits,
    to_digits,
)

radices = st.lists(st.integers(2, 7), min_size=1, max_size=4)


class TestRadixSequence:
    def test_cumulative_products(self):
        R = RadixSequence((2, 3, 2))
        assert R.m == (1, 2, 6, 12)
        assert R.M == 12
        assert R.N == 2
        for k in range(R.levels):
            assert R.m[k] * R.p[k] == R.m[k + 1]

    @pytest.mark.parametrize("p", [(), (1, 2), (3, 0)])
    def test_rejects_bad_digits(self, p):
        with pytest.raises(ValueError):
            RadixSequence(p)

    def test_overflow_is_loud(self):
        with pytest.raises(OverflowError):
            RadixSequence((2,) * 70)

    def test_json_round_trip(self):
        R = RadixSequence((5, 3, 2))
        assert RadixSequence.from_json(R.to_json()) == R

    def test_json_rejects_non_integers(self):
        with pytest.raises(ValueError):
            RadixSequence.from_json('[2, "3"]')


class TestDigits:
    def test_examples(self):
        assert to_digits(7, (2, 3, 2)) == (1, 0, 1)
        assert to_digits(11, (2, 3, 2)) == (1, 2, 1)
        assert to_digits(0, (5, 4)) == (0, 0)
        assert from_digits((1, 0, 1), (2, 3, 2)) == 7
        assert from_digits((1, 2, 1), (2, 3, 2)) == 11
        assert from_digits((0, 0, 0), (2, 3, 2)) == 0

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            to_digits(12, (2, 3, 2))
        with pytest.raises(ValueError):
            from_digits((2, 0, 0), (2, 3, 2))

    @given(radices, st.data())
    def test_round_trip(self, p, data):
        R = RadixSequence(tuple(p))
        n = data.draw(st.integers(0, R.M - 1))
        assert from_digits(to_digits(n, R), R) == n

    def test_bijection_exhaustive(self):
        R = RadixSequence((3, 2, 4))
        table = digit_table(R)
        assert len({tuple(row) for row in table}) == R.M
        np.testing.assert_array_equal([from_digits(row, R) for row in table], np.arange(R.M))


class TestGroupLaw:
    def test_examples(self):
        assert dotplus(3, 3, (2, 2, 2)) == 0
        assert dotplus(2, 2, (3, 2)) == 1
        assert dotminus(0, (3, 2)) == 0
        assert dotminus(5, (3, 2)) == 4

    def test_walsh_self_inverse(self):
        R = (2, 2)
        assert all(dotminus(n, R) == n for n in range(4))

    @pytest.mark.parametrize("p", [(2, 3, 2), (4, 4), (2, 2, 2, 2, 2, 2), (5, 7)])
    def test_abelian_group_exhaustive(self, p):
        R = RadixSequence(p)
        n = np.arange(R.M)
        table = dotplus_array(n[:, None], n[None, :], R)
        np.testing.assert_array_equal(table, table.T)
        np.testing.assert_array_equal(table[:, 0], n)
        # associativity: (a + b) + c == a + (b + c)
        np.testing.assert_array_equal(table[table, :], table[:, table])
        for a in n:
            assert dotplus(int(a), dotminus(int(a), R), R) == 0

    def test_dotplus_array_matches_scalar(self):
        R = (3, 2, 2)
        for a, b in itertools.product(range(12), repeat=2):
            assert dotplus_array(a, b, R) == dotplus(a, b, R)


class TestIntervalZ:
    def test_basic(self):
        iv = IntervalZ(3, 7)
        assert len(iv) == 4 and 3 in iv and 7 not in iv
        assert list(iv.as_range()) == [3, 4, 5, 6]
        assert IntervalZ(2, 2).empty

    def test_invalid(self):
        with pytest.raises(ValueError):
            IntervalZ(5, 4)
