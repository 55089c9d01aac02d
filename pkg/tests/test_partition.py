import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kerflab.partition import (
    as_point,
    cell_index,
    cell_indices,
    composition_count,
    compositions,
    match_depth,
    multinomial_int,
    multinomial_weight,
    same_cell_1d,
)

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
depths = st.integers(min_value=0, max_value=24)


class TestCellIndex:
    def test_hand_values(self):
        assert cell_index(0.3, 1) == 1
        assert cell_index(0.0, 5) == 1
        assert cell_index(0.5, 1) == 1
        assert cell_index(1.0, 1) == 2

    def test_zero_depth_single_cell(self):
        assert cell_index(0.0, 0) == 1
        assert cell_index(1.0, 0) == 1

    def test_interval_convention(self):
        # cells are ((m-1)/2**c, m/2**c]: exact midpoints go to the lower cell
        assert cell_index(0.25, 2) == 1
        assert cell_index(0.25 + 1e-12, 2) == 2

    @pytest.mark.parametrize("t,c", [(-0.1, 1), (1.1, 1), (0.5, -1)])
    def test_domain_errors(self, t, c):
        with pytest.raises(ValueError):
            cell_index(t, c)

    @given(a=unit, b=unit, c=st.integers(min_value=0, max_value=30))
    def test_monotone_in_t(self, a, b, c):
        lo, hi = min(a, b), max(a, b)
        assert cell_index(lo, c) <= cell_index(hi, c)

    @given(t=unit, c=st.integers(min_value=0, max_value=30))
    def test_range(self, t, c):
        assert 1 <= cell_index(t, c) <= 2**c

    @given(ts=st.lists(unit, min_size=1, max_size=8), c=st.integers(min_value=0, max_value=20))
    def test_vectorized_matches_scalar(self, ts, c):
        got = cell_indices(np.array(ts), c)
        assert got.tolist() == [cell_index(t, c) for t in ts]


class TestSameCell:
    def test_hand_values(self):
        assert same_cell_1d(0.1, 0.2, 1)
        assert not same_cell_1d(0.6, 0.4, 1)

    @given(a=unit, c=st.integers(min_value=0, max_value=30))
    def test_reflexive(self, a, c):
        assert same_cell_1d(a, a, c)

    @given(a=unit, b=unit, c=st.integers(min_value=0, max_value=29))
    def test_refinement(self, a, b, c):
        # co-cell at depth c+1 implies co-cell at depth c
        if same_cell_1d(a, b, c + 1):
            assert same_cell_1d(a, b, c)

    @given(a=unit, b=unit, cap=st.integers(min_value=0, max_value=16))
    def test_match_depth_is_the_cut_point(self, a, b, cap):
        m = match_depth(a, b, cap)
        assert all(same_cell_1d(a, b, c) for c in range(m + 1))
        if m < cap:
            assert not same_cell_1d(a, b, m + 1)


class TestCompositions:
    def test_empty_budget(self):
        assert list(compositions(0, 3)) == [(0, 0, 0)]

    def test_colex_order_k2_d2(self):
        assert list(compositions(2, 2)) == [(2, 0), (1, 1), (0, 2)]

    def test_counts_match_binomial(self):
        for k in range(11):
            for d in range(1, 11):
                out = list(compositions(k, d))
                assert len(out) == composition_count(k, d)
                assert len(set(out)) == len(out)
                assert all(len(c) == d and sum(c) == k and min(c) >= 0 for c in out)

    def test_count_5_3(self):
        assert composition_count(5, 3) == 21

    def test_domain_error(self):
        with pytest.raises(ValueError):
            list(compositions(2, 0))
        with pytest.raises(ValueError):
            list(compositions(-1, 2))


class TestMultinomialWeight:
    def test_empty_counts(self):
        assert multinomial_weight((0, 0, 0), 3) == 1.0
        assert multinomial_weight((0,), 1) == 1.0

    def test_hand_value(self):
        assert multinomial_weight((1, 1), 2) == 0.5

    def test_coefficient_matches_factorials(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            d = int(rng.integers(1, 6))
            counts = rng.integers(0, 8, size=d)
            expect = math.factorial(int(counts.sum()))
            for c in counts:
                expect //= math.factorial(int(c))
            assert multinomial_int(counts.tolist()) == expect

    def test_normalization_sweep(self):
        # total weight of all compositions is 1 for every k <= 20, d <= 6
        for d in range(1, 7):
            for k in range(21):
                total = math.fsum(multinomial_weight(c, d) for c in compositions(k, d))
                assert abs(total - 1.0) <= 1e-12, (k, d)

    def test_log_space_path_matches_exact_rationals(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            d = int(rng.integers(2, 5))
            counts = rng.multinomial(35, [1.0 / d] * d)
            exact = Fraction(multinomial_int(counts.tolist()), d**35)
            got = multinomial_weight(counts.tolist(), d)
            assert got == pytest.approx(float(exact), rel=1e-10)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            multinomial_weight((1, -1), 2)
        with pytest.raises(ValueError):
            multinomial_weight((1, 1, 1), 2)


class TestAsPoint:
    def test_accepts_valid(self):
        out = as_point([0.0, 0.5, 1.0])
        assert out.shape == (3,)

    @pytest.mark.parametrize("bad", [[-0.1], [1.2], [[0.1, 0.2]], []])
    def test_rejects_invalid(self, bad):
        with pytest.raises(ValueError):
            as_point(bad)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            as_point([0.1, 0.2], d=3)
