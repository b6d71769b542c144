"""
Unit tests for the binomial kernel and its exact-rational mode.
Run: pytest tests/test_binom.py -v
"""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from batchvote.binom import (
    combinatorial_identity_check,
    exact_majority_tail,
    exact_tail_rational,
    majority_tail,
    minority_tail,
    pmf,
    pmf_vector,
    stable_sum,
    sum_min_check,
    tail,
)
from batchvote.errors import DomainError
from batchvote.models import BinomialSpec


class TestPmf:
    """Point probabilities."""

    def test_small_case(self):
        assert pmf(BinomialSpec(n=3, p=0.6), 2) == pytest.approx(0.432, abs=1e-15)

    def test_sums_to_one(self):
        assert stable_sum(pmf_vector(345, 0.6)) == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("y", [-1, 4])
    def test_off_support(self, y):
        with pytest.raises(DomainError):
            pmf(BinomialSpec(n=3, p=0.6), y)

    def test_cached_vector_is_read_only(self):
        with pytest.raises(ValueError):
            pmf_vector(5, 0.6)[0] = 1.0

    def test_stable_sum_empty(self):
        assert stable_sum(np.array([])) == 0.0


class TestMajorityTail:
    """P(X_K >= (K+1)/2)."""

    @pytest.mark.parametrize(
        "k, q, expected",
        [(1, 0.6, 0.6), (3, 0.6, 0.648), (5, 0.6, 0.68256), (7, 0.6, 0.710208), (1, 0.83, 0.83)],
    )
    def test_values(self, k, q, expected):
        assert majority_tail(k, q) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("k", [0, 2, 10])
    def test_even_batches_rejected(self, k):
        with pytest.raises(DomainError):
            majority_tail(k, 0.6)

    @pytest.mark.parametrize("k", [1, 3, 51, 199])
    def test_complements(self, k):
        assert majority_tail(k, 0.7) + minority_tail(k, 0.7) == pytest.approx(1.0, abs=1e-14)

    def test_increasing_in_k(self):
        for q in (0.51, 0.6, 0.9):
            tails = [majority_tail(k, q) for k in range(1, 60, 2)]
            assert all(a < b for a, b in zip(tails, tails[1:]))

    def test_minority_keeps_relative_precision(self):
        exact = 1 - exact_majority_tail(101, Fraction(9, 10))
        assert minority_tail(101, 0.9) == pytest.approx(float(exact), rel=1e-12)

    @pytest.mark.parametrize("k", list(range(1, 100, 14)))
    def test_matches_exact_mode(self, k):
        exact = exact_tail_rational(k, 3, 5, (k + 1) // 2)
        assert majority_tail(k, 0.6) == pytest.approx(float(exact), rel=1e-13)


class TestGeneralTail:
    """P(X >= threshold) for real thresholds."""

    def test_threshold_rounds_up(self):
        assert tail(BinomialSpec(n=3, p=0.6), 1.5) == pytest.approx(0.648, abs=1e-15)

    def test_degenerate_thresholds(self):
        spec = BinomialSpec(n=10, p=0.6)
        assert tail(spec, 0) == 1.0
        assert tail(spec, -4.2) == 1.0
        assert tail(spec, 10.5) == 0.0


class TestExactMode:
    """Rational evaluation."""

    def test_small_value(self):
        assert exact_tail_rational(3, 3, 5, 2) == Fraction(81, 125)

    def test_cap(self):
        with pytest.raises(DomainError):
            exact_tail_rational(101, 3, 5, 51)

    @pytest.mark.parametrize("num, den", [(0, 5), (5, 5), (6, 5), (1, 0)])
    def test_bad_probability(self, num, den):
        with pytest.raises(DomainError):
            exact_tail_rational(3, num, den, 2)


class TestIdentities:
    """Combinatorial identity and the ratio inequality."""

    def test_identity_holds(self):
        assert all(combinatorial_identity_check(k, y) for k in range(1, 61) for y in range(1, k + 1))

    @pytest.mark.parametrize("k, y", [(61, 3), (5, 0), (5, 6)])
    def test_identity_domain(self, k, y):
        with pytest.raises(DomainError):
            combinatorial_identity_check(k, y)

    @given(
        pairs=st.lists(
            st.tuples(st.floats(min_value=1e-6, max_value=1e6), st.floats(min_value=1e-6, max_value=1e6)),
            min_size=1,
            max_size=12,
        )
    )
    def test_sum_min(self, pairs):
        a, b = zip(*pairs)
        assert sum_min_check(list(a), list(b))

    def test_sum_min_rejects_non_positive(self):
        with pytest.raises(DomainError):
            sum_min_check([1.0, 0.0], [1.0, 1.0])
        with pytest.raises(DomainError):
            sum_min_check([], [])
