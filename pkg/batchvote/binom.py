"""
Binomial pmf / tail kernel with an exact-rational verification mode.

Floating values come from scipy's boost-backed binomial pmf (relative accuracy near
machine epsilon, no cancellation from log-gamma differences) and tails are summed
with math.fsum from the largest term downward. The exact mode sums the same series
over Fractions with arbitrary-precision integers.
"""

import math
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import stats

from batchvote.errors import DomainError
from batchvote.models import BinomialSpec

EXACT_MAX_K = 99
IDENTITY_MAX_K = 60


def _check_odd(k: int) -> None:
    if k < 1 or k % 2 == 0:
        raise DomainError(f"batch size must be odd and >= 1, got K={k}")


@lru_cache(maxsize=8192)
def pmf_vector(n: int, p: float) -> np.ndarray:
    """pmf over the whole support 0..n (read-only, cached)."""
    support = np.arange(n + 1)
    out = stats.binom.pmf(support, n, p).astype(np.float64)
    out.flags.writeable = False
    return out


def stable_sum(terms: np.ndarray) -> float:
    """Correctly rounded sum, largest term first."""
    if len(terms) == 0:
        return 0.0
    return math.fsum(np.sort(terms)[::-1])


def pmf(spec: BinomialSpec, y: int) -> float:
    """C(n,y) p^y (1-p)^(n-y)."""
    if y < 0 or y > spec.n:
        raise DomainError(f"y={y} outside support 0..{spec.n}")
    return float(pmf_vector(spec.n, spec.p)[y])


@lru_cache(maxsize=65536)
def _upper_sum(n: int, p: float, start: int) -> float:
    return stable_sum(pmf_vector(n, p)[start:])


def majority_tail(k: int, q: float) -> float:
    """P(X_K >= (K+1)/2) for X_K ~ Binomial(K, q)."""
    _check_odd(k)
    return _upper_sum(k, q, (k + 1) // 2)


def minority_tail(k: int, q: float) -> float:
    """P(X_K <= (K-1)/2), summed directly so it keeps relative precision when tiny."""
    _check_odd(k)
    return _upper_sum(k, 1.0 - q, (k + 1) // 2)


def tail(spec: BinomialSpec, threshold: float) -> float:
    """P(X >= ceil(threshold)); 1 for threshold <= 0, 0 for threshold > n."""
    if threshold <= 0:
        return 1.0
    if threshold > spec.n:
        return 0.0
    return _upper_sum(spec.n, spec.p, int(math.ceil(threshold)))


# --- Exact-rational mode ---


def exact_tail(n: int, p: Fraction, threshold: int) -> Fraction:
    """Exact P(X >= threshold) for X ~ Binomial(n, p), no size cap."""
    if threshold <= 0:
        return Fraction(1)
    if threshold > n:
        return Fraction(0)
    num, den = p.numerator, p.denominator
    rest = den - num
    # common denominator den^n keeps everything in integers
    total = sum(math.comb(n, y) * num**y * rest ** (n - y) for y in range(threshold, n + 1))
    return Fraction(total, den**n)


def exact_tail_rational(k: int, q_num: int, q_den: int, threshold: int) -> Fraction:
    """Exact tail P(X_K >= threshold) with q = q_num / q_den, for odd K <= 99."""
    _check_odd(k)
    if k > EXACT_MAX_K:
        raise DomainError(f"exact mode is capped at K <= {EXACT_MAX_K}, got K={k}")
    if q_den <= 0 or not (0 < q_num < q_den):
        raise DomainError(f"q = {q_num}/{q_den} must lie in (0, 1)")
    return exact_tail(k, Fraction(q_num, q_den), threshold)


@lru_cache(maxsize=4096)
def exact_majority_tail(k: int, q: Fraction) -> Fraction:
    return exact_tail(k, q, (k + 1) // 2)


# --- Identities ---


def combinatorial_identity_check(k: int, y: int) -> bool:
    """(1/y) C(K-1, y-1) == (1/K) C(K, y), cross-multiplied in integers."""
    if not (1 <= y <= k <= IDENTITY_MAX_K):
        raise DomainError(f"need 1 <= y <= K <= {IDENTITY_MAX_K}, got K={k}, y={y}")
    return k * math.comb(k - 1, y - 1) == y * math.comb(k, y)


def sum_min_check(a: Sequence[float], b: Sequence[float]) -> bool:
    """min_i a_i / b_i <= sum(a) / sum(b) for positive sequences (exact arithmetic)."""
    if len(a) != len(b) or len(a) == 0:
        raise DomainError("sequences must be non-empty and of equal length")
    fa = [Fraction(x) for x in a]
    fb = [Fraction(x) for x in b]
    if any(x <= 0 for x in fa) or any(x <= 0 for x in fb):
        raise DomainError("sequences must be positive")
    return min(x / y for x, y in zip(fa, fb)) <= sum(fa) / sum(fb)
