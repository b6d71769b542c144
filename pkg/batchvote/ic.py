"""
Incentive-compatibility analysis of a single voting batch.

A size-K batch under majority rule is IC at prior μ iff μ lies in the open interval
I_K = (μ̲_K, μ̄_K); both endpoints strictly decrease in K and consecutive intervals
overlap, so the IC batch sizes at μ form a contiguous odd range [K̲(μ), K̄(μ)].
"""

import logging
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from batchvote.binom import exact_majority_tail, majority_tail, minority_tail, pmf_vector, stable_sum
from batchvote.config import ARBITER_MAX_DENOMINATOR, ARBITER_MAX_K, ARBITER_TOLERANCE, K_MAX
from batchvote.errors import DomainError, SearchExhausted
from batchvote.models import Action, AllocProbs, BatchBounds, IcInterval, ModelParams, Signal, UtilityPair

logger = logging.getLogger(__name__)


def _check_odd(k: int) -> None:
    if k < 1 or k % 2 == 0:
        raise DomainError(f"batch size must be odd and >= 1, got K={k}")


@lru_cache(maxsize=65536)
def rational(x: float) -> Fraction:
    """Closest small-denominator rational; recovers 0.55 -> 11/20, 0.6 -> 3/5."""
    return Fraction(x).limit_denominator(ARBITER_MAX_DENOMINATOR)


# --- Allocation probabilities ---


def alloc_probs(k: int, q: float) -> AllocProbs:
    """(𝒢_K, ℬ_K) by the direct sums over the winning yes-counts y."""
    _check_odd(k)
    good, bad = _alloc_direct(k, q)
    return AllocProbs(good=good, bad=bad)


@lru_cache(maxsize=4096)
def _alloc_direct(k: int, q: float) -> tuple[float, float]:
    first = (k + 1) // 2
    ys = np.arange(first, k + 1)
    # pmf of K-1 other voters at y-1 yes votes, shared with the winner pool of size y
    good = stable_sum(pmf_vector(k - 1, q)[first - 1 :] / ys)
    bad = stable_sum(pmf_vector(k - 1, 1.0 - q)[first - 1 :] / ys)
    return good, bad


def alloc_probs_via_identity(k: int, q: float) -> AllocProbs:
    """(𝒢_K, ℬ_K) = (P(X_K^q >= m) / (qK), P(X_K^{1-q} >= m) / ((1-q)K))."""
    _check_odd(k)
    return AllocProbs(
        good=majority_tail(k, q) / (q * k),
        bad=minority_tail(k, q) / ((1.0 - q) * k),
    )


# --- Utilities ---


def expected_utility(action: Action, signal: Signal, k: int, params: ModelParams) -> float:
    """
    Unnormalized expected utility of an action in a size-K batch.

    Returns P(s) * u_i(action; s): the positive factor 1/P(s) is dropped since only
    the sign enters IC. Opt-in with g: μq𝒢_K − (1−μ)(1−q)ℬ_K; with b: μ(1−q)𝒢_K − (1−μ)qℬ_K.
    """
    _check_odd(k)
    if action == Action.OPT_OUT:
        return 0.0
    good, bad = _alloc_direct(k, params.q)
    mu, q = params.mu, params.q
    if signal == Signal.GOOD:
        return mu * q * good - (1.0 - mu) * (1.0 - q) * bad
    return mu * (1.0 - q) * good - (1.0 - mu) * q * bad


def utility_pair(signal: Signal, k: int, params: ModelParams) -> UtilityPair:
    return UtilityPair(opt_in=expected_utility(Action.OPT_IN, signal, k, params))


def ic_by_utility(k: int, params: ModelParams) -> bool:
    """Positive-signal agents strictly prefer opting in, negative-signal agents strictly prefer out."""
    return (
        expected_utility(Action.OPT_IN, Signal.GOOD, k, params) > 0.0
        and expected_utility(Action.OPT_IN, Signal.BAD, k, params) < 0.0
    )


# --- The IC interval ---


@lru_cache(maxsize=65536)
def _interval(k: int, q: float) -> tuple[float, float]:
    if k == 1:
        return 1.0 - q, q
    low = minority_tail(k, q)  # 1 - P(X_K >= (K+1)/2), without cancellation
    high = majority_tail(k, q)
    upper = q * q * low / (q * q * low + (1.0 - q) ** 2 * high)
    return low, upper


def ic_interval(k: int, q: float) -> IcInterval:
    """Endpoints μ̲_K = 1 − P(X_K ≥ m) and μ̄_K = q²(1−P) / (q²(1−P) + (1−q)²P)."""
    _check_odd(k)
    lower, upper = _interval(k, q)
    return IcInterval(k=k, lower=lower, upper=upper)


@lru_cache(maxsize=4096)
def exact_ic_interval(k: int, q: Fraction) -> tuple[Fraction, Fraction]:
    """Endpoints in exact rational arithmetic."""
    _check_odd(k)
    high = exact_majority_tail(k, q)
    low = 1 - high
    upper = q * q * low / (q * q * low + (1 - q) ** 2 * high)
    return low, upper


def _near(mu: float, endpoint: float) -> bool:
    return abs(mu - endpoint) <= ARBITER_TOLERANCE * max(abs(mu), abs(endpoint))


def no_ic(mu: float, q: float) -> bool:
    """μ >= q, with near-ties decided in the same rationals as the interval endpoints."""
    if mu >= q:
        return True
    return _near(mu, q) and rational(mu) >= rational(q)


def below_upper(k: int, mu: float, q: float) -> bool:
    """μ < μ̄_K, referring near-ties to exact rationals."""
    upper = _interval(k, q)[1]
    if not _near(mu, upper):
        return mu < upper
    if k > ARBITER_MAX_K:
        logger.warning("IC comparison at K=%d within tolerance of mu_bar; deciding in floats.", k)
        return mu < upper
    return rational(mu) < exact_ic_interval(k, rational(q))[1]


def above_lower(k: int, mu: float, q: float) -> bool:
    """μ > μ̲_K, referring near-ties to exact rationals."""
    lower = _interval(k, q)[0]
    if not _near(mu, lower):
        return mu > lower
    if k > ARBITER_MAX_K:
        logger.warning("IC comparison at K=%d within tolerance of mu_lower; deciding in floats.", k)
        return mu > lower
    return rational(mu) > exact_ic_interval(k, rational(q))[0]


def is_ic(k: int, params: ModelParams) -> bool:
    """True iff μ̲_K < μ < μ̄_K (open interval)."""
    _check_odd(k)
    if no_ic(params.mu, params.q):
        return False
    return above_lower(k, params.mu, params.q) and below_upper(k, params.mu, params.q)


# --- Batch-size bounds ---


def _largest_below_upper(mu: float, q: float, k_cap: int) -> Optional[int]:
    """Largest odd K <= k_cap with μ < μ̄_K, or None if K̄ lies beyond the cap.

    Requires μ < q (so K = 1 satisfies). Gallops then bisects over indices i, K = 2i + 1.
    """
    max_index = (k_cap - 1) // 2
    lo, step = 0, 1
    while True:
        cand = min(lo + step, max_index)
        if cand == lo:
            if below_upper(2 * lo + 3, mu, q):
                return None
            return 2 * lo + 1
        if below_upper(2 * cand + 1, mu, q):
            lo = cand
            step *= 2
        else:
            hi = cand
            break
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if below_upper(2 * mid + 1, mu, q):
            lo = mid
        else:
            hi = mid
    return 2 * lo + 1


def _smallest_above_lower(mu: float, q: float, k_hi: int) -> Optional[int]:
    """Smallest odd K <= k_hi with μ > μ̲_K."""
    if above_lower(1, mu, q):
        return 1
    lo, hi = 0, (k_hi - 1) // 2
    if not above_lower(2 * hi + 1, mu, q):
        return None
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if above_lower(2 * mid + 1, mu, q):
            hi = mid
        else:
            lo = mid
    return 2 * hi + 1


def batch_bounds(params: ModelParams, k_max: int = K_MAX) -> Optional[BatchBounds]:
    """(K̲(μ), K̄(μ)), or None when μ >= q and no batch size is IC."""
    mu, q = params.mu, params.q
    if no_ic(mu, q):
        return None
    max_k = _largest_below_upper(mu, q, k_max)
    if max_k is None:
        raise SearchExhausted(k_max)
    min_k = _smallest_above_lower(mu, q, max_k)
    if min_k is None:
        logger.warning("No IC batch size at mu=%.12g, q=%.12g despite mu < q.", mu, q)
        return None
    return BatchBounds(min_k=min_k, max_k=max_k)


@lru_cache(maxsize=262144)
def _optimal_uncapped(mu: float, q: float, k_max: int) -> Optional[int]:
    return _largest_below_upper(mu, q, k_max)


def optimal_batch_size(mu: float, q: float, limit: int, k_max: int = K_MAX) -> Optional[int]:
    """K̄(μ) if it is at most `limit` agents, else None (the batch does not fit)."""
    if limit < 1 or no_ic(mu, q):
        return None
    max_k = _optimal_uncapped(mu, q, k_max)
    if max_k is None:
        if limit > k_max:
            raise SearchExhausted(k_max)
        return None
    return max_k if max_k <= limit else None


def scan_ic_batch_sizes(params: ModelParams, k_limit: int) -> list[int]:
    """Every odd K <= k_limit with is_ic true, by exhaustive scan."""
    return [k for k in range(1, k_limit + 1, 2) if is_ic(k, params)]
