"""
Exact correctness of voting mechanisms and the no-incentives benchmark.

The exact evaluation walks the tree of vote outcomes. Correctness is linear in the
pair (P(ω=G ∧ history), P(ω=B ∧ history)), so each history node is solved once for
the conditional pair (P(correct | G, node), P(correct | B, node)) and memoized by
(net vote margin, agents used, batches run).
"""

import logging
import math
import sys
from enum import Enum
from fractions import Fraction
from typing import Optional

from batchvote.binom import majority_tail, pmf_vector, stable_sum, tail
from batchvote.config import K_MAX
from batchvote.errors import DomainError
from batchvote.ic import is_ic, no_ic, rational
from batchvote.models import (
    BinomialSpec,
    CorrectnessMethod,
    CorrectnessReport,
    MechanismSpec,
    ModelParams,
    NoIncentivesThreshold,
)
from batchvote.services.greedy import GreedyState, belief_after, next_batch_size, signal_log_odds
from batchvote.services.sequential import seq_correctness

logger = logging.getLogger(__name__)


def single_batch_correctness(k: int, q: float, mu: Optional[float] = None) -> CorrectnessReport:
    """P(X_K >= (K+1)/2); with a prior, notes when the batch is not IC there."""
    if k < 1 or k % 2 == 0:
        raise DomainError(f"batch size must be odd and >= 1, got K={k}")
    notes = []
    if mu is not None and not is_ic(k, ModelParams(mu=mu, q=q)):
        notes.append(f"batch size K={k} is not incentive-compatible at mu={mu:.12g}, q={q:.12g}")
        logger.warning(notes[-1])
    return CorrectnessReport.exact(majority_tail(k, q), CorrectnessMethod.CLOSED_FORM, notes=notes)


def exact_correctness(spec: MechanismSpec, params: ModelParams, k_max: int = K_MAX) -> CorrectnessReport:
    """Exact c(V) by dynamic programming over vote outcomes."""
    if not spec.is_voting:
        return seq_correctness(params)
    mu, q = params.mu, params.q
    if no_ic(mu, q):
        return CorrectnessReport.exact(mu, CorrectnessMethod.EXACT_DP, batches_reached=1)

    memo: dict[tuple[int, int, int], tuple[float, float, int]] = {}

    def solve(margin: int, used: int, run: int) -> tuple[float, float, int]:
        key = (margin, used, run)
        if key in memo:
            return memo[key]
        state = GreedyState(
            belief=belief_after(mu, q, margin),
            batches_run=run,
            agents_used=used,
            horizon_left=None if spec.horizon is None else spec.horizon - run,
            margin=margin,
        )
        k = next_batch_size(spec, params, state, k_max)
        if k is None:
            memo[key] = (0.0, 1.0, 0)
            return memo[key]
        first = (k + 1) // 2
        p_good, p_bad = pmf_vector(k, q), pmf_vector(k, 1.0 - q)
        good_terms = [stable_sum(p_good[first:])]
        bad_terms = []
        depth = 1
        for y in range(first):
            child_good, child_bad, child_depth = solve(margin + 2 * y - k, used + k, run + 1)
            good_terms.append(p_good[y] * child_good)
            bad_terms.append(p_bad[y] * child_bad)
            depth = max(depth, 1 + child_depth)
        memo[key] = (math.fsum(good_terms), math.fsum(bad_terms), depth)
        return memo[key]

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * params.population + 100))
    try:
        good, bad, depth = solve(0, 0, 0)
    finally:
        sys.setrecursionlimit(limit)
    logger.debug("Exact DP for %s at mu=%.6g: %d states, depth %d.", spec.label, mu, len(memo), depth)
    return CorrectnessReport.exact(
        math.fsum([mu * good, (1.0 - mu) * bad]), CorrectnessMethod.EXACT_DP, batches_reached=depth
    )


# --- No-incentives benchmark ---


def no_incentives_threshold(params: ModelParams) -> NoIncentivesThreshold:
    """ȳ = ½·log((1−μ)/μ) / log(q/(1−q)) + ½·I."""
    mu = params.mu
    ybar = 0.5 * (math.log1p(-mu) - math.log(mu)) / signal_log_odds(params.q) + 0.5 * params.population
    return NoIncentivesThreshold(ybar=ybar, population=params.population)


def upper_bound_correctness(params: ModelParams) -> CorrectnessReport:
    """P(X_I >= ȳ) with X_I ~ Binomial(I, q): the no-incentives optimum in its printed form."""
    ybar = no_incentives_threshold(params).ybar
    value = tail(BinomialSpec(n=params.population, p=params.q), ybar)
    return CorrectnessReport.exact(value, CorrectnessMethod.CLOSED_FORM)


def mixed_upper_bound_correctness(params: ModelParams) -> CorrectnessReport:
    """
    Correctness of the non-strategic planner that sees all I signals and allocates
    iff at least ⌈ȳ⌉ are positive, mixing both qualities:
    μ·P(Bin(I,q) >= ⌈ȳ⌉) + (1−μ)·P(Bin(I,1−q) < ⌈ȳ⌉).
    """
    threshold = no_incentives_threshold(params).min_yes
    n = params.population
    allocate_good = stable_sum(pmf_vector(n, params.q)[threshold:])
    reject_bad = stable_sum(pmf_vector(n, 1.0 - params.q)[:threshold])
    value = math.fsum([params.mu * allocate_good, (1.0 - params.mu) * reject_bad])
    return CorrectnessReport.exact(value, CorrectnessMethod.CLOSED_FORM)


# --- Where and how voting beats sequential offering ---


class DominanceRegime(str, Enum):
    """Which voting mechanism provably beats sequential offering at a prior."""

    LOW_PRIOR = "low_prior"  # mu < 1-q: sequential discards, any IC batch wins
    FIRST_AGENT = "first_agent"  # [1-q, 1/2): a size-3 batch is IC and wins
    TWO_AGENTS = "two_agents"  # [1/2, q/2+1/4): a size-3 batch still wins
    TWO_BATCHES = "two_batches"  # [q/2+1/4, q): only a size-1 first batch is IC, two batches win
    NO_IC = "no_ic"  # mu >= q: every voting mechanism returns mu


def dominance_regime(params: ModelParams) -> DominanceRegime:
    mu, q = rational(params.mu), rational(params.q)
    if mu >= q:
        return DominanceRegime.NO_IC
    if mu < 1 - q:
        return DominanceRegime.LOW_PRIOR
    if mu < Fraction(1, 2):
        return DominanceRegime.FIRST_AGENT
    if mu < q / 2 + Fraction(1, 4):
        return DominanceRegime.TWO_AGENTS
    return DominanceRegime.TWO_BATCHES


def greedy2_lower_bound(params: ModelParams) -> float:
    """μq + (μ(1−q) + (1−μ)q)·(q³ + 3q²(1−q)): two batches of sizes 1 and at least 3."""
    mu, q = params.mu, params.q
    return mu * q + (mu * (1.0 - q) + (1.0 - mu) * q) * (q**3 + 3.0 * q * q * (1.0 - q))
