"""
Voting-mechanism engine: belief updates and batch-by-batch execution.

Beliefs are carried as log-odds. After a failed batch of size K with Y yes votes the
log-odds move by (2Y − K)·log(q / (1 − q)), so a whole history is summarized by its
net vote margin Σ(2Y_j − K_j); both engines below derive every belief from that margin
so they choose identical batch sizes.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit, logit

from batchvote.config import K_MAX
from batchvote.errors import DomainError, InsufficientSignals
from batchvote.ic import no_ic, optimal_batch_size
from batchvote.models import (
    BatchRecord,
    Decision,
    MechanismKind,
    MechanismSpec,
    ModelParams,
    Quality,
    RunTrace,
    SeqRegime,
    Signal,
)
from batchvote.services.sequential import classify_regime, seq_outcome

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GreedyState:
    """Engine state before the next batch."""

    belief: float
    batches_run: int
    agents_used: int
    horizon_left: Optional[int]
    margin: int = 0


def signal_log_odds(q: float) -> float:
    """log(q / (1 − q)), the log-odds weight of one vote."""
    return math.log(q) - math.log1p(-q)


def posterior_update(prev: float, k: int, yes: int, q: float) -> float:
    """Belief after a batch of size K with Y yes votes, computed in log-odds."""
    if not (0.0 < prev < 1.0):
        raise DomainError(f"previous belief must lie in (0, 1), got {prev}")
    if k < 1 or k % 2 == 0:
        raise DomainError(f"batch size must be odd and >= 1, got K={k}")
    if not (0 <= yes <= k):
        raise DomainError(f"yes votes must lie in 0..{k}, got {yes}")
    return float(expit(logit(prev) + (2 * yes - k) * signal_log_odds(q)))


def belief_after(mu: float, q: float, margin: int) -> float:
    """Belief after a history with net vote margin Σ(2Y − K)."""
    if margin == 0:
        return mu
    return float(expit(logit(mu) + margin * signal_log_odds(q)))


def next_batch_size(
    spec: MechanismSpec, params: ModelParams, state: GreedyState, k_max: int = K_MAX
) -> Optional[int]:
    """Size of the next batch, or None when the mechanism stops and discards."""
    if state.horizon_left is not None and state.horizon_left <= 0:
        return None
    remaining = params.population - state.agents_used
    if spec.variant == MechanismKind.SINGLE_BATCH:
        return spec.k if spec.k <= remaining else None
    return optimal_batch_size(state.belief, params.q, remaining, k_max)


def batch_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, batch index)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def _initial_state(spec: MechanismSpec, params: ModelParams) -> GreedyState:
    return GreedyState(belief=params.mu, batches_run=0, agents_used=0, horizon_left=spec.horizon)


def run_mechanism(
    spec: MechanismSpec,
    params: ModelParams,
    true_quality: Quality,
    signals: Sequence[Signal],
    seed: int,
    k_max: int = K_MAX,
) -> RunTrace:
    """Execute one realization of a mechanism on a queue of signals."""
    signals = [Signal(s) for s in signals]
    if len(signals) < params.population:
        raise InsufficientSignals(params.population, len(signals))
    if len(signals) > params.population:
        raise DomainError(f"got {len(signals)} signals for a population of {params.population}")

    def trace(batches: list[BatchRecord], decision: Decision) -> RunTrace:
        return RunTrace(
            params=params,
            spec=spec,
            true_quality=true_quality,
            signals=signals,
            batches=batches,
            decision=decision,
            seed=seed,
        )

    if not spec.is_voting:
        return trace([], seq_outcome(params, signals))

    mu, q = params.mu, params.q
    if no_ic(mu, q):
        # nobody can be kept truthful: everyone opts in and the first batch takes it
        record = BatchRecord(index=1, size=1, yes_votes=1, posterior=posterior_update(mu, 1, 1, q))
        return trace([record], Decision(allocated=True, recipient=1))

    batches: list[BatchRecord] = []
    state = _initial_state(spec, params)
    while True:
        k = next_batch_size(spec, params, state, k_max)
        if k is None:
            logger.debug("Discarding after %d batches (belief %.6g).", state.batches_run, state.belief)
            return trace(batches, Decision(allocated=False))
        start = state.agents_used
        voters = [start + i + 1 for i, s in enumerate(signals[start : start + k]) if s == Signal.GOOD]
        yes = len(voters)
        margin = state.margin + 2 * yes - k
        index = state.batches_run + 1
        batches.append(BatchRecord(index=index, size=k, yes_votes=yes, posterior=belief_after(mu, q, margin)))
        if yes >= (k + 1) // 2:
            pick = int(batch_rng(seed, index).integers(yes))
            return trace(batches, Decision(allocated=True, recipient=voters[pick]))
        state = GreedyState(
            belief=belief_after(mu, q, margin),
            batches_run=index,
            agents_used=start + k,
            horizon_left=None if state.horizon_left is None else state.horizon_left - 1,
            margin=margin,
        )


# --- Vectorized execution over many signal profiles ---


def allocate_profiles(
    spec: MechanismSpec, params: ModelParams, signals: np.ndarray, k_max: int = K_MAX
) -> np.ndarray:
    """
    Allocation decision for every row of a boolean signal matrix (True = g).

    Rows sharing a history are processed together: after a failed batch they are split
    by their yes count, which fixes the next belief and batch size.
    """
    signals = np.asarray(signals, dtype=bool)
    if signals.ndim != 2 or signals.shape[1] != params.population:
        raise DomainError(f"signal matrix must have {params.population} columns")
    rows = signals.shape[0]
    allocated = np.zeros(rows, dtype=bool)

    if not spec.is_voting:
        regime = classify_regime(params)
        needed = 1 if regime in (SeqRegime.HIGH_PRIOR, SeqRegime.LOW_PRIOR) else 2
        if params.population < needed:
            raise InsufficientSignals(needed, params.population)
        if regime == SeqRegime.HIGH_PRIOR:
            allocated[:] = True
        elif regime == SeqRegime.UPPER:
            allocated = signals[:, 0] | signals[:, 1]
        elif regime == SeqRegime.LOWER:
            allocated = signals[:, 0].copy()
        return allocated

    mu, q = params.mu, params.q
    if no_ic(mu, q):
        allocated[:] = True
        return allocated

    pending = [(np.arange(rows), _initial_state(spec, params))]
    while pending:
        idx, state = pending.pop()
        k = next_batch_size(spec, params, state, k_max)
        if k is None:
            continue
        start = state.agents_used
        yes = signals[idx, start : start + k].sum(axis=1)
        wins = yes >= (k + 1) // 2
        allocated[idx[wins]] = True
        lost_idx, lost_yes = idx[~wins], yes[~wins]
        for y in np.unique(lost_yes):
            margin = state.margin + 2 * int(y) - k
            child = GreedyState(
                belief=belief_after(mu, q, margin),
                batches_run=state.batches_run + 1,
                agents_used=start + k,
                horizon_left=None if state.horizon_left is None else state.horizon_left - 1,
                margin=margin,
            )
            pending.append((lost_idx[lost_yes == y], child))
    return allocated


# --- Sampling ---


def sample_world(params: ModelParams, rng: np.random.Generator) -> tuple[Quality, list[Signal]]:
    """Draw ω ~ Bernoulli(μ) and a queue of i.i.d. signals with precision q."""
    good = bool(rng.random() < params.mu)
    p_g = params.q if good else 1.0 - params.q
    draws = rng.random(params.population) < p_g
    return (Quality.GOOD if good else Quality.BAD), [Signal.GOOD if d else Signal.BAD for d in draws]


def sample_profiles(params: ModelParams, rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized sample_world: (good flags of shape (n,), signal matrix of shape (n, I))."""
    good = rng.random(n) < params.mu
    p_g = np.where(good, params.q, 1.0 - params.q)
    signals = rng.random((n, params.population)) < p_g[:, None]
    return good, signals
