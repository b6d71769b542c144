"""
Sequential offering: the object is offered to one agent at a time, in queue order.

Each agent sees only that everybody ahead of them declined. Agent 1 follows their
signal for μ in (1−q, q], agent 2 only for μ in (1/2, q], and from agent 3 on every
agent declines regardless of the signal, so the outcome depends on two signals at most.
Regime boundaries are compared in exact rationals so decimal inputs land on the
intended side (μ = 0.3 with q = 0.7 is exactly 1 − q).
"""

import logging
from fractions import Fraction
from typing import Callable, Sequence

from batchvote.errors import DomainError, InsufficientSignals
from batchvote.ic import rational
from batchvote.models import (
    Action,
    CorrectnessMethod,
    CorrectnessReport,
    Decision,
    ModelParams,
    SeqRegime,
    Signal,
)

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)

Strategy = Callable[[Signal], Action]


def _always(action: Action) -> Strategy:
    return lambda _signal: action


def _follow(signal: Signal) -> Action:
    return Action.OPT_IN if signal == Signal.GOOD else Action.OPT_OUT


def classify_regime(params: ModelParams) -> SeqRegime:
    mu, q = rational(params.mu), rational(params.q)
    if mu > q:
        return SeqRegime.HIGH_PRIOR
    if mu > HALF:
        return SeqRegime.UPPER
    if mu >= 1 - q:
        return SeqRegime.LOWER
    return SeqRegime.LOW_PRIOR


def seq_strategy(position: int, params: ModelParams) -> Strategy:
    """Equilibrium strategy of the agent at 1-based queue `position` (indifference declines)."""
    if position < 1:
        raise DomainError(f"queue positions start at 1, got {position}")
    mu, q = rational(params.mu), rational(params.q)
    if position == 1:
        if mu > q:
            return _always(Action.OPT_IN)
        if 1 - q < mu:
            return _follow
        return _always(Action.OPT_OUT)
    if position == 2 and HALF < mu <= q:
        return _follow
    return _always(Action.OPT_OUT)


def _signal_prob(signal: Signal, good: bool, q: Fraction) -> Fraction:
    return q if (signal == Signal.GOOD) == good else 1 - q


def opt_in_utility(position: int, signal: Signal, params: ModelParams) -> Fraction:
    """
    Unnormalized expected utility of accepting at `position` given that every
    predecessor (playing seq_strategy) declined and the agent's own signal.

    The recipient keeps the object for sure, so the utility is P(G, history, s) − P(B, history, s).
    """
    mu, q = rational(params.mu), rational(params.q)
    like_good, like_bad = mu, 1 - mu
    for earlier in range(1, position):
        strategy = seq_strategy(earlier, params)
        declines = [s for s in Signal if strategy(s) == Action.OPT_OUT]
        like_good *= sum((_signal_prob(s, True, q) for s in declines), Fraction(0))
        like_bad *= sum((_signal_prob(s, False, q) for s in declines), Fraction(0))
    return like_good * _signal_prob(signal, True, q) - like_bad * _signal_prob(signal, False, q)


def best_response(position: int, signal: Signal, params: ModelParams) -> Action:
    """Accept iff strictly profitable; unreachable positions (utility 0) decline."""
    return Action.OPT_IN if opt_in_utility(position, signal, params) > 0 else Action.OPT_OUT


def seq_outcome(params: ModelParams, signals: Sequence[Signal]) -> Decision:
    """Allocation decision of sequential offering for a realized signal list."""
    regime = classify_regime(params)
    needed = 1 if regime in (SeqRegime.HIGH_PRIOR, SeqRegime.LOW_PRIOR) else 2
    if len(signals) < needed:
        raise InsufficientSignals(needed, len(signals))
    if regime == SeqRegime.HIGH_PRIOR:
        return Decision(allocated=True, recipient=1)
    if regime == SeqRegime.UPPER:
        for position in (1, 2):
            if signals[position - 1] == Signal.GOOD:
                return Decision(allocated=True, recipient=position)
        return Decision(allocated=False)
    if regime == SeqRegime.LOWER and signals[0] == Signal.GOOD:
        return Decision(allocated=True, recipient=1)
    return Decision(allocated=False)


def seq_correctness(params: ModelParams) -> CorrectnessReport:
    """Closed-form correctness of sequential offering, one branch per prior regime."""
    mu, q = params.mu, params.q
    regime = classify_regime(params)
    if regime == SeqRegime.HIGH_PRIOR:
        value = mu
    elif regime == SeqRegime.UPPER:
        value = 2.0 * mu * q * (1.0 - q) + q * q
    elif regime == SeqRegime.LOWER:
        value = q
    else:
        value = 1.0 - mu
    return CorrectnessReport.exact(value, CorrectnessMethod.CLOSED_FORM)
