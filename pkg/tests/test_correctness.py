"""
Unit tests for exact correctness, the no-incentives benchmark and the dominance regimes.
Run: pytest tests/test_correctness.py -v
"""

import math
from fractions import Fraction

import pytest

from batchvote.binom import exact_tail, majority_tail
from batchvote.errors import DomainError
from batchvote.models import CorrectnessMethod, MechanismSpec, ModelParams
from batchvote.services.correctness import (
    DominanceRegime,
    dominance_regime,
    exact_correctness,
    greedy2_lower_bound,
    mixed_upper_bound_correctness,
    no_incentives_threshold,
    single_batch_correctness,
    upper_bound_correctness,
)
from batchvote.services.greedy import signal_log_odds
from batchvote.services.sequential import seq_correctness


class TestSingleBatch:
    """P(X_K >= (K+1)/2)."""

    @pytest.mark.parametrize("q", [0.6, 0.75])
    def test_single_voter(self, q):
        assert single_batch_correctness(1, q).value == pytest.approx(q, abs=1e-15)

    def test_size_three(self):
        report = single_batch_correctness(3, 0.6)
        assert report.value == pytest.approx(0.648, abs=1e-12)
        assert report.method == CorrectnessMethod.CLOSED_FORM
        assert report.notes == []

    def test_flags_non_ic_batch(self):
        report = single_batch_correctness(3, 0.6, mu=0.56)
        assert report.value == pytest.approx(0.648, abs=1e-12)
        assert "not incentive-compatible" in report.notes[0]

    def test_even_batch(self):
        with pytest.raises(DomainError):
            single_batch_correctness(4, 0.6)


class TestExactCorrectness:
    """Dynamic program over vote outcomes."""

    def test_single_batch_spec_matches_closed_form(self, mid_params):
        report = exact_correctness(MechanismSpec.single_batch(3), mid_params)
        assert report.value == pytest.approx(0.648, abs=1e-12)
        assert report.method == CorrectnessMethod.EXACT_DP

    def test_greedy_one_uses_optimal_batch(self, mid_params):
        report = exact_correctness(MechanismSpec.greedy(1), mid_params)
        assert report.value == pytest.approx(0.710208, abs=1e-12)
        assert report.batches_reached == 1

    def test_second_batch_helps(self):
        params = ModelParams(mu=0.55, q=0.6)
        one = exact_correctness(MechanismSpec.greedy(1), params).value
        two = exact_correctness(MechanismSpec.greedy(2), params).value
        assert one == pytest.approx(0.6, abs=1e-12)
        assert two > one

    @pytest.mark.parametrize(
        "spec", [MechanismSpec.greedy(1), MechanismSpec.greedy(2), MechanismSpec.greedy(), MechanismSpec.single_batch(5)]
    )
    def test_everything_ties_above_q(self, spec):
        params = ModelParams(mu=0.75, q=0.7)
        assert exact_correctness(spec, params).value == pytest.approx(0.75, abs=1e-15)
        assert seq_correctness(params).value == pytest.approx(0.75, abs=1e-15)

    def test_one_ulp_below_q_returns_prior(self):
        params = ModelParams(mu=math.nextafter(0.6, 0), q=0.6)
        assert exact_correctness(MechanismSpec.greedy(), params).value == pytest.approx(0.6, abs=1e-15)

    def test_sequential_spec(self):
        params = ModelParams(mu=0.55, q=0.6)
        assert exact_correctness(MechanismSpec.sequential(), params).value == pytest.approx(0.624, abs=1e-12)

    def test_horizon_monotone(self):
        params = ModelParams(mu=0.3, q=0.6)
        values = [exact_correctness(MechanismSpec.greedy(j), params).value for j in (1, 2, 3)]
        assert values[0] < values[1] < values[2]
        assert exact_correctness(MechanismSpec.greedy(), params).value >= values[2]

    def test_two_batch_value(self):
        # first batch K=1 at mu=0.55; after a no vote the belief is 0.22/0.49 and K̄ = 9
        params = ModelParams(mu=0.55, q=0.6)
        expected = 0.55 * 0.6 + (0.55 * 0.4 + 0.45 * 0.6) * majority_tail(9, 0.6)
        assert exact_correctness(MechanismSpec.greedy(2), params).value == pytest.approx(expected, abs=1e-12)

    def test_tiny_population_discards(self):
        params = ModelParams(mu=0.45, q=0.6, population=5)
        assert exact_correctness(MechanismSpec.greedy(1), params).value == pytest.approx(0.55, abs=1e-15)


class TestNoIncentives:
    """Threshold ȳ and the upper bound."""

    def test_symmetric_prior(self):
        assert no_incentives_threshold(ModelParams(mu=0.5, q=0.8, population=100)).ybar == pytest.approx(50.0)

    def test_threshold_matches_integer_scan(self):
        params = ModelParams(mu=0.3, q=0.6)
        scan = next(
            y
            for y in range(params.population + 1)
            if math.log(0.3 / 0.7) + (2 * y - params.population) * signal_log_odds(0.6) >= 0
        )
        assert no_incentives_threshold(params).min_yes == scan

    def test_threshold_falls_with_prior(self):
        ybars = [no_incentives_threshold(ModelParams(mu=mu, q=0.6)).ybar for mu in (0.1, 0.5, 0.9, 0.999)]
        assert ybars == sorted(ybars, reverse=True)

    def test_upper_bound_at_half(self):
        value = upper_bound_correctness(ModelParams(mu=0.5, q=0.6)).value
        assert value > 0.999
        assert value == pytest.approx(float(exact_tail(345, Fraction(3, 5), 173)), abs=1e-12)

    def test_upper_bound_single_agent(self):
        assert upper_bound_correctness(ModelParams(mu=0.5, q=0.6, population=1)).value == pytest.approx(0.6)

    def test_upper_bound_grows_with_population(self):
        values = [upper_bound_correctness(ModelParams(mu=0.5, q=0.6, population=n)).value for n in range(1, 346, 2)]
        assert all(a <= b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("mu", [0.1, 0.3, 0.55, 0.7])
    def test_mixed_bound_dominates(self, mu):
        params = ModelParams(mu=mu, q=0.6)
        bound = mixed_upper_bound_correctness(params).value
        for spec in (MechanismSpec.greedy(1), MechanismSpec.greedy(2), MechanismSpec.sequential()):
            assert exact_correctness(spec, params).value <= bound


class TestDominance:
    """Which mechanism beats sequential offering at a prior."""

    @pytest.mark.parametrize(
        "mu, regime",
        [
            (0.3, DominanceRegime.LOW_PRIOR),
            (0.4, DominanceRegime.FIRST_AGENT),
            (0.45, DominanceRegime.FIRST_AGENT),
            (0.5, DominanceRegime.TWO_AGENTS),
            (0.54, DominanceRegime.TWO_AGENTS),
            (0.55, DominanceRegime.TWO_BATCHES),
            (0.58, DominanceRegime.TWO_BATCHES),
            (0.6, DominanceRegime.NO_IC),
        ],
    )
    def test_regimes(self, mu, regime):
        assert dominance_regime(ModelParams(mu=mu, q=0.6)) == regime

    @pytest.mark.parametrize("mu", [0.55, 0.57, 0.595])
    def test_two_batch_lower_bound(self, mu):
        params = ModelParams(mu=mu, q=0.6)
        greedy2 = exact_correctness(MechanismSpec.greedy(2), params).value
        assert greedy2 >= greedy2_lower_bound(params) - 1e-12
        assert greedy2 > seq_correctness(params).value
