"""
Unit tests for the pydantic data model and parameter validation.
Run: pytest tests/test_models.py -v
"""

import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from batchvote.errors import OutOfRange
from batchvote.models import (
    BatchRecord,
    CorrectnessMethod,
    CorrectnessReport,
    Decision,
    IcInterval,
    McConfig,
    MechanismKind,
    MechanismSpec,
    ModelParams,
    NoIncentivesThreshold,
    SweepConfig,
    validate_params,
)

open_unit = st.floats(min_value=0.0, max_value=1.0, exclude_min=True, exclude_max=True)
precision = st.floats(min_value=0.5, max_value=1.0, exclude_min=True, exclude_max=True)


class TestValidateParams:
    """Range checks name the offending field."""

    @pytest.mark.parametrize(
        "mu, q, population, field",
        [
            (0.0, 0.6, 10, "mu"),
            (1.0, 0.6, 10, "mu"),
            (0.5, 0.5, 10, "q"),
            (0.5, 1.0, 10, "q"),
            (0.5, 0.6, 0, "population"),
        ],
    )
    def test_out_of_range(self, mu, q, population, field):
        with pytest.raises(OutOfRange) as exc:
            validate_params(mu, q, population)
        assert exc.value.field == field

    def test_default_population(self):
        assert validate_params(0.3, 0.6).population == 345

    @given(mu=open_unit, q=precision)
    def test_accepts_open_ranges(self, mu, q):
        params = validate_params(mu, q, 7)
        assert (params.mu, params.q, params.population) == (mu, q, 7)

    def test_params_are_frozen(self):
        params = ModelParams(mu=0.3, q=0.6)
        with pytest.raises(ValidationError):
            params.mu = 0.4

    def test_with_mu_keeps_q_and_population(self):
        params = ModelParams(mu=0.3, q=0.7, population=21).with_mu(0.1)
        assert (params.mu, params.q, params.population) == (0.1, 0.7, 21)


class TestMechanismSpec:
    """Variant-specific fields and constructors."""

    def test_labels(self):
        assert MechanismSpec.sequential().label == "seq"
        assert MechanismSpec.single_batch(3).label == "single3"
        assert MechanismSpec.greedy(2).label == "greedy2"
        assert MechanismSpec.greedy().label == "greedy"

    def test_horizons(self):
        assert MechanismSpec.single_batch(5).horizon == 1
        assert MechanismSpec.greedy(3).horizon == 3
        assert MechanismSpec.greedy().horizon is None

    @pytest.mark.parametrize("k", [0, 2, 4])
    def test_single_batch_needs_odd_k(self, k):
        with pytest.raises(ValidationError):
            MechanismSpec.single_batch(k)

    def test_horizon_must_be_positive(self):
        with pytest.raises(ValidationError):
            MechanismSpec.greedy(0)

    def test_k_only_for_single_batch(self):
        with pytest.raises(ValidationError):
            MechanismSpec(variant=MechanismKind.GREEDY_UNBOUNDED, k=3)

    def test_from_name(self):
        assert MechanismSpec.from_name("greedy", j=1) == MechanismSpec.greedy(1)
        assert MechanismSpec.from_name("single", k=3).variant == MechanismKind.SINGLE_BATCH
        assert not MechanismSpec.from_name("seq").is_voting

    def test_from_name_errors(self):
        with pytest.raises(OutOfRange):
            MechanismSpec.from_name("single")
        with pytest.raises(OutOfRange):
            MechanismSpec.from_name("lottery")


class TestRecords:
    """Decisions, batch records and reports."""

    def test_recipient_iff_allocated(self):
        with pytest.raises(ValidationError):
            Decision(allocated=True)
        with pytest.raises(ValidationError):
            Decision(allocated=False, recipient=2)
        assert Decision(allocated=True, recipient=2).recipient == 2

    def test_batch_record_checks(self):
        with pytest.raises(ValidationError):
            BatchRecord(index=1, size=4, yes_votes=1, posterior=0.5)
        with pytest.raises(ValidationError):
            BatchRecord(index=1, size=3, yes_votes=4, posterior=0.5)
        assert BatchRecord(index=1, size=3, yes_votes=2, posterior=0.7).majority
        assert not BatchRecord(index=1, size=3, yes_votes=1, posterior=0.3).majority

    def test_exact_reports_carry_no_error(self):
        with pytest.raises(ValidationError):
            CorrectnessReport(value=0.5, method=CorrectnessMethod.EXACT_DP, std_error=0.1)
        report = CorrectnessReport(value=0.5, method=CorrectnessMethod.MONTE_CARLO, std_error=0.1, trials=10)
        assert report.trials == 10

    def test_exact_clamps_rounding_spill(self):
        assert CorrectnessReport.exact(1.0 + 1e-16, CorrectnessMethod.CLOSED_FORM).value == 1.0
        assert CorrectnessReport.exact(-1e-17, CorrectnessMethod.CLOSED_FORM).value == 0.0

    def test_interval_is_open(self):
        interval = IcInterval(k=1, lower=0.4, upper=0.6)
        assert interval.contains(0.5)
        assert not interval.contains(0.4)
        assert not interval.contains(0.6)

    def test_min_yes_clipping(self):
        assert NoIncentivesThreshold(ybar=50.0, population=100).min_yes == 50
        assert NoIncentivesThreshold(ybar=49.2, population=100).min_yes == 50
        assert NoIncentivesThreshold(ybar=-3.0, population=100).min_yes == 0
        assert NoIncentivesThreshold(ybar=400.0, population=345).min_yes == 346


class TestConfigs:
    """Monte Carlo and sweep configuration."""

    def test_trials_positive(self):
        with pytest.raises(ValidationError):
            McConfig(trials=0)
        assert McConfig(trials=1).confidence_z == 3.0

    def test_default_grid(self):
        values = SweepConfig().mu_values()
        assert len(values) == 199
        assert values[0] == 0.005
        assert values[-1] == 0.995
        assert values[118] == 0.595

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"mu_grid": (0.5, 0.4, 0.01)},
            {"mu_grid": (0.0, 0.5, 0.01)},
            {"mu_grid": (0.1, 0.5, 0.0)},
            {"q_values": [0.5]},
            {"q_values": []},
        ],
    )
    def test_invalid_sweeps(self, kwargs):
        with pytest.raises(ValidationError):
            SweepConfig(**kwargs)
