"""Data models for the batch-voting allocation library."""

import math
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from batchvote.config import DEFAULT_POPULATION
from batchvote.errors import OutOfRange


class Quality(str, Enum):
    """True state of the object, ω."""

    GOOD = "G"
    BAD = "B"


class Signal(str, Enum):
    """Private signal s_i; P(g | G) = P(b | B) = q."""

    GOOD = "g"
    BAD = "b"


class Action(str, Enum):
    """Vote α_i."""

    OPT_IN = "y"
    OPT_OUT = "n"


class MechanismKind(str, Enum):
    SEQUENTIAL = "sequential"
    SINGLE_BATCH = "single_batch"
    GREEDY_HORIZON = "greedy_horizon"
    GREEDY_UNBOUNDED = "greedy_unbounded"


class CorrectnessMethod(str, Enum):
    CLOSED_FORM = "closed_form"
    EXACT_DP = "exact_dp"
    BRUTE_FORCE = "brute_force"
    MONTE_CARLO = "monte_carlo"


class SeqRegime(str, Enum):
    """Prior regimes of the sequential-offering benchmark."""

    HIGH_PRIOR = "high_prior"  # mu > q
    UPPER = "upper"  # mu in (1/2, q]
    LOWER = "lower"  # mu in [1-q, 1/2]
    LOW_PRIOR = "low_prior"  # mu < 1-q


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


# --- World and mechanisms ---


class ModelParams(BaseModel):
    """Prior, signal precision and queue length."""

    model_config = ConfigDict(frozen=True)

    mu: float = Field(..., gt=0.0, lt=1.0, description="Prior belief P(ω=G)")
    q: float = Field(..., gt=0.5, lt=1.0, description="Signal precision")
    population: int = Field(default=DEFAULT_POPULATION, ge=1, description="Queue length I")

    def with_mu(self, mu: float) -> "ModelParams":
        return ModelParams(mu=mu, q=self.q, population=self.population)


def validate_params(mu: float, q: float, population: int = DEFAULT_POPULATION) -> ModelParams:
    """Build ModelParams, raising OutOfRange naming the first violating field."""
    try:
        return ModelParams(mu=mu, q=q, population=population)
    except ValidationError as e:
        err = e.errors()[0]
        field = str(err["loc"][0]) if err.get("loc") else "params"
        raise OutOfRange(field, err.get("input"), err.get("msg", "")) from None


class MechanismSpec(BaseModel):
    """Which mechanism to evaluate."""

    model_config = ConfigDict(frozen=True)

    variant: MechanismKind
    k: Optional[int] = Field(None, description="Batch size for SingleBatch")
    j: Optional[int] = Field(None, description="Horizon for GreedyHorizon")

    @model_validator(mode="after")
    def _check_variant_fields(self) -> "MechanismSpec":
        if self.variant == MechanismKind.SINGLE_BATCH:
            if self.k is None or self.k < 1 or self.k % 2 == 0:
                raise ValueError("SingleBatch needs an odd batch size k >= 1")
        elif self.k is not None:
            raise ValueError("k is only meaningful for SingleBatch")
        if self.variant == MechanismKind.GREEDY_HORIZON:
            if self.j is None or self.j < 1:
                raise ValueError("GreedyHorizon needs a horizon j >= 1")
        elif self.j is not None:
            raise ValueError("j is only meaningful for GreedyHorizon")
        return self

    @classmethod
    def sequential(cls) -> "MechanismSpec":
        return cls(variant=MechanismKind.SEQUENTIAL)

    @classmethod
    def single_batch(cls, k: int) -> "MechanismSpec":
        return cls(variant=MechanismKind.SINGLE_BATCH, k=k)

    @classmethod
    def greedy(cls, j: Optional[int] = None) -> "MechanismSpec":
        if j is None:
            return cls(variant=MechanismKind.GREEDY_UNBOUNDED)
        return cls(variant=MechanismKind.GREEDY_HORIZON, j=j)

    @classmethod
    def from_name(cls, name: str, k: Optional[int] = None, j: Optional[int] = None) -> "MechanismSpec":
        """Build from the CLI / HTTP names `seq`, `single` (needs k) and `greedy` (optional j)."""
        if name == "seq":
            return cls.sequential()
        if name == "single":
            if k is None:
                raise OutOfRange("k", k, "single-batch mechanism needs a batch size")
            return cls.single_batch(k)
        if name == "greedy":
            return cls.greedy(j)
        raise OutOfRange("mechanism", name, "expected seq, single or greedy")

    @property
    def is_voting(self) -> bool:
        return self.variant != MechanismKind.SEQUENTIAL

    @property
    def horizon(self) -> Optional[int]:
        """Maximum number of batches; None when unbounded."""
        if self.variant == MechanismKind.SINGLE_BATCH:
            return 1
        return self.j

    @property
    def label(self) -> str:
        if self.variant == MechanismKind.SEQUENTIAL:
            return "seq"
        if self.variant == MechanismKind.SINGLE_BATCH:
            return f"single{self.k}"
        if self.variant == MechanismKind.GREEDY_HORIZON:
            return f"greedy{self.j}"
        return "greedy"


# --- Execution records ---


class Decision(BaseModel):
    """Planner's decision Z and the recipient (1-based queue position)."""

    model_config = ConfigDict(frozen=True)

    allocated: bool
    recipient: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def _recipient_iff_allocated(self) -> "Decision":
        if self.allocated != (self.recipient is not None):
            raise ValueError("recipient must be present exactly when the object is allocated")
        return self


class BatchRecord(BaseModel):
    """One offered batch: size K_j, yes votes Y_j and the belief μ_j after it."""

    model_config = ConfigDict(frozen=True)

    index: int = Field(..., ge=1)
    size: int = Field(..., ge=1)
    yes_votes: int = Field(..., ge=0)
    posterior: float = Field(..., ge=0.0, le=1.0, description="Belief after the batch; may round to 0 or 1")

    @model_validator(mode="after")
    def _check_votes(self) -> "BatchRecord":
        if self.size % 2 == 0:
            raise ValueError("batch size must be odd")
        if self.yes_votes > self.size:
            raise ValueError("yes_votes cannot exceed the batch size")
        return self

    @property
    def majority(self) -> bool:
        return self.yes_votes >= (self.size + 1) // 2


class RunTrace(BaseModel):
    """One realized execution of a mechanism."""

    model_config = ConfigDict(frozen=True)

    params: ModelParams
    spec: MechanismSpec
    true_quality: Quality
    signals: list[Signal]
    batches: list[BatchRecord] = Field(default_factory=list)
    decision: Decision
    seed: int = Field(..., ge=0, lt=2**64)

    @model_validator(mode="after")
    def _check_consistency(self) -> "RunTrace":
        if len(self.signals) != self.params.population:
            raise ValueError("signals length must equal population")
        if sum(b.size for b in self.batches) > self.params.population:
            raise ValueError("batches use more agents than the population")
        if self.spec.is_voting:
            last_majority = bool(self.batches) and self.batches[-1].majority
            if self.decision.allocated != last_majority:
                raise ValueError("allocation must coincide with a majority in the last batch")
        return self

    @property
    def correct(self) -> bool:
        return self.decision.allocated == (self.true_quality == Quality.GOOD)


class CorrectnessReport(BaseModel):
    """Correctness c(V) with the method that produced it."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(..., ge=0.0, le=1.0)
    method: CorrectnessMethod
    std_error: float = Field(default=0.0, ge=0.0)
    trials: int = Field(default=0, ge=0)
    notes: list[str] = Field(default_factory=list)
    batches_reached: Optional[int] = Field(None, ge=0, description="Most batches offered on any history")

    @model_validator(mode="after")
    def _exact_has_no_error(self) -> "CorrectnessReport":
        if self.method != CorrectnessMethod.MONTE_CARLO and (self.std_error != 0.0 or self.trials != 0):
            raise ValueError("exact methods carry std_error = 0 and trials = 0")
        return self

    @classmethod
    def exact(cls, value: float, method: CorrectnessMethod, **kwargs) -> "CorrectnessReport":
        """Clamp rounding spill (1 + 1e-16) back into [0, 1]."""
        return cls(value=min(1.0, max(0.0, value)), method=method, **kwargs)


# --- Binomial kernel and IC analysis ---


class BinomialSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=0, description="Number of trials")
    p: float = Field(..., gt=0.0, lt=1.0, description="Success probability")


class AllocProbs(BaseModel):
    """Probability an opt-in agent receives the object, given ω=G (good) and ω=B (bad)."""

    model_config = ConfigDict(frozen=True)

    good: float = Field(..., gt=0.0, le=1.0)
    bad: float = Field(..., gt=0.0, le=1.0)


class IcInterval(BaseModel):
    """Open interval (lower, upper) of priors for which a size-K batch is IC."""

    model_config = ConfigDict(frozen=True)

    k: int = Field(..., ge=1)
    lower: float = Field(..., ge=0.0, le=1.0)
    upper: float = Field(..., ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _ordered(self) -> "IcInterval":
        if self.lower > self.upper:
            raise ValueError("lower endpoint above upper endpoint")
        return self

    def contains(self, mu: float) -> bool:
        return self.lower < mu < self.upper


class BatchBounds(BaseModel):
    """Smallest and largest odd IC batch size, K̲(μ) and K̄(μ)."""

    model_config = ConfigDict(frozen=True)

    min_k: int = Field(..., ge=1)
    max_k: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _odd_and_ordered(self) -> "BatchBounds":
        if self.min_k % 2 == 0 or self.max_k % 2 == 0:
            raise ValueError("batch bounds must be odd")
        if self.min_k > self.max_k:
            raise ValueError("min_k above max_k")
        return self


class UtilityPair(BaseModel):
    """Unnormalized expected utilities of opting in / out (opt-out is always 0)."""

    model_config = ConfigDict(frozen=True)

    opt_in: float
    opt_out: float = 0.0

    @model_validator(mode="after")
    def _opt_out_zero(self) -> "UtilityPair":
        if self.opt_out != 0.0:
            raise ValueError("opting out yields utility 0")
        return self


class NoIncentivesThreshold(BaseModel):
    """Minimal positive-signal count ȳ at which a non-strategic planner allocates."""

    model_config = ConfigDict(frozen=True)

    ybar: float
    population: int = Field(..., ge=1)

    @property
    def min_yes(self) -> int:
        """⌈ȳ⌉ clipped to [0, I+1] (I+1 = never allocate)."""
        return int(min(self.population + 1, max(0, math.ceil(self.ybar))))


# --- Oracles and sweeps ---


class McConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    trials: int = Field(..., ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    confidence_z: float = Field(default=3.0, gt=0.0)


class SweepConfig(BaseModel):
    """Grid of (q, μ) points for figure tables."""

    model_config = ConfigDict(frozen=True)

    q_values: list[float] = Field(default_factory=lambda: [0.6, 0.7, 0.8])
    mu_grid: tuple[float, float, float] = (0.005, 0.995, 0.005)
    population: int = Field(default=DEFAULT_POPULATION, ge=1)
    output_format: OutputFormat = OutputFormat.CSV
    output_path: Optional[str] = Field(None, description="None writes to standard output")
    k_max_table: int = Field(default=25, ge=1, description="Largest K listed by the intervals table")

    @model_validator(mode="after")
    def _check_grid(self) -> "SweepConfig":
        start, stop, step = self.mu_grid
        if not (0.0 < start < stop < 1.0):
            raise ValueError("mu grid needs 0 < start < stop < 1")
        if step <= 0.0:
            raise ValueError("mu grid step must be positive")
        if not self.q_values or any(not (0.5 < q < 1.0) for q in self.q_values):
            raise ValueError("q values must lie in (0.5, 1)")
        return self

    def mu_values(self) -> list[float]:
        """Grid points start, start+step, ..., rounded so that decimal grids stay decimal."""
        start, stop, step = self.mu_grid
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(count)]
