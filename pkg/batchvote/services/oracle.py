"""
Independent checks of the closed forms: exhaustive enumeration at small scale and
seeded Monte Carlo at full scale.

Enumeration never samples the recipient; an opt-in agent in a winning batch of Y
yes votes is credited 1/Y. Monte Carlo splits the trials into fixed chunks, each with
its own counter-based generator, and adds integer success counts, so the estimate is
the same for any number of workers.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import lru_cache

import numpy as np

from batchvote.config import BRUTE_FORCE_MAX, MC_CHUNK_SIZE, WORKERS
from batchvote.errors import CostGuard, DomainError
from batchvote.ic import rational
from batchvote.models import (
    AllocProbs,
    CorrectnessMethod,
    CorrectnessReport,
    McConfig,
    MechanismSpec,
    ModelParams,
    Signal,
)
from batchvote.services.greedy import allocate_profiles, sample_profiles
from batchvote.services.sequential import seq_outcome

logger = logging.getLogger(__name__)


@lru_cache(maxsize=1024)
def _exact_alloc_probs(k: int, q: Fraction) -> tuple[Fraction, Fraction]:
    """Agent 1 votes yes; walk every yes/no profile of the other K−1 voters."""
    if k < 1 or k % 2 == 0:
        raise DomainError(f"batch size must be odd and >= 1, got K={k}")
    if k > BRUTE_FORCE_MAX:
        raise DomainError(f"brute-force allocation probabilities need K <= {BRUTE_FORCE_MAX}, got K={k}")
    others = k - 1
    # weight of a profile with m positive signals among the others, under G and under B
    under_good = [q**m * (1 - q) ** (others - m) for m in range(others + 1)]
    under_bad = [(1 - q) ** m * q ** (others - m) for m in range(others + 1)]
    good = bad = Fraction(0)
    for profile in itertools.product((True, False), repeat=others):
        m = sum(profile)
        yes = m + 1
        if 2 * yes > k:
            good += under_good[m] / yes
            bad += under_bad[m] / yes
    return good, bad


def brute_force_alloc_probs(k: int, q: float) -> AllocProbs:
    """(𝒢_K, ℬ_K) by exhaustive enumeration in exact rationals."""
    good, bad = _exact_alloc_probs(k, rational(q))
    return AllocProbs(good=float(good), bad=float(bad))


def ic_empirical_check(k: int, params: ModelParams) -> bool:
    """Both IC sign conditions recomputed from the enumerated allocation probabilities."""
    good, bad = _exact_alloc_probs(k, rational(params.q))
    mu, q = rational(params.mu), rational(params.q)
    opt_in_good = mu * q * good - (1 - mu) * (1 - q) * bad
    opt_in_bad = mu * (1 - q) * good - (1 - mu) * q * bad
    return opt_in_good > 0 and opt_in_bad < 0


def _profile_matrix(n: int) -> np.ndarray:
    """All 2^n signal profiles as a boolean matrix, column i = agent i+1."""
    codes = np.arange(2**n, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n)) & 1).astype(bool)


def _brute_force_sequential(params: ModelParams) -> float:
    mu, q = params.mu, params.q
    terms = []
    for good, prior in ((True, mu), (False, 1.0 - mu)):
        for pair in itertools.product((Signal.GOOD, Signal.BAD), repeat=2):
            weight = prior
            for s in pair:
                weight *= q if (s == Signal.GOOD) == good else 1.0 - q
            if seq_outcome(params, list(pair)).allocated == good:
                terms.append(weight)
    return math.fsum(terms)


def brute_force_correctness(spec: MechanismSpec, params: ModelParams) -> CorrectnessReport:
    """c(V) summed over ω and every signal profile."""
    if not spec.is_voting:
        # only the first two agents ever act on their signal
        return CorrectnessReport.exact(_brute_force_sequential(params), CorrectnessMethod.BRUTE_FORCE)

    n = params.population
    if n > BRUTE_FORCE_MAX:
        raise CostGuard(BRUTE_FORCE_MAX, n)
    profiles = _profile_matrix(n)
    allocated = allocate_profiles(spec, params, profiles)
    positives = profiles.sum(axis=1)
    q = params.q
    under_good = q**positives * (1.0 - q) ** (n - positives)
    under_bad = (1.0 - q) ** positives * q ** (n - positives)
    good_right = math.fsum(under_good[allocated])
    bad_right = math.fsum(under_bad[~allocated])
    value = math.fsum([params.mu * good_right, (1.0 - params.mu) * bad_right])
    return CorrectnessReport.exact(value, CorrectnessMethod.BRUTE_FORCE)


# --- Monte Carlo ---


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk])))


def _chunk_successes(spec: MechanismSpec, params: ModelParams, seed: int, chunk: int, size: int) -> int:
    good, signals = sample_profiles(params, chunk_rng(seed, chunk), size)
    allocated = allocate_profiles(spec, params, signals)
    return int(np.count_nonzero(allocated == good))


def mc_correctness(
    spec: MechanismSpec,
    params: ModelParams,
    cfg: McConfig,
    workers: int = WORKERS,
    chunk_size: int = MC_CHUNK_SIZE,
) -> CorrectnessReport:
    """Sample mean of correct allocations with std_error = sqrt(p̂(1−p̂)/trials)."""
    sizes = [min(chunk_size, cfg.trials - start) for start in range(0, cfg.trials, chunk_size)]

    def run(chunk: int) -> int:
        return _chunk_successes(spec, params, cfg.seed, chunk, sizes[chunk])

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            successes = sum(pool.map(run, range(len(sizes))))
    else:
        successes = sum(run(c) for c in range(len(sizes)))

    estimate = successes / cfg.trials
    std_error = math.sqrt(estimate * (1.0 - estimate) / cfg.trials)
    logger.info(
        "Monte Carlo %s at mu=%.6g q=%.6g: %d/%d correct over %d chunks.",
        spec.label, params.mu, params.q, successes, cfg.trials, len(sizes),
    )
    return CorrectnessReport(
        value=estimate, method=CorrectnessMethod.MONTE_CARLO, std_error=std_error, trials=cfg.trials
    )


def mc_agrees(report: CorrectnessReport, exact: float, z: float = 3.0) -> bool:
    """|estimate − exact| within z standard errors, using the larger of the sampled and exact errors."""
    reference = math.sqrt(exact * (1.0 - exact) / report.trials)
    return abs(report.value - exact) <= z * max(report.std_error, reference) + 1e-12
