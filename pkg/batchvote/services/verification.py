"""
Invariant suites behind `batchvote verify`.

Each check returns (passed, detail). The fast level runs every check on reduced grids;
the full level uses the complete grids (odd K up to 199, μ steps of
0.01 / 0.005 / 0.001, populations up to 15, 10^5 Monte Carlo trials).
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from batchvote.binom import combinatorial_identity_check, majority_tail, minority_tail, sum_min_check
from batchvote.config import PLATEAU_TOLERANCE
from batchvote.ic import alloc_probs, alloc_probs_via_identity, batch_bounds, ic_interval, is_ic, no_ic
from batchvote.models import McConfig, MechanismSpec, ModelParams, Signal
from batchvote.services.correctness import (
    DominanceRegime,
    dominance_regime,
    exact_correctness,
    greedy2_lower_bound,
    mixed_upper_bound_correctness,
    upper_bound_correctness,
)
from batchvote.services.greedy import run_mechanism, sample_world
from batchvote.services.oracle import (
    brute_force_alloc_probs,
    brute_force_correctness,
    ic_empirical_check,
    mc_agrees,
    mc_correctness,
)
from batchvote.services.sequential import best_response, seq_correctness, seq_strategy

logger = logging.getLogger(__name__)

FAST = "fast"
FULL = "full"

FIGURE_Q = (0.6, 0.7, 0.8)
ORACLE_Q = tuple(round(0.55 + 0.05 * i, 2) for i in range(9))


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0


@dataclass
class Check:
    name: str
    run: Callable[[bool], tuple[bool, str]]


REGISTRY: list[Check] = []


def check(name: str):
    def register(fn: Callable[[bool], tuple[bool, str]]):
        REGISTRY.append(Check(name=name, run=fn))
        return fn

    return register


def _grid(start: float, stop: float, step: float) -> list[float]:
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def _first_failure(cases) -> tuple[bool, str]:
    """cases yields (ok, description); stop at the first failure."""
    count = 0
    for ok, description in cases:
        count += 1
        if not ok:
            return False, description
    return True, f"{count} cases"


# --- Closed forms and identities ---


@check("interval-closed-forms")
def _interval_closed_forms(full: bool) -> tuple[bool, str]:
    def cases():
        for q in FIGURE_Q:
            one, three = ic_interval(1, q), ic_interval(3, q)
            yield abs(one.lower - (1 - q)) <= 1e-12 and abs(one.upper - q) <= 1e-12, f"I_1 at q={q}"
            lower3 = (1 - q) ** 2 * (2 * q + 1)
            upper3 = q / 2 + 0.25
            yield abs(three.lower - lower3) <= 1e-12 and abs(three.upper - upper3) <= 1e-12, f"I_3 at q={q}"

    return _first_failure(cases())


@check("binomial-identities")
def _binomial_identities(full: bool) -> tuple[bool, str]:
    def cases():
        for k in range(1, 61):
            for y in range(1, k + 1):
                yield combinatorial_identity_check(k, y), f"K·C(K−1,y−1) = y·C(K,y) at K={k}, y={y}"
        rng = np.random.default_rng(0)
        for trial in range(50):
            a, b = rng.random(8), rng.random(8)
            yield sum_min_check(a, b), f"sum-min inequality, draw {trial}"

    return _first_failure(cases())


@check("allocation-probabilities")
def _allocation_probabilities(full: bool) -> tuple[bool, str]:
    k_top = 15 if full else 9
    qs = ORACLE_Q if full else (0.6, 0.8)

    def cases():
        for q in qs:
            for k in range(1, k_top + 1, 2):
                direct, via, brute = alloc_probs(k, q), alloc_probs_via_identity(k, q), brute_force_alloc_probs(k, q)
                close = all(
                    abs(x - y) <= 1e-12
                    for x, y in ((direct.good, brute.good), (direct.bad, brute.bad), (via.good, brute.good), (via.bad, brute.bad))
                )
                yield close, f"allocation probabilities at K={k}, q={q}"
                # bad-quality odds ratio
                ratio = direct.bad / direct.good
                expected = minority_tail(k, q) * q / (majority_tail(k, q) * (1 - q))
                yield abs(ratio - expected) <= 1e-9 * expected, f"B/G ratio at K={k}, q={q}"

    return _first_failure(cases())


@check("ic-oracle-equivalence")
def _ic_oracle_equivalence(full: bool) -> tuple[bool, str]:
    k_top = 15 if full else 7
    qs = ORACLE_Q if full else (0.6, 0.75)
    mus = _grid(0.01, 0.99, 0.01 if full else 0.05)

    def cases():
        for q in qs:
            for mu in mus:
                params = ModelParams(mu=mu, q=q)
                for k in range(1, k_top + 1, 2):
                    yield ic_empirical_check(k, params) == is_ic(k, params), f"IC at K={k}, mu={mu}, q={q}"

    return _first_failure(cases())


# --- Monotonicity and overlap ---


@check("tail-increase")
def _tail_increase(full: bool) -> tuple[bool, str]:
    k_top = 199 if full else 99
    qs = (0.51,) + ORACLE_Q + (0.99,)

    def cases():
        for q in qs:
            for k in range(3, k_top + 1, 2):
                # compared through the minority side, which stays representable once P(X_K >= m) rounds to 1
                yield minority_tail(k, q) < minority_tail(k - 2, q), f"P(X_K >= m) increasing at K={k}, q={q}"

    return _first_failure(cases())


@check("interval-decrease-overlap")
def _interval_decrease_overlap(full: bool) -> tuple[bool, str]:
    k_top = 199 if full else 61

    def cases():
        for q in FIGURE_Q:
            for k in range(3, k_top + 1, 2):
                now, before = ic_interval(k, q), ic_interval(k - 2, q)
                chain = now.lower < before.lower < now.upper < before.upper
                yield chain, f"overlap chain at K={k}, q={q}"

    return _first_failure(cases())


@check("optimal-batch-monotone")
def _optimal_batch_monotone(full: bool) -> tuple[bool, str]:
    mus = _grid(0.001, 0.999, 0.001 if full else 0.01)

    def cases():
        for q in FIGURE_Q:
            previous = None
            for mu in mus:
                bounds = batch_bounds(ModelParams(mu=mu, q=q))
                current = 0 if bounds is None else bounds.max_k
                if previous is not None:
                    yield current <= previous, f"K̄ nonincreasing at mu={mu}, q={q}"
                previous = current
        # higher precision, smaller optimal batch at low priors
        for mu in (0.05, 0.1, 0.2, 0.3):
            sizes = [batch_bounds(ModelParams(mu=mu, q=q)).max_k for q in FIGURE_Q]
            yield all(a >= b for a, b in zip(sizes, sizes[1:])), f"K̄ nonincreasing in q at mu={mu}"

    return _first_failure(cases())


# --- Sequential offering ---


@check("sequential-closed-form")
def _sequential_closed_form(full: bool) -> tuple[bool, str]:
    mus = _grid(0.01, 0.99, 0.01 if full else 0.05)

    def cases():
        for q in ORACLE_Q:
            for mu in mus:
                params = ModelParams(mu=mu, q=q)
                closed = seq_correctness(params).value
                if mu > q:
                    branch = mu
                elif mu >= 0.5:
                    branch = 2 * mu * q * (1 - q) + q * q
                elif mu >= 1 - q:
                    branch = q
                else:
                    branch = 1 - mu
                brute = brute_force_correctness(MechanismSpec.sequential(), params).value
                yield abs(closed - branch) <= 1e-12 and abs(closed - brute) <= 1e-12, f"c(seq) at mu={mu}, q={q}"

    return _first_failure(cases())


@check("sequential-best-response")
def _sequential_best_response(full: bool) -> tuple[bool, str]:
    mus = _grid(0.02, 0.98, 0.02 if full else 0.08)

    def cases():
        for q in FIGURE_Q:
            for mu in mus:
                params = ModelParams(mu=mu, q=q)
                for position in range(1, 5):
                    strategy = seq_strategy(position, params)
                    for s in Signal:
                        yield strategy(s) == best_response(position, s, params), (
                            f"agent {position} with signal {s.value} at mu={mu}, q={q}"
                        )

    return _first_failure(cases())


# --- Exact correctness ---


@check("exact-vs-brute-force")
def _exact_vs_brute_force(full: bool) -> tuple[bool, str]:
    populations = (5, 9, 15) if full else (5, 9)
    qs = ORACLE_Q if full else (0.6, 0.8)
    mus = _grid(0.01, 0.99, 0.01 if full else 0.1)
    specs = [MechanismSpec.single_batch(3), MechanismSpec.greedy(1), MechanismSpec.greedy(2), MechanismSpec.greedy()]

    def cases():
        for n in populations:
            for q in qs:
                for mu in mus:
                    params = ModelParams(mu=mu, q=q, population=n)
                    for spec in specs:
                        exact = exact_correctness(spec, params).value
                        brute = brute_force_correctness(spec, params).value
                        yield abs(exact - brute) <= 1e-10, f"{spec.label} at I={n}, mu={mu}, q={q}"

    return _first_failure(cases())


@check("voting-beats-sequential")
def _voting_beats_sequential(full: bool) -> tuple[bool, str]:
    mus = _grid(0.005, 0.995, 0.005 if full else 0.05)

    def cases():
        for q in FIGURE_Q:
            for mu in mus:
                params = ModelParams(mu=mu, q=q)
                seq = seq_correctness(params).value
                g1 = exact_correctness(MechanismSpec.greedy(1), params).value
                g2 = exact_correctness(MechanismSpec.greedy(2), params).value
                where = f"mu={mu}, q={q}"
                if mu >= q:
                    yield abs(g1 - mu) <= 1e-12 and abs(g2 - mu) <= 1e-12, f"voting equals mu at {where}"
                    # at mu == q the second agent still follows their signal
                    if mu > q:
                        yield abs(seq - mu) <= 1e-12, f"seq equals mu at {where}"
                    continue
                single_wins = dominance_regime(params) not in (DominanceRegime.TWO_BATCHES, DominanceRegime.NO_IC)
                yield (g1 > seq) == single_wins, f"greedy1 beats seq iff mu < q/2 + 1/4 at {where}"
                yield g2 > seq, f"greedy2 beats seq at {where}"
                g3 = exact_correctness(MechanismSpec.greedy(3), params)
                # a third batch strictly helps whenever one is still offered on some history
                if g3.batches_reached and g3.batches_reached >= 3:
                    yield g3.value > g2, f"greedy3 beats greedy2 at {where}"
                if dominance_regime(params) == DominanceRegime.TWO_BATCHES:
                    yield g2 >= greedy2_lower_bound(params) - 1e-12, f"greedy2 lower bound at {where}"

    return _first_failure(cases())


@check("price-of-anarchy")
def _price_of_anarchy(full: bool) -> tuple[bool, str]:
    mus = _grid(0.005, 0.995, 0.005 if full else 0.01)

    def cases():
        for q in FIGURE_Q:
            ratios = []
            for mu in mus:
                params = ModelParams(mu=mu, q=q)
                ratios.append(
                    upper_bound_correctness(params).value / exact_correctness(MechanismSpec.greedy(1), params).value
                )
            # flat on [mu_bar_3, q]
            top = max(ratios)
            nearest = int(np.argmin([abs(mu - q) for mu in mus]))
            yield ratios[nearest] >= top - PLATEAU_TOLERANCE, (
                f"ratio {ratios[nearest]:.12g} at mu={mus[nearest]} below the maximum {top:.12g} for q={q}"
            )
            yield abs(top - 1 / q) <= 0.02, f"max ratio {top:.6g} vs 1/q at q={q}"

    return _first_failure(cases())


@check("upper-bound-sanity")
def _upper_bound_sanity(full: bool) -> tuple[bool, str]:
    mus = _grid(0.05, 0.95, 0.05 if full else 0.15)
    population = 345 if full else 61

    def cases():
        yield upper_bound_correctness(ModelParams(mu=0.5, q=0.6)).value > 0.999, "upper bound at mu=0.5, q=0.6"
        specs = [MechanismSpec.greedy(1), MechanismSpec.greedy(2), MechanismSpec.greedy()]
        for q in FIGURE_Q:
            for mu in mus:
                params = ModelParams(mu=mu, q=q, population=population)
                bound = mixed_upper_bound_correctness(params).value
                values = [seq_correctness(params).value] + [exact_correctness(s, params).value for s in specs]
                yield all(v <= bound + 1e-12 for v in values), f"mixed bound dominates at mu={mu}, q={q}"

    return _first_failure(cases())


# --- Engine and Monte Carlo ---


@check("engine-traces")
def _engine_traces(full: bool) -> tuple[bool, str]:
    rng = np.random.default_rng(2024)
    runs = 200 if full else 40

    def cases():
        for run in range(runs):
            mu, q = float(rng.uniform(0.02, 0.95)), float(rng.choice(FIGURE_Q))
            params = ModelParams(mu=mu, q=q)
            quality, signals = sample_world(params, rng)
            trace = run_mechanism(MechanismSpec.greedy(), params, quality, signals, seed=run)
            sizes = [b.size for b in trace.batches]
            beliefs = [mu] + [b.posterior for b in trace.batches]
            yield all(a <= b for a, b in zip(sizes, sizes[1:])), f"batch sizes nondecreasing, run {run}"
            yield all(a >= b for a, b in zip(beliefs[:-1], beliefs[1:-1])), f"beliefs fall after failures, run {run}"
            for record, belief in zip(trace.batches, beliefs):
                ok = is_ic(record.size, params.with_mu(belief)) or no_ic(mu, q)
                yield ok, f"batch {record.index} IC, run {run}"

    return _first_failure(cases())


@check("monte-carlo")
def _monte_carlo(full: bool) -> tuple[bool, str]:
    points, trials = (20, 100_000) if full else (5, 20_000)
    rng = np.random.default_rng(7)
    specs = [MechanismSpec.sequential(), MechanismSpec.greedy(1), MechanismSpec.greedy(2), MechanismSpec.greedy()]
    misses = []
    for point in range(points):
        spec = specs[int(rng.integers(len(specs)))]
        params = ModelParams(mu=float(rng.uniform(0.02, 0.98)), q=float(rng.choice(FIGURE_Q)))
        report = mc_correctness(spec, params, McConfig(trials=trials, seed=point))
        if not mc_agrees(report, exact_correctness(spec, params).value):
            misses.append(f"{spec.label} at mu={params.mu:.4g}, q={params.q}")
    allowed = points // 20
    return len(misses) <= allowed, f"{len(misses)} of {points} outside 3 std errors {misses}"


def run_suite(level: str = FAST, only: Optional[list[str]] = None) -> list[CheckResult]:
    full = level == FULL
    results = []
    for item in REGISTRY:
        if only and item.name not in only:
            continue
        start = time.perf_counter()
        try:
            passed, detail = item.run(full)
        except Exception as e:  # a crashing check is a failed check
            logger.exception("Check %s raised.", item.name)
            passed, detail = False, f"{type(e).__name__}: {e}"
        elapsed = time.perf_counter() - start
        logger.info("Check %s: %s in %.2fs.", item.name, "pass" if passed else "FAIL", elapsed)
        results.append(CheckResult(name=item.name, passed=passed, detail=detail, seconds=elapsed))
    return results


def check_names() -> list[str]:
    return [item.name for item in REGISTRY]
