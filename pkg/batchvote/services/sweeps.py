"""
Figure tables: IC intervals per batch size, the optimal batch size over the prior
grid, correctness of every mechanism against the no-incentives bound, and the
allocation rule of sequential offering over (μ, q).

Rows are produced per (q, μ) point, optionally in worker processes, and always
emitted in (q, μ) order with 12 significant digits.
"""

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Optional, TextIO

import numpy as np
import pandas as pd

from batchvote.config import PLATEAU_TOLERANCE, SIGNIFICANT_DIGITS, WORKERS
from batchvote.ic import batch_bounds, ic_interval
from batchvote.models import MechanismSpec, ModelParams, OutputFormat, SeqRegime, SweepConfig
from batchvote.services.correctness import (
    exact_correctness,
    mixed_upper_bound_correctness,
    upper_bound_correctness,
)
from batchvote.services.sequential import classify_regime, seq_correctness

logger = logging.getLogger(__name__)

INTERVAL_COLUMNS = ["q", "k", "lower", "upper"]
OPTIMAL_BATCH_COLUMNS = ["mu", "q", "k_min", "k_bar"]
COMPARISON_COLUMNS = [
    "mu",
    "q",
    "c_seq",
    "c_greedy1",
    "c_greedy2",
    "c_upper_bound",
    "c_upper_bound_mixed",
]
SEQUENTIAL_REGIME_COLUMNS = ["mu", "q", "regime", "allocation", "c_seq"]

# who can receive the object under sequential offering
SEQ_ALLOCATION = {
    SeqRegime.LOW_PRIOR: "discard",
    SeqRegime.LOWER: "first-agent",
    SeqRegime.UPPER: "first-two-agents",
    SeqRegime.HIGH_PRIOR: "always",
}


def significant(x: float, digits: int = SIGNIFICANT_DIGITS) -> float:
    return float(f"{x:.{digits}g}")


def _optimal_batch_row(q: float, mu: float, population: int) -> dict:
    bounds = batch_bounds(ModelParams(mu=mu, q=q, population=population))
    return {
        "mu": mu,
        "q": q,
        "k_min": None if bounds is None else bounds.min_k,
        "k_bar": None if bounds is None else bounds.max_k,
    }


def _comparison_row(q: float, mu: float, population: int) -> dict:
    params = ModelParams(mu=mu, q=q, population=population)
    return {
        "mu": mu,
        "q": q,
        "c_seq": significant(seq_correctness(params).value),
        "c_greedy1": significant(exact_correctness(MechanismSpec.greedy(1), params).value),
        "c_greedy2": significant(exact_correctness(MechanismSpec.greedy(2), params).value),
        "c_upper_bound": significant(upper_bound_correctness(params).value),
        "c_upper_bound_mixed": significant(mixed_upper_bound_correctness(params).value),
    }


def _sequential_regime_row(q: float, mu: float, population: int) -> dict:
    params = ModelParams(mu=mu, q=q, population=population)
    regime = classify_regime(params)
    return {
        "mu": mu,
        "q": q,
        "regime": regime.value,
        "allocation": SEQ_ALLOCATION[regime],
        "c_seq": significant(seq_correctness(params).value),
    }


def _grid_rows(row: Callable[[float, float, int], dict], cfg: SweepConfig, workers: int) -> list[dict]:
    points = [(q, mu) for q in cfg.q_values for mu in cfg.mu_values()]
    logger.info("Sweeping %d (q, mu) points with %d worker(s).", len(points), workers)
    if workers > 1:
        qs, mus = zip(*points)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map preserves input order
            return list(pool.map(row, qs, mus, [cfg.population] * len(points), chunksize=16))
    return [row(q, mu, cfg.population) for q, mu in points]


def intervals_table(cfg: SweepConfig) -> pd.DataFrame:
    """(q, K, μ̲_K, μ̄_K) for odd K up to cfg.k_max_table."""
    rows = []
    for q in cfg.q_values:
        for k in range(1, cfg.k_max_table + 1, 2):
            interval = ic_interval(k, q)
            rows.append(
                {"q": q, "k": k, "lower": significant(interval.lower), "upper": significant(interval.upper)}
            )
    return pd.DataFrame(rows, columns=INTERVAL_COLUMNS)


def optimal_batch_table(cfg: SweepConfig, workers: int = WORKERS) -> pd.DataFrame:
    """(μ, q, K̲, K̄); both bounds are missing where μ >= q."""
    frame = pd.DataFrame(_grid_rows(_optimal_batch_row, cfg, workers), columns=OPTIMAL_BATCH_COLUMNS)
    return frame.astype({"k_min": "Int64", "k_bar": "Int64"})


def comparison_table(cfg: SweepConfig, workers: int = WORKERS) -> pd.DataFrame:
    return pd.DataFrame(_grid_rows(_comparison_row, cfg, workers), columns=COMPARISON_COLUMNS)


def sequential_regimes_table(cfg: SweepConfig, workers: int = WORKERS) -> pd.DataFrame:
    """(μ, q, regime, allocation rule, c(seq)) over the prior grid."""
    return pd.DataFrame(_grid_rows(_sequential_regime_row, cfg, workers), columns=SEQUENTIAL_REGIME_COLUMNS)


FIGURES: dict[str, Callable[..., pd.DataFrame]] = {
    "intervals": lambda cfg, workers=WORKERS: intervals_table(cfg),
    "optimal-batch": optimal_batch_table,
    "comparison": comparison_table,
    "price-of-anarchy": lambda cfg, workers=WORKERS: price_of_anarchy(comparison_table(cfg, workers)),
    "sequential-regimes": sequential_regimes_table,
}


def build_table(figure: str, cfg: SweepConfig, workers: int = WORKERS) -> pd.DataFrame:
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; expected one of {sorted(FIGURES)}")
    return FIGURES[figure](cfg, workers=workers)


def price_of_anarchy(table: pd.DataFrame) -> pd.DataFrame:
    """
    Per q: the grid μ maximizing c_upper_bound / c_greedy1, and that ratio.

    The ratio is flat wherever K̄ = 1, so among the maximal points (within
    PLATEAU_TOLERANCE) the one nearest q is reported.
    """
    ratios = table.assign(ratio=table["c_upper_bound"] / table["c_greedy1"])
    rows = []
    for q, group in ratios.groupby("q", sort=True):
        top = group[group["ratio"] >= group["ratio"].max() - PLATEAU_TOLERANCE]
        best = top.loc[(top["mu"] - q).abs().idxmin()]
        rows.append({"q": q, "mu_argmax": best["mu"], "ratio": best["ratio"]})
    return pd.DataFrame(rows, columns=["q", "mu_argmax", "ratio"])


# --- Emission ---


def _plain(value):
    if pd.isna(value):
        return None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _records(table: pd.DataFrame) -> list[dict]:
    return [{col: _plain(v) for col, v in row.items()} for row in table.to_dict(orient="records")]


def write_table(table: pd.DataFrame, fmt: OutputFormat, stream: TextIO) -> None:
    """CSV with a header row and LF endings, or a JSON array of row objects."""
    if fmt == OutputFormat.CSV:
        table.to_csv(stream, index=False, float_format=f"%.{SIGNIFICANT_DIGITS}g", lineterminator="\n")
    else:
        stream.write(json.dumps(_records(table)))
        stream.write("\n")


def read_table(path: str, fmt: OutputFormat, integer_columns: Optional[list[str]] = None) -> pd.DataFrame:
    """Parse an emitted table back; integer columns stay nullable integers."""
    if fmt == OutputFormat.CSV:
        table = pd.read_csv(path, float_precision="round_trip")
    else:
        with open(path, encoding="utf-8") as fh:
            table = pd.DataFrame(json.load(fh))
    if integer_columns:
        table = table.astype({c: "Int64" for c in integer_columns if c in table.columns})
    return table
