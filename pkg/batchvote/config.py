"""Configuration for mechanism evaluation, oracles and the CLI / HTTP surfaces."""

import os

# Hard cap of the optimal batch-size search; SearchExhausted beyond it.
K_MAX: int = int(os.environ.get("BATCHVOTE_KMAX", "20001"))
# Queue length I when not given.
DEFAULT_POPULATION: int = int(os.environ.get("BATCHVOTE_POPULATION", "345"))

# --- Exact-rational arbiter for IC endpoint comparisons ---
ARBITER_TOLERANCE: float = float(os.environ.get("BATCHVOTE_ARBITER_TOL", "1e-9"))
ARBITER_MAX_K: int = int(os.environ.get("BATCHVOTE_ARBITER_MAX_K", "999"))
ARBITER_MAX_DENOMINATOR: int = 10**12

# --- Oracles ---
BRUTE_FORCE_MAX: int = int(os.environ.get("BATCHVOTE_BRUTE_FORCE_MAX", "15"))
MC_CHUNK_SIZE: int = int(os.environ.get("BATCHVOTE_MC_CHUNK", "10000"))

# --- Sweeps ---
WORKERS: int = int(os.environ.get("BATCHVOTE_WORKERS", "1"))
SIGNIFICANT_DIGITS: int = 12
# Ratios within this of the maximum count as maximal (the price-of-anarchy ratio has a plateau).
PLATEAU_TOLERANCE: float = 1e-12

LOG_LEVEL: str = os.environ.get("BATCHVOTE_LOG_LEVEL", "WARNING")
LOG_FORMAT: str = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
