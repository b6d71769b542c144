"""Read-only HTTP queries over the batch-voting library."""

import logging
from contextlib import asynccontextmanager
from typing import Callable, Literal, Optional, TypeVar

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, Field, ValidationError

from batchvote.config import DEFAULT_POPULATION, LOG_FORMAT, LOG_LEVEL
from batchvote.errors import BatchVoteError
from batchvote.ic import batch_bounds, ic_interval
from batchvote.models import BatchBounds, CorrectnessReport, IcInterval, McConfig, MechanismSpec, validate_params
from batchvote.services.correctness import exact_correctness
from batchvote.services.oracle import mc_correctness

logger = logging.getLogger(__name__)

T = TypeVar("T")

MechanismName = Literal["seq", "single", "greedy"]


@asynccontextmanager
async def lifespan(app: FastAPI):
    logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT, datefmt="%H:%M:%S")
    logger.info("batchvote API ready")
    yield


app = FastAPI(
    title="Batch Voting",
    description="Incentive-compatible batch voting: IC intervals, batch sizes and correctness.",
    version="0.1.0",
    lifespan=lifespan,
)


class SimulateRequest(BaseModel):
    mechanism: MechanismName
    mu: float
    q: float
    population: int = DEFAULT_POPULATION
    k: Optional[int] = None
    j: Optional[int] = None
    trials: int = Field(..., description="Monte Carlo trials")
    seed: int = 0


def _guard(fn: Callable[[], T]) -> T:
    """Library errors become 422 responses."""
    try:
        return fn()
    except (BatchVoteError, ValidationError) as e:
        raise HTTPException(status_code=422, detail=str(e))


@app.get("/health")
async def health() -> dict:
    return {"status": "ok"}


@app.get("/ic-interval", response_model=IcInterval)
def get_ic_interval(k: int = Query(..., description="Odd batch size"), q: float = Query(...)) -> IcInterval:
    return _guard(lambda: ic_interval(k, q))


@app.get("/batch-bounds", response_model=Optional[BatchBounds])
def get_batch_bounds(mu: float, q: float) -> Optional[BatchBounds]:
    """Null when mu >= q (no batch size is incentive-compatible)."""
    return _guard(lambda: batch_bounds(validate_params(mu, q)))


@app.get("/correctness", response_model=CorrectnessReport)
def get_correctness(
    mechanism: MechanismName,
    mu: float,
    q: float,
    population: int = DEFAULT_POPULATION,
    k: Optional[int] = None,
    j: Optional[int] = None,
) -> CorrectnessReport:
    def run() -> CorrectnessReport:
        spec = MechanismSpec.from_name(mechanism, k=k, j=j)
        return exact_correctness(spec, validate_params(mu, q, population))

    return _guard(run)


@app.post("/simulate", response_model=CorrectnessReport)
def simulate(payload: SimulateRequest) -> CorrectnessReport:
    def run() -> CorrectnessReport:
        spec = MechanismSpec.from_name(payload.mechanism, k=payload.k, j=payload.j)
        params = validate_params(payload.mu, payload.q, payload.population)
        return mc_correctness(spec, params, McConfig(trials=payload.trials, seed=payload.seed))

    return _guard(run)
