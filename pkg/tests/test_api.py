"""
HTTP surface tests using FastAPI's TestClient.
Run: pytest tests/test_api.py -v
"""

import pytest

pytest.importorskip("httpx")

from fastapi.testclient import TestClient  # noqa: E402

from batchvote.main import app  # noqa: E402


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


class TestQueries:
    """GET endpoints."""

    def test_health(self, client):
        r = client.get("/health")
        assert r.status_code == 200
        assert r.json() == {"status": "ok"}

    def test_ic_interval(self, client):
        r = client.get("/ic-interval", params={"k": 3, "q": 0.6})
        assert r.status_code == 200
        body = r.json()
        assert body["k"] == 3
        assert body["lower"] == pytest.approx(0.352)
        assert body["upper"] == pytest.approx(0.55)

    def test_even_batch(self, client):
        r = client.get("/ic-interval", params={"k": 4, "q": 0.6})
        assert r.status_code == 422
        assert "odd" in r.json()["detail"]

    def test_batch_bounds(self, client):
        r = client.get("/batch-bounds", params={"mu": 0.45, "q": 0.6})
        assert r.json() == {"min_k": 1, "max_k": 7}

    def test_batch_bounds_none(self, client):
        r = client.get("/batch-bounds", params={"mu": 0.7, "q": 0.6})
        assert r.status_code == 200
        assert r.json() is None

    def test_correctness(self, client):
        r = client.get("/correctness", params={"mechanism": "greedy", "mu": 0.45, "q": 0.6, "j": 1})
        assert r.status_code == 200
        body = r.json()
        assert body["value"] == pytest.approx(0.710208)
        assert body["method"] == "exact_dp"

    @pytest.mark.parametrize(
        "params",
        [
            {"mechanism": "greedy", "mu": 1.5, "q": 0.6},
            {"mechanism": "single", "mu": 0.45, "q": 0.6},
            {"mechanism": "lottery", "mu": 0.45, "q": 0.6},
        ],
    )
    def test_correctness_rejects(self, client, params):
        assert client.get("/correctness", params=params).status_code == 422


class TestSimulate:
    """POST /simulate."""

    def test_seeded(self, client):
        payload = {"mechanism": "single", "k": 1, "mu": 0.5, "q": 0.7, "population": 5, "trials": 4000, "seed": 3}
        first = client.post("/simulate", json=payload).json()
        second = client.post("/simulate", json=payload).json()
        assert first == second
        assert first["method"] == "monte_carlo"
        assert first["value"] == pytest.approx(0.7, abs=0.05)

    def test_zero_trials(self, client):
        payload = {"mechanism": "seq", "mu": 0.5, "q": 0.7, "trials": 0}
        assert client.post("/simulate", json=payload).status_code == 422
