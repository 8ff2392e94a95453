import pytest
from fastapi.testclient import TestClient

from app.main import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"


def test_meta_planners(client):
    data = client.get("/meta/planners").json()
    assert "platypoos" in data["planners"]
    assert data["requires"]["olop"] == ["planner.btilde", "planner.rmaxtilde"]


def test_run(client):
    body = {"env": {"id": "toy", "b": 5}, "budget": 300, "seeds": {"master": 3, "replications": 2}}
    r = client.post("/experiments/run", json=body)
    assert r.status_code == 200
    records = r.json()
    assert len(records) == 2
    assert all(rec["regret"] >= 0 for rec in records)
    assert all(rec["budget_used"] <= 301 for rec in records)


def test_rollout(client):
    body = {"env": {"id": "toy"}, "planner": {"id": "sequool"}, "budget": 100, "rollout": {"steps": 5}}
    r = client.post("/experiments/rollout", json=body)
    assert r.status_code == 200
    assert len(r.json()[0]["actions"]) == 5


def test_unknown_keys_are_rejected(client):
    r = client.post("/experiments/run", json={"env": {"id": "toy", "colour": "red"}})
    assert r.status_code == 422


def test_planner_precondition_is_a_bad_request(client):
    body = {"env": {"id": "toy", "b": 10}, "planner": {"id": "sequool"}, "budget": 100}
    r = client.post("/experiments/run", json=body)
    assert r.status_code == 400
    assert "noiseless" in r.json()["detail"]

    latest = client.get("/runs", params={"limit": 1}).json()[0]
    assert latest["kind"] == "run"
    assert latest["status"] == "error"
    assert latest["planner"] == "sequool"


def test_sweep(client):
    body = {
        "env": {"id": "toy"},
        "output": {"timing": False},
        "sweep": {"planners": ["platypoos", "sequool"], "budgets": [300]},
    }
    r = client.post("/experiments/sweep", json=body)
    assert r.status_code == 200
    assert [row["planner"] for row in r.json()] == ["platypoos", "sequool"]


def test_sweep_without_grid(client):
    r = client.post("/experiments/sweep", json={"env": {"id": "toy"}})
    assert r.status_code == 400


def test_diagnostics(client):
    body = {
        "env": {"id": "synthetic", "k": 2, "depth": 5, "gamma": 0.5, "nu": 2, "rho": 0.5},
        "diagnose": {"depth": 3},
    }
    r = client.post("/diagnostics", json=body)
    assert r.status_code == 200
    assert r.json()["prop2_verdict"] == "pass"


def test_runs_limit(client):
    assert client.get("/runs", params={"limit": 0}).status_code == 422
    assert len(client.get("/runs", params={"limit": 2}).json()) <= 2
