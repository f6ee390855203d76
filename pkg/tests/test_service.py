from __future__ import annotations

import json
import time

import pytest
from fastapi.testclient import TestClient

from aquaplace.network import generate_grid_network, save_network
from aquaplace.service import create_app

QUICK_SCHEDULE = {"runs": 10, "sweeps": 200, "seed": 2}
SLOW_SCHEDULE = {"runs": 60, "sweeps": 3000, "seed": 2}


@pytest.fixture
def service_dirs(tmp_path):
    net_path = tmp_path / "net.json"
    save_network(generate_grid_network(size=3, seed=7), net_path)
    return net_path, tmp_path / "data"


@pytest.fixture
def client(service_dirs):
    net_path, data_dir = service_dirs
    app = create_app(network_path=net_path, data_dir=data_dir, max_workers=2)
    with TestClient(app) as test_client:
        yield test_client


def poll_job(client, job_id, deadline=60.0):
    limit = time.monotonic() + deadline
    while time.monotonic() < limit:
        record = client.get(f"/jobs/{job_id}").json()
        if record["status"] in ("done", "failed"):
            return record
        time.sleep(0.05)
    raise AssertionError(f"job {job_id} did not finish within {deadline}s")


def create_session_id(client, **hp):
    response = client.post("/sessions", json={"hyperparams": hp} if hp else {})
    assert response.status_code == 200
    return response.json()["id"]


class TestReadEndpoints:
    def test_network(self, client):
        document = client.get("/network").json()
        assert document["schema"] == "wdn-network/1"
        assert len(document["nodes"]) == 10

    def test_centrality(self, client):
        document = client.get("/centrality").json()
        assert document["schema"] == "centrality/1"
        assert max(document["values"].values()) == pytest.approx(1.0)


class TestSolveJobs:
    def test_solve_and_poll(self, client):
        response = client.post(
            "/solve",
            json={"hyperparams": {"s": 3}, "schedule": QUICK_SCHEDULE},
        )
        assert response.status_code == 200
        record = poll_job(client, response.json()["job_id"])
        assert record["status"] == "done"
        assert record["kind"] == "solve"
        assert record["report"]["sensor_count"] == 3
        assert record["report"]["constraint_satisfied"] is True

    def test_job_is_reproducible(self, client):
        body = {"hyperparams": {"s": 3}, "schedule": QUICK_SCHEDULE}
        first = poll_job(client, client.post("/solve", json=body).json()["job_id"])
        second = poll_job(client, client.post("/solve", json=body).json()["job_id"])
        assert first["report"] == second["report"]

    def test_histogram_for_result(self, client):
        body = {"hyperparams": {"s": 3}, "schedule": QUICK_SCHEDULE}
        record = poll_job(client, client.post("/solve", json=body).json()["job_id"])
        response = client.get(f"/results/{record['result_id']}/histogram",
                              params={"bins": 4})
        assert response.status_code == 200
        payload = response.json()
        assert payload["schema"] == "histogram/1"
        assert payload["bins"] == 4
        area = sum(payload["densities"]) * payload["width"]
        assert area == pytest.approx(1.0, abs=1e-9)

    def test_unknown_ids_are_404(self, client):
        assert client.get("/jobs/nope").status_code == 404
        assert client.get("/results/nope/histogram").status_code == 404
        assert client.get("/sessions/nope").status_code == 404

    def test_invalid_schedule_is_400(self, client):
        response = client.post("/solve", json={"schedule": {"runs": 0}})
        assert response.status_code == 400
        assert response.json()["error"] == "SolverError"

    def test_invalid_hyperparams_is_400(self, client):
        response = client.post("/solve", json={"hyperparams": {"s": 0}})
        assert response.status_code == 400
        assert response.json()["error"] == "ModelError"

    def test_unknown_body_field_is_400(self, client):
        response = client.post("/solve", json={"bogus": 1})
        assert response.status_code == 400
        payload = response.json()
        assert payload["error"] == "ValidationError"
        assert payload["detail"][0]["field"].endswith("bogus")


class TestSessions:
    def test_create_and_get(self, client):
        session_id = create_session_id(client, s=3)
        document = client.get(f"/sessions/{session_id}").json()
        assert document["schema"] == "session/1"
        assert document["hyperparams"]["s"] == 3
        assert document["installed"] == [] and document["rejected"] == []

    def test_mark_and_unmark(self, client):
        session_id = create_session_id(client, s=3)
        response = client.post(f"/sessions/{session_id}/mark",
                               json={"node": "n1_1", "status": "installed"})
        assert response.status_code == 200
        assert response.json()["installed"] == ["n1_1"]
        response = client.post(f"/sessions/{session_id}/unmark", json={"node": "n1_1"})
        assert response.json()["installed"] == []

    def test_conflicting_mark_is_409(self, client):
        session_id = create_session_id(client, s=3)
        client.post(f"/sessions/{session_id}/mark",
                    json={"node": "n1_1", "status": "installed"})
        response = client.post(f"/sessions/{session_id}/mark",
                               json={"node": "n1_1", "status": "rejected"})
        assert response.status_code == 409
        assert response.json()["error"] == "MarkConflictError"

    def test_install_limit_is_422(self, client):
        session_id = create_session_id(client, s=1)
        client.post(f"/sessions/{session_id}/mark",
                    json={"node": "n1_1", "status": "installed"})
        response = client.post(f"/sessions/{session_id}/mark",
                               json={"node": "n0_1", "status": "installed"})
        assert response.status_code == 422
        assert response.json()["error"] == "InstallLimitError"

    def test_unknown_node_is_400(self, client):
        session_id = create_session_id(client)
        response = client.post(f"/sessions/{session_id}/mark",
                               json={"node": "ghost", "status": "installed"})
        assert response.status_code == 400
        assert response.json()["error"] == "SessionError"

    def test_sessions_survive_restart(self, service_dirs, client):
        session_id = create_session_id(client, s=3)
        client.post(f"/sessions/{session_id}/mark",
                    json={"node": "n1_1", "status": "installed"})
        before = client.get(f"/sessions/{session_id}").json()

        net_path, data_dir = service_dirs
        restarted = create_app(network_path=net_path, data_dir=data_dir)
        with TestClient(restarted) as second:
            assert second.get(f"/sessions/{session_id}").json() == before


class TestReplanJobs:
    def test_replan_honors_marks(self, client):
        session_id = create_session_id(client, s=3)
        client.post(f"/sessions/{session_id}/mark",
                    json={"node": "n1_1", "status": "installed"})
        client.post(f"/sessions/{session_id}/mark",
                    json={"node": "n2_2", "status": "rejected"})
        response = client.post(f"/sessions/{session_id}/replan",
                               json={"schedule": QUICK_SCHEDULE})
        assert response.status_code == 200
        record = poll_job(client, response.json()["job_id"])
        assert record["status"] == "done"
        assert record["session_id"] == session_id
        assert "n1_1" in record["report"]["selected"]
        assert "n2_2" not in record["report"]["selected"]
        stored = client.get(f"/sessions/{session_id}").json()
        assert stored["last_report"]["selected"] == record["report"]["selected"]

    def test_second_replan_in_flight_is_409(self, client):
        session_id = create_session_id(client, s=3)
        first = client.post(f"/sessions/{session_id}/replan",
                            json={"schedule": SLOW_SCHEDULE})
        assert first.status_code == 200
        second = client.post(f"/sessions/{session_id}/replan",
                             json={"schedule": QUICK_SCHEDULE})
        assert second.status_code == 409
        assert second.json()["error"] == "ReplanInFlightError"
        poll_job(client, first.json()["job_id"])
        third = client.post(f"/sessions/{session_id}/replan",
                            json={"schedule": QUICK_SCHEDULE})
        assert third.status_code == 200
        poll_job(client, third.json()["job_id"])

    def test_weak_pins_fail_the_job_not_the_request(self, client):
        session_id = create_session_id(client, s=2, E=0.001)
        network = client.get("/network").json()
        pinned = next(
            n["id"] for n in network["nodes"]
            if not n["accessible"] and n["demand"] < 1000.0
        )
        client.post(f"/sessions/{session_id}/mark",
                    json={"node": pinned, "status": "installed"})
        response = client.post(f"/sessions/{session_id}/replan",
                               json={"schedule": QUICK_SCHEDULE})
        assert response.status_code == 200
        record = poll_job(client, response.json()["job_id"])
        assert record["status"] == "failed"
        assert "pin weight" in record["error"]

    def test_replan_on_unknown_session_is_404(self, client):
        assert client.post("/sessions/ghost/replan", json={}).status_code == 404


class TestRestartRecovery:
    def test_interrupted_jobs_fail_on_restart(self, service_dirs):
        net_path, data_dir = service_dirs
        jobs_dir = data_dir / "jobs"
        jobs_dir.mkdir(parents=True)
        stale = {
            "schema": "job/1", "id": "stalejob00001", "kind": "solve",
            "status": "running", "session_id": None, "submitted": {},
            "error": None, "result_id": None,
        }
        (jobs_dir / "stalejob00001.json").write_text(json.dumps(stale))
        app = create_app(network_path=net_path, data_dir=data_dir)
        with TestClient(app) as client:
            record = client.get("/jobs/stalejob00001").json()
        assert record["status"] == "failed"
        assert record["error"] == "interrupted by service restart"
        on_disk = json.loads((jobs_dir / "stalejob00001.json").read_text())
        assert on_disk["status"] == "failed"
