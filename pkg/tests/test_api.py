from fastapi.testclient import TestClient

from saddlekit.main import app
from saddlekit.errors import SizeCapError

client = TestClient(app)


def test_health_reports_defaults_and_limits():
    r = client.get("/api/health")
    assert r.status_code == 200, r.text
    data = r.json()
    assert data["status"] == "ok"
    assert data["defaults"]["alpha"] == 0.01
    assert "iteration_matrix_max" in data["limits"]


def test_generate_small_oseen_problem():
    r = client.post("/api/generate", json={"grid": 3, "nu": 0.02, "stab": 0.1})
    assert r.status_code == 200, r.text
    data = r.json()
    assert (data["n"], data["m"]) == (18, 9)
    assert data["nnz"]["C"] == 9
    assert data["a_asymmetry"] > 0
    assert data["validation"]["passed"] is True


def test_generate_rejects_invalid_spec():
    r = client.post("/api/generate", json={"grid": 1})
    assert r.status_code == 422


def test_generate_size_cap_maps_to_413(monkeypatch):
    def too_big(spec):
        raise SizeCapError("size_cap_exceeded: test")

    monkeypatch.setattr("saddlekit.services.problem_gen.generate_oseen", too_big)
    r = client.post("/api/generate", json={"grid": 3})
    assert r.status_code == 413
    assert "size_cap_exceeded" in r.json()["detail"]


def test_solve_mgss_fgmres():
    r = client.post("/api/solve", json={"spec": {"grid": 4}, "precond": "mgss", "method": "gmres"})
    assert r.status_code == 200, r.text
    data = r.json()
    assert (data["n"], data["m"]) == (32, 16)
    report = data["report"]
    assert report["method"] == "mgss-fgmres"
    assert report["converged"] is True
    assert report["final_relative_residual"] < 1e-9
    assert len(report["residual_history"]) == report["outer_iterations"] + 1


def test_solve_can_drop_history():
    r = client.post("/api/solve", json={"spec": {"grid": 3}, "precond": "rmgss", "include_history": False})
    assert r.status_code == 200, r.text
    assert len(r.json()["report"]["residual_history"]) == 1


def test_solve_uses_service_module(monkeypatch):
    from saddlekit.models.reports import SolveReport

    calls = {}

    def fake_solve(sys, **kwargs):
        calls.update(kwargs)
        return None, SolveReport(method="mock", converged=True, outer_iterations=0, residual_history=[0.0], tol=1e-9)

    monkeypatch.setattr("saddlekit.services.solvers.solve_system", fake_solve)
    r = client.post("/api/solve", json={"spec": {"grid": 2}, "alpha": 0.5, "beta": 2.0})
    assert r.status_code == 200, r.text
    assert r.json()["report"]["method"] == "mock"
    assert (calls["params"].alpha, calls["params"].beta) == (0.5, 2.0)


def test_solve_configuration_errors_are_422():
    r = client.post("/api/solve", json={"spec": {"grid": 3}, "precond": "none", "method": "stationary"})
    assert r.status_code == 422
    assert "invalid_combination" in r.json()["detail"]
    r = client.post("/api/solve", json={"spec": {"grid": 3}, "inner_restart": 50, "inner_max": 10})
    assert r.status_code == 422
    r = client.post("/api/solve", json={"alpha": -1.0})
    assert r.status_code == 422


def test_verify_sweep_through_api():
    r = client.post("/api/verify", json={
        "instances": 2, "max_size": 12, "alphas": [1.0], "betas": [0.1, 1.0],
        "positive_real_part_trials": 100, "estimator": "eigvals", "threads": 1,
    })
    assert r.status_code == 200, r.text
    data = r.json()
    assert len(data["instances"]) == 2
    assert data["all_passed"] is True
    assert len(data["instances"][0]["shifts"]) == 2


def test_verify_instance_cap():
    r = client.post("/api/verify", json={"instances": 21})
    assert r.status_code == 422
