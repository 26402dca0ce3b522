import csv
import json
import os

import numpy as np
import pytest

import saddlekit.cli as cli
from saddlekit.models.reports import InstanceResult, VerificationReport
from saddlekit.services.sparse_core import SparseMatrix
from saddlekit.storage.matrix_market import save_matrix, save_vector
from saddlekit.storage.report_store import BENCH_HEADERS, RESIDUAL_HEADERS

TIGHT_INNER = ["--inner-restart", "100", "--inner-reduction", "1e-12", "--inner-max", "4000"]


def _write_hand(directory, c=0.0, rhs=True):
    os.makedirs(directory, exist_ok=True)
    save_matrix(os.path.join(directory, "A.mtx"), SparseMatrix.from_dense([[2.0]]))
    save_matrix(os.path.join(directory, "B.mtx"), SparseMatrix.from_dense([[1.0]]))
    save_matrix(os.path.join(directory, "C.mtx"), SparseMatrix.from_dense([[c]]))
    if rhs:
        save_vector(os.path.join(directory, "f.txt"), [3.0])
        save_vector(os.path.join(directory, "g.txt"), [1.0])
    return str(directory)


def _read_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def test_generate_writes_files_and_manifest(tmp_path):
    out = tmp_path / "p3"
    assert cli.main(["generate", "--grid", "3", "--out", str(out)]) == cli.EXIT_OK
    for name in ("A.mtx", "B.mtx", "C.mtx", "f.txt", "g.txt", "manifest.json"):
        assert (out / name).exists()
    manifest = _read_json(out / "manifest.json")
    assert manifest["schema_version"] == 1
    assert (manifest["n"], manifest["m"]) == (18, 9)
    assert manifest["spec"]["grid"] == 3
    assert set(manifest["checksums"]) == {"A.mtx", "B.mtx", "C.mtx", "f.txt", "g.txt"}


def test_generate_is_byte_identical_across_runs(tmp_path):
    for run in ("a", "b"):
        assert cli.main(["generate", "--grid", "4", "--seed", "7", "--out", str(tmp_path / run)]) == 0
    for name in ("A.mtx", "B.mtx", "C.mtx", "f.txt", "g.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_generate_without_stabilization_writes_empty_c(tmp_path):
    out = tmp_path / "nostab"
    assert cli.main(["generate", "--grid", "3", "--stab", "0", "--out", str(out)]) == 0
    assert _read_json(out / "manifest.json")["nnz"]["C"] == 0


def test_solve_hand_system_from_files_with_stationary_method(tmp_path):
    d = _write_hand(tmp_path / "hand")
    report_path = tmp_path / "hand_report.json"
    code = cli.main([
        "solve", "--input-dir", d, "--precond", "mgss", "--method", "stationary",
        "--alpha", "1", "--beta", "1", *TIGHT_INNER, "--out", str(report_path),
    ])
    assert code == cli.EXIT_OK
    report = _read_json(report_path)
    assert report["converged"] is True
    assert report["outer_iters"] <= 3
    assert (report["n"], report["m"]) == (1, 1)
    assert report["config"]["method"] == "stationary"
    with open(tmp_path / "hand_report_residuals.csv", newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == RESIDUAL_HEADERS
    assert len(rows) == report["outer_iters"] + 2


def test_solve_with_explicit_block_paths_and_default_rhs(tmp_path):
    d = _write_hand(tmp_path / "hand", rhs=False)
    code = cli.main([
        "solve", "--a", f"{d}/A.mtx", "--b", f"{d}/B.mtx", "--c", f"{d}/C.mtx",
        "--alpha", "1", "--beta", "1", "--out", str(tmp_path / "out"),
    ])
    assert code == cli.EXIT_OK
    assert _read_json(tmp_path / "out" / "solve_report.json")["final_relative_residual"] < 1e-9


def test_solve_generated_problem_not_converged_exit_code(tmp_path):
    code = cli.main(["solve", "--grid", "4", "--precond", "none", "--max-iters", "2", "--out", str(tmp_path)])
    assert code == cli.EXIT_NOT_CONVERGED
    report = _read_json(tmp_path / "solve_report.json")
    assert report["converged"] is False and report["outer_iters"] == 2


@pytest.mark.parametrize("argv", [
    ["solve", "--grid", "3", "--precond", "none", "--method", "stationary"],
    ["solve", "--grid", "1"],
    ["solve", "--tol", "-1"],
    ["solve", "--inner-restart", "50", "--inner-max", "10"],
    ["bench", "--grids", "3", "--methods", "bogus"],
    ["bench", "--grids", "1", "--methods", "none"],
])
def test_configuration_errors_exit_two(tmp_path, argv):
    assert cli.main([*argv, "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_bench_methods_flag_needs_values(tmp_path):
    with pytest.raises(SystemExit) as exc:
        cli.main(["bench", "--methods", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_bad_input_files_exit_two(tmp_path):
    d = _write_hand(tmp_path / "hand")
    assert cli.main(["solve", "--a", f"{d}/A.mtx", "--b", f"{d}/B.mtx", "--c", f"{d}/missing.mtx"]) == cli.EXIT_CONFIG
    (tmp_path / "hand" / "C.mtx").write_text("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 oops\n")
    assert cli.main(["solve", "--input-dir", d, "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    assert cli.main(["solve", "--a", f"{d}/A.mtx", "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_verify_single_system(tmp_path, capsys):
    d = _write_hand(tmp_path / "hand")
    code = cli.main(["verify", "--input-dir", d, "--alpha", "1", "--beta", "1", "--out", str(tmp_path / "v.json")])
    assert code == cli.EXIT_OK
    report = _read_json(tmp_path / "v.json")
    assert report["all_passed"] is True
    assert report["instances"][0]["shifts"][0]["spectral"]["rho"] <= 1e-12
    assert "passed=True" in capsys.readouterr().out


def test_verify_single_system_rejects_indefinite_c(tmp_path):
    d = _write_hand(tmp_path / "bad", c=-1.0)
    code = cli.main(["verify", "--input-dir", d, "--alpha", "1", "--beta", "1", "--out", str(tmp_path)])
    assert code == cli.EXIT_CONFIG


def test_verify_sweep_exit_codes(monkeypatch, tmp_path):
    seen = {}

    def fake_sweep(cfg):
        seen["instances"] = cfg.instances
        failing = InstanceResult(index=0, seed=1, n=3, m=1, error="generation failed")
        return VerificationReport(config=cfg.model_dump(), instances=[failing], seconds=0.0)

    monkeypatch.setattr(cli.spectral_verify, "run_sweep", fake_sweep)
    assert cli.main(["verify", "--instances", "7", "--out", str(tmp_path)]) == cli.EXIT_INTERNAL
    assert seen["instances"] == 7
    assert _read_json(tmp_path / "verify_report.json")["failures"] == 1

    monkeypatch.setattr(
        cli.spectral_verify, "run_sweep",
        lambda cfg: VerificationReport(config=cfg.model_dump(), instances=[], seconds=0.0),
    )
    assert cli.main(["verify", "--instances", "1", "--out", str(tmp_path)]) == cli.EXIT_OK


def test_unexpected_errors_exit_three(monkeypatch, tmp_path):
    def boom(*_args, **_kwargs):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli.solvers, "solve_system", boom)
    assert cli.main(["solve", "--grid", "3", "--out", str(tmp_path)]) == cli.EXIT_INTERNAL


def test_bench_writes_csv_and_table(tmp_path, capsys):
    code = cli.main([
        "bench", "--grids", "3", "4", "--methods", "none", "mgss", "rmgss",
        "--restart", "60", "--out", str(tmp_path),
    ])
    assert code == cli.EXIT_OK
    with open(tmp_path / "bench.csv", newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0]) == BENCH_HEADERS
    assert len(rows) == 6
    assert [(r["grid"], r["precond"]) for r in rows[:3]] == [("3", "none"), ("3", "mgss"), ("3", "rmgss")]
    assert all(r["converged"] == "True" for r in rows)
    out = capsys.readouterr().out
    assert "mgss" in out
    assert (tmp_path / "bench.txt").read_text(encoding="utf-8").strip() in out


def test_bench_records_divergence_as_a_row(monkeypatch, tmp_path):
    from saddlekit.errors import DivergenceError
    from saddlekit.models.reports import SolveReport

    def diverge(*_args, **_kwargs):
        report = SolveReport(method="mgss-stationary", converged=False, outer_iterations=3,
                             residual_history=[1.0, 1e4, 1e9], tol=1e-9)
        raise DivergenceError("diverged", report)

    monkeypatch.setattr(cli.solvers, "solve_system", diverge)
    code = cli.main(["bench", "--grids", "3", "--methods", "mgss-stationary", "--out", str(tmp_path)])
    assert code == cli.EXIT_NOT_CONVERGED
    with open(tmp_path / "bench.csv", newline="", encoding="utf-8") as f:
        (row,) = list(csv.DictReader(f))
    assert row["error"] == "diverged" and row["iters"] == "3"
    assert float(row["final_relative_residual"]) == pytest.approx(1e9)


def test_hand_solution_recovered_through_files(tmp_path):
    from saddlekit.services import solvers
    from saddlekit.storage.system_store import load_system_dir

    sys = load_system_dir(_write_hand(tmp_path / "hand"))
    u, report = solvers.solve_system(sys, precond="rmgss", method="gmres")
    assert report.converged
    np.testing.assert_allclose(u, np.ones(2), atol=1e-8)


@pytest.mark.parametrize("convention, expected", [
    ("paper", cli.EXIT_OK),
    ("nonsymmetric", cli.EXIT_OK),
    ("symmetric", cli.EXIT_CONFIG),
])
def test_sign_convention_flag(tmp_path, convention, expected):
    # C = [1] is SPSD as stored; read as the symmetric form it becomes C = [-1].
    d = _write_hand(tmp_path / "hand", c=1.0)
    code = cli.main([
        "verify", "--input-dir", d, "--alpha", "1", "--beta", "1",
        "--sign-convention", convention, "--out", str(tmp_path / "v.json"),
    ])
    assert code == expected


def test_sign_convention_defaults_to_paper():
    cfg = cli.run_config_from_args(cli.build_parser().parse_args(["solve"]))
    assert cfg.sign_convention == "paper"


def test_bench_single_grid_flag(tmp_path):
    assert cli.main(["bench", "--grid", "3", "--methods", "none", "--out", str(tmp_path)]) == cli.EXIT_OK
    with open(tmp_path / "bench.csv", newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert [r["grid"] for r in rows] == ["3"]
    cfg = cli.run_config_from_args(cli.build_parser().parse_args(["bench", "--grid", "3", "--grids", "4", "5"]))
    assert cfg.grids == [4, 5]
