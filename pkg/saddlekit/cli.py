"""Command-line front end: generate, solve, verify, bench.

Exit codes: 0 success/converged, 1 non-convergence, 2 configuration/parse/data error,
3 failed verification or internal error.
"""
from __future__ import annotations
import argparse
import logging
import os
import sys as _sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence

from saddlekit.config import CONFIG
from saddlekit.errors import (
    ConfigError,
    DimensionError,
    DivergenceError,
    GenerationError,
    MatrixMarketParseError,
    NotPositiveDefiniteError,
    NotSymmetricError,
    SaddlekitError,
    SizeCapError,
)
from saddlekit.models.options import (
    InnerSolveConfig,
    OseenSpec,
    ShiftParams,
    SolveOptions,
    SweepConfig,
    build_options,
)
from saddlekit.models.reports import BenchRow, SolveReport, SolveRunReport, VerificationReport
from saddlekit.models.requests import BENCH_TOKENS, RunConfig
from saddlekit.services import problem_gen, solvers, spectral_verify
from saddlekit.services.saddle_system import SaddlePointSystem
from saddlekit.storage import report_store, system_store

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NOT_CONVERGED = 1
EXIT_CONFIG = 2
EXIT_INTERNAL = 3

DATA_ERRORS = (
    ConfigError, DimensionError, MatrixMarketParseError, NotPositiveDefiniteError,
    NotSymmetricError, SizeCapError, GenerationError,
)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("--out", help="output directory (or .json report path for solve/verify)")
    common.add_argument("--seed", type=int)

    shifts = common.add_argument_group("shifts and solver")
    shifts.add_argument("--alpha", type=float)
    shifts.add_argument("--beta", type=float)
    shifts.add_argument("--precond", choices=["none", "mgss", "rmgss"])
    shifts.add_argument("--method", choices=["stationary", "gmres"])
    shifts.add_argument("--restart", type=int)
    shifts.add_argument("--tol", type=float)
    shifts.add_argument("--max-iters", type=int)
    shifts.add_argument("--inner-restart", type=int)
    shifts.add_argument("--inner-reduction", type=float)
    shifts.add_argument("--inner-max", type=int)

    problem = common.add_argument_group("generated problem")
    problem.add_argument("--grid", type=int, help="interior grid size p (n = 2p^2, m = p^2)")
    problem.add_argument("--nu", type=float)
    problem.add_argument("--stab", type=float)
    problem.add_argument("--wind", choices=["constant", "recirculating"])
    problem.add_argument("--wind-scale", type=float)
    problem.add_argument("--stab-kind", choices=["identity", "laplacian"])

    files = common.add_argument_group("input files")
    files.add_argument("--input-dir", help="directory written by `generate`")
    files.add_argument("--a")
    files.add_argument("--b")
    files.add_argument("--c")
    files.add_argument("--f")
    files.add_argument("--g")
    files.add_argument(
        "--sign-convention", choices=["paper", "nonsymmetric", "symmetric"],
        help="paper (alias nonsymmetric): files hold the -B / -g form; symmetric: files hold [A B^T; B D], (f; g)",
    )

    parser = argparse.ArgumentParser(prog="saddlekit", description="Shift-splitting saddle point solver toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="write a generated Oseen system to disk")
    sub.add_parser("solve", parents=[common], help="solve a system from files or a generated problem")
    verify = sub.add_parser("verify", parents=[common], help="spectral verification (sweep or single system)")
    verify.add_argument("--instances", type=int)
    bench = sub.add_parser("bench", parents=[common], help="iteration/timing table over grid sizes")
    bench.add_argument("--grids", type=int, nargs="+")
    bench.add_argument("--methods", nargs="+", help=f"cells from {sorted(BENCH_TOKENS)}")
    return parser


def _bench_grids(args: argparse.Namespace) -> Optional[list[int]]:
    """`bench --grid p` runs the single grid p; `--grids` takes precedence."""
    grids = getattr(args, "grids", None)
    if grids is None and args.command == "bench" and args.grid is not None:
        return [args.grid]
    return grids


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    shifts = build_options(ShiftParams, alpha=args.alpha, beta=args.beta)
    inner = build_options(
        InnerSolveConfig, restart=args.inner_restart, reduction=args.inner_reduction, max_iters=args.inner_max,
    )
    spec = build_options(
        OseenSpec, grid=args.grid, nu=args.nu, stab=args.stab, wind=args.wind,
        wind_scale=args.wind_scale, stabilization=args.stab_kind, seed=args.seed,
    )
    return build_options(
        RunConfig,
        command=args.command,
        a=args.a, b=args.b, c=args.c, f=args.f, g=args.g,
        input_dir=args.input_dir,
        sign_convention=args.sign_convention,
        shifts=shifts,
        precond=args.precond,
        method=args.method,
        tol=args.tol,
        max_iters=args.max_iters,
        restart=args.restart,
        inner=inner,
        spec=spec,
        seed=args.seed,
        out=args.out,
        grids=_bench_grids(args),
        methods=getattr(args, "methods", None),
        instances=getattr(args, "instances", None),
    )


def _has_inputs(cfg: RunConfig) -> bool:
    return bool(cfg.input_dir or cfg.a)


def _load_system(cfg: RunConfig) -> SaddlePointSystem:
    if cfg.a:
        return system_store.load_system(cfg.a, cfg.b, cfg.c, cfg.f, cfg.g, sign_convention=cfg.sign_convention)
    return system_store.load_system_dir(cfg.input_dir, sign_convention=cfg.sign_convention)


def _report_paths(cfg: RunConfig, stem: str) -> tuple[str, str]:
    out = cfg.out or CONFIG.runtime.output_dir
    if out.endswith(".json"):
        base = out[: -len(".json")]
        return out, f"{base}_residuals.csv"
    return os.path.join(out, f"{stem}_report.json"), os.path.join(out, f"{stem}_residuals.csv")


def _opts(cfg: RunConfig) -> SolveOptions:
    return SolveOptions(tol=cfg.tol, max_iters=cfg.max_iters, restart=cfg.restart)


def _config_echo(cfg: RunConfig) -> dict:
    return cfg.model_dump(mode="json", exclude={"grids", "methods", "instances"})


def cmd_generate(cfg: RunConfig) -> int:
    spec = cfg.spec
    sys = problem_gen.generate_oseen(spec)
    out = cfg.out or CONFIG.runtime.output_dir
    manifest = system_store.save_system(out, sys, spec=spec.model_dump(mode="json"), seed=spec.seed)
    print(f"generated p={spec.grid}: n={manifest.n} m={manifest.m} nnz={manifest.nnz} -> {out}")
    return EXIT_OK


def _write_solve_report(cfg: RunConfig, sys: SaddlePointSystem, report: SolveReport, error: Optional[str]) -> None:
    json_path, csv_path = _report_paths(cfg, "solve")
    run = SolveRunReport(
        converged=report.converged,
        outer_iters=report.outer_iterations,
        inner_iters_total=report.inner_iterations,
        setup_seconds=report.setup_seconds,
        solve_seconds=report.solve_seconds,
        final_relative_residual=report.final_relative_residual,
        n=sys.n,
        m=sys.m,
        config=_config_echo(cfg),
        error=error,
    )
    report_store.write_json(json_path, run)
    report_store.write_residual_csv(csv_path, report.residual_history)


def cmd_solve(cfg: RunConfig) -> int:
    sys = _load_system(cfg) if _has_inputs(cfg) else problem_gen.generate_oseen(cfg.spec)
    try:
        _, report = solvers.solve_system(
            sys, precond=cfg.precond, method=cfg.method, params=cfg.shifts, inner=cfg.inner, opts=_opts(cfg),
        )
    except DivergenceError as e:
        _write_solve_report(cfg, sys, e.report, str(e))
        print(f"diverged after {e.report.outer_iterations} iterations: {e}")
        return EXIT_NOT_CONVERGED
    _write_solve_report(cfg, sys, report, None)
    print(
        f"{report.method}: converged={report.converged} outer={report.outer_iterations} "
        f"inner={report.inner_iterations} residual={report.final_relative_residual:.3e}"
    )
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def cmd_verify(cfg: RunConfig) -> int:
    json_path, _ = _report_paths(cfg, "verify")
    if _has_inputs(cfg):
        sys = _load_system(cfg)
        result = spectral_verify.verify_system(sys, [cfg.shifts], seed=cfg.seed)
        report = VerificationReport(
            config={"single": True, **_config_echo(cfg)}, instances=[result], seconds=0.0,
        )
        report_store.write_json(json_path, report)
        check = result.shifts[0]
        print(f"rho={check.spectral.rho:.3e} passed={result.passed}")
        if result.validation is not None and not result.validation.passed:
            print("input system violates the structural hypotheses", file=_sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK if result.passed else EXIT_INTERNAL
    sweep = SweepConfig(instances=cfg.instances, seed=cfg.seed, threads=CONFIG.runtime.threads)
    report = spectral_verify.run_sweep(sweep)
    report_store.write_json(json_path, report)
    print(f"{len(report.instances)} instances, {report.failures} failures")
    return EXIT_OK if report.all_passed else EXIT_INTERNAL


def _bench_cell(cfg: RunConfig, sys: SaddlePointSystem, grid: int, token: str) -> BenchRow:
    precond, method = BENCH_TOKENS[token]
    row = {"grid": grid, "n": sys.n, "m": sys.m, "precond": precond, "method": method}
    try:
        _, report = solvers.solve_system(
            sys, precond=precond, method=method, params=cfg.shifts, inner=cfg.inner, opts=_opts(cfg),
        )
    except DivergenceError as e:
        report = e.report
        row["error"] = "diverged"
    except SaddlekitError as e:
        logger.warning("[Bench] grid=%d %s failed: %s", grid, token, e)
        return BenchRow(**row, error=str(e))
    return BenchRow(
        **row,
        iters=report.outer_iterations,
        inner_iters=report.inner_iterations,
        setup_seconds=report.setup_seconds,
        solve_seconds=report.solve_seconds,
        converged=report.converged,
        final_relative_residual=report.final_relative_residual,
    )


def cmd_bench(cfg: RunConfig) -> int:
    systems = {p: problem_gen.generate_oseen(cfg.spec.model_copy(update={"grid": p})) for p in cfg.grids}
    cells = [(p, token) for p in cfg.grids for token in cfg.methods]
    logger.info("[Bench] %d cells on %d threads", len(cells), CONFIG.runtime.threads)
    with ThreadPoolExecutor(max_workers=CONFIG.runtime.threads) as pool:
        futures = [pool.submit(_bench_cell, cfg, systems[p], p, token) for p, token in cells]
        rows = [f.result() for f in futures]
    out = cfg.out or CONFIG.runtime.output_dir
    report_store.write_bench_csv(os.path.join(out, "bench.csv"), rows)
    table = report_store.format_bench_table(rows)
    with open(os.path.join(out, "bench.txt"), "w", encoding="utf-8") as f:
        f.write(table + "\n")
    print(table)
    return EXIT_OK if all(r.converged for r in rows) else EXIT_NOT_CONVERGED


COMMANDS: dict[str, Callable[[RunConfig], int]] = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "bench": cmd_bench,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else getattr(logging, CONFIG.runtime.log_level, logging.INFO)
    logging.basicConfig(level=level, format="%(asctime)s [%(levelname)s] %(name)s: %(message)s")
    try:
        cfg = run_config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except DATA_ERRORS as e:
        print(f"error: {e}", file=_sys.stderr)
        return EXIT_CONFIG
    except SaddlekitError as e:
        print(f"error: {e}", file=_sys.stderr)
        return EXIT_INTERNAL
    except Exception:
        logger.exception("[CLI] unexpected failure")
        return EXIT_INTERNAL


__all__ = ["main", "build_parser", "run_config_from_args", "cmd_generate", "cmd_solve", "cmd_verify", "cmd_bench"]
