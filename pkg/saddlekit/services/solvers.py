"""Outer solvers for the saddle point system.

- `mgss_stationary`: u <- u + P(b - Au), the shift-splitting fixed-point iteration
  (M u_new = N u + b, since M - N = A).
- `unpreconditioned_gmres` / `preconditioned_gmres`: restarted (flexible) GMRES on the
  block operator, optionally right-preconditioned with MGSS or RMGSS.
- `solve_system`: the orchestration shared by the CLI and the HTTP API.
"""
from __future__ import annotations
import logging
import time
from typing import Optional

import numpy as np

from saddlekit.errors import ConfigError, DimensionError, DivergenceError
from saddlekit.models.options import InnerSolveConfig, MethodKind, PrecondKind, ShiftParams, SolveOptions
from saddlekit.models.reports import SolveReport
from saddlekit.services import krylov
from saddlekit.services.preconditioners import ShiftSplittingPreconditioner, build_mgss, build_rmgss
from saddlekit.services.saddle_system import SaddlePointSystem, as_operator, block_apply, rhs

logger = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e8


def mgss_stationary(
    sys: SaddlePointSystem,
    params: ShiftParams,
    cfg: Optional[InnerSolveConfig] = None,
    opts: Optional[SolveOptions] = None,
    *,
    relaxed: bool = False,
    precond: Optional[ShiftSplittingPreconditioner] = None,
) -> tuple[np.ndarray, SolveReport]:
    opts = opts or SolveOptions()
    if precond is None:
        precond = (build_rmgss if relaxed else build_mgss)(sys, params, cfg)
    method = f"{precond.label}-stationary"
    b = rhs(sys)
    bnorm = float(np.linalg.norm(b))
    if opts.x0 is not None and opts.x0.shape != (sys.size,):
        raise DimensionError(f"dimension_mismatch: x0 has shape {opts.x0.shape}, expected ({sys.size},)")
    u = np.zeros(sys.size) if opts.x0 is None else opts.x0.copy()
    inner_start = precond.inner_iterations

    def _report(history, converged, t0):
        return SolveReport(
            method=method,
            converged=converged,
            outer_iterations=len(history) - 1,
            inner_iterations=precond.inner_iterations - inner_start,
            residual_history=history,
            setup_seconds=precond.setup_seconds,
            solve_seconds=time.perf_counter() - t0,
            tol=opts.tol,
        )

    t0 = time.perf_counter()
    if bnorm == 0.0:
        return np.zeros(sys.size), _report([0.0], True, t0)

    r = b - block_apply(sys, u)
    history = [float(np.linalg.norm(r)) / bnorm]
    while history[-1] >= opts.tol and len(history) - 1 < opts.max_iters:
        u = u + precond(r)
        r = b - block_apply(sys, u)
        rel = float(np.linalg.norm(r)) / bnorm
        history.append(rel)
        if not np.isfinite(rel) or rel > DIVERGENCE_LIMIT:
            report = _report(history, False, t0)
            logger.warning("[MGSS] stationary iteration diverged at step %d (relative residual %.3e)", len(history) - 1, rel)
            raise DivergenceError(f"diverged: relative residual {rel:.3e} exceeds {DIVERGENCE_LIMIT:g}", report)
    return u, _report(history, history[-1] < opts.tol, t0)


def unpreconditioned_gmres(sys: SaddlePointSystem, opts: Optional[SolveOptions] = None) -> tuple[np.ndarray, SolveReport]:
    return krylov.fgmres(as_operator(sys), rhs(sys), None, opts, method="gmres")


def preconditioned_gmres(
    sys: SaddlePointSystem,
    precond: ShiftSplittingPreconditioner,
    opts: Optional[SolveOptions] = None,
) -> tuple[np.ndarray, SolveReport]:
    inner_start = precond.inner_iterations
    u, report = krylov.fgmres(as_operator(sys), rhs(sys), precond, opts, method=f"{precond.label}-fgmres")
    return u, report.model_copy(update={
        "inner_iterations": precond.inner_iterations - inner_start,
        "setup_seconds": precond.setup_seconds,
    })


def solve_system(
    sys: SaddlePointSystem,
    *,
    precond: PrecondKind = "mgss",
    method: MethodKind = "gmres",
    params: Optional[ShiftParams] = None,
    inner: Optional[InnerSolveConfig] = None,
    opts: Optional[SolveOptions] = None,
) -> tuple[np.ndarray, SolveReport]:
    """Build the requested preconditioner (if any) and run the requested method."""
    params = params or ShiftParams()
    if precond == "none":
        if method == "stationary":
            raise ConfigError("invalid_combination: the stationary method needs a preconditioner (mgss or rmgss)")
        u, report = unpreconditioned_gmres(sys, opts)
    else:
        builder = build_rmgss if precond == "rmgss" else build_mgss
        P = builder(sys, params, inner)
        if method == "stationary":
            u, report = mgss_stationary(sys, params, inner, opts, precond=P)
        else:
            u, report = preconditioned_gmres(sys, P, opts)
    logger.info(
        "[Solve] %s n=%d m=%d converged=%s outer=%d inner=%d residual=%.3e",
        report.method, sys.n, sys.m, report.converged, report.outer_iterations,
        report.inner_iterations, report.final_relative_residual,
    )
    return u, report


__all__ = [
    "mgss_stationary", "unpreconditioned_gmres", "preconditioned_gmres", "solve_system", "DIVERGENCE_LIMIT",
]
