"""Solver API router.

Service modules are imported as modules (not individual functions) so tests can
monkeypatch symbols on them and have the effect reflected here.
"""
from __future__ import annotations
import asyncio
import logging

from fastapi import APIRouter, HTTPException

import saddlekit.services.problem_gen as problem_gen
import saddlekit.services.saddle_system as saddle_system
import saddlekit.services.solvers as solvers
import saddlekit.services.spectral_verify as spectral_verify
from saddlekit import __version__
from saddlekit.config import CONFIG
from saddlekit.errors import SaddlekitError, SizeCapError
from saddlekit.models.options import InnerSolveConfig, OseenSpec, ShiftParams, SolveOptions, SweepConfig
from saddlekit.models.reports import VerificationReport
from saddlekit.models.requests import SolveRequest, VerifyRequest
from saddlekit.models.responses import GenerateResponse, HealthResponse, SolveResponse

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/api", tags=["solver"])


def _http_error(e: SaddlekitError) -> HTTPException:
    status = 413 if isinstance(e, SizeCapError) else 422
    return HTTPException(status_code=status, detail=str(e))


@router.get("/health", response_model=HealthResponse)
def health():
    s, lim = CONFIG.solver, CONFIG.limits
    return HealthResponse(
        version=__version__,
        defaults={"alpha": s.alpha, "beta": s.beta, "tol": s.tol, "restart": s.restart,
                  "inner_restart": s.inner_restart, "inner_reduction": s.inner_reduction, "inner_max": s.inner_max},
        limits={"cholesky_dense_max": lim.cholesky_dense_max, "validate_full_max": lim.validate_full_max,
                "splitting_max": lim.splitting_max, "iteration_matrix_max": lim.iteration_matrix_max},
    )


def _generate(spec: OseenSpec) -> GenerateResponse:
    sys = problem_gen.generate_oseen(spec)
    validation = None
    if sys.size <= CONFIG.limits.validate_full_max:
        validation = saddle_system.validate(sys, "full")
    return GenerateResponse(
        n=sys.n, m=sys.m,
        nnz={"A": sys.A.nnz, "B": sys.B.nnz, "C": sys.C.nnz},
        a_asymmetry=sys.A.asymmetry(),
        validation=validation,
    )


@router.post("/generate", response_model=GenerateResponse)
async def generate(spec: OseenSpec):
    try:
        return await asyncio.to_thread(_generate, spec)
    except SaddlekitError as e:
        raise _http_error(e)


def _solve(req: SolveRequest) -> SolveResponse:
    sys = problem_gen.generate_oseen(req.spec)
    _, report = solvers.solve_system(
        sys,
        precond=req.precond,
        method=req.method,
        params=ShiftParams(alpha=req.alpha, beta=req.beta),
        inner=InnerSolveConfig(restart=req.inner_restart, reduction=req.inner_reduction, max_iters=req.inner_max),
        opts=SolveOptions(tol=req.tol, max_iters=req.max_iters, restart=req.restart),
    )
    if not req.include_history:
        report = report.model_copy(update={"residual_history": [report.final_relative_residual]})
    return SolveResponse(n=sys.n, m=sys.m, report=report)


@router.post("/solve", response_model=SolveResponse)
async def solve(req: SolveRequest):
    try:
        return await asyncio.to_thread(_solve, req)
    except SaddlekitError as e:
        raise _http_error(e)
    except ValueError as e:
        # pydantic errors from nested option models (e.g. inner_max < inner_restart)
        raise HTTPException(status_code=422, detail=str(e))


@router.post("/verify", response_model=VerificationReport)
async def verify(req: VerifyRequest):
    cfg = SweepConfig(**req.model_dump())
    logger.info("[Verify] API sweep: %d instances", cfg.instances)
    try:
        return await asyncio.to_thread(spectral_verify.run_sweep, cfg)
    except SaddlekitError as e:
        raise _http_error(e)


__all__ = ["router"]
