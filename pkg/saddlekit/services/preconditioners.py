"""Shift-splitting preconditioners for the saddle point operator.

MGSS applies the inverse of

    M = 1/2 [ aI + A   B^T    ]
            [  -B     bI + C  ]

and RMGSS the inverse of [A B^T; -B bI + C], both by block elimination:

    t  = (bI + C)^{-1} r2
    z1 : [(sI + A) + B^T (bI + C)^{-1} B] z1 = c (r1 - B^T t)     (inner GMRES)
    z2 = (bI + C)^{-1} (c r2 + B z1)

with (s, c) = (a, 2) for MGSS and (0, 1) for RMGSS. The Schur operator is applied
matrix-free; bI + C is factored once at build time.
"""
from __future__ import annotations
import logging
import threading
import time
from dataclasses import dataclass, field
from typing import Any, ClassVar

import numpy as np

from saddlekit.config import CONFIG as _APP_CONFIG
from saddlekit.errors import NotPositiveDefiniteError, SizeCapError
from saddlekit.models.options import InnerSolveConfig, ShiftParams, SolveOptions
from saddlekit.services.krylov import fgmres
from saddlekit.services.saddle_system import SaddlePointSystem
from saddlekit.services.sparse_core import CholeskyFactor, cholesky_factor, cholesky_solve, spmv, spmv_transpose

logger = logging.getLogger(__name__)

INNER_TOL_FLOOR = 1e-14


@dataclass
class ShiftSplittingPreconditioner:
    system: SaddlePointSystem
    params: ShiftParams
    inner: InnerSolveConfig
    factor: CholeskyFactor
    setup_seconds: float = 0.0
    inner_iterations: int = 0
    applies: int = 0
    inner_capped: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    relaxed: ClassVar[bool] = False
    label: ClassVar[str] = "mgss"

    @property
    def size(self) -> int:
        return self.system.size

    def __call__(self, r: Any) -> np.ndarray:
        return _apply(self, r)


class MgssPreconditioner(ShiftSplittingPreconditioner):
    pass


class RmgssPreconditioner(ShiftSplittingPreconditioner):
    """alpha is carried in `params` but not used."""
    relaxed = True
    label = "rmgss"


def _factor_shifted_c(sys: SaddlePointSystem, beta: float) -> CholeskyFactor:
    try:
        return cholesky_factor(sys.C.shifted(beta))
    except NotPositiveDefiniteError as e:
        raise NotPositiveDefiniteError(
            f"not_positive_definite: beta*I + C could not be factored (beta={beta:g}); C is not positive semidefinite"
        ) from e


def _build(cls, sys: SaddlePointSystem, params: ShiftParams, cfg: InnerSolveConfig | None):
    cfg = cfg or InnerSolveConfig()
    t0 = time.perf_counter()
    factor = _factor_shifted_c(sys, params.beta)
    elapsed = time.perf_counter() - t0
    logger.debug(
        "[%s] factored beta*I+C (m=%d, %s) in %.3fs", cls.label.upper(), sys.m, factor.kind, elapsed,
    )
    return cls(system=sys, params=params, inner=cfg, factor=factor, setup_seconds=elapsed)


def build_mgss(sys: SaddlePointSystem, params: ShiftParams, cfg: InnerSolveConfig | None = None) -> MgssPreconditioner:
    return _build(MgssPreconditioner, sys, params, cfg)


def build_rmgss(sys: SaddlePointSystem, params: ShiftParams, cfg: InnerSolveConfig | None = None) -> RmgssPreconditioner:
    return _build(RmgssPreconditioner, sys, params, cfg)


def _inner_tol(reduction: float, outer_norm: float, inner_norm: float) -> float:
    """Inner relative tolerance.

    The apply residual ||Mz - r|| equals the inner residual divided by the scale, so the
    inner target is reduction * min(||inner rhs||, scale * ||r||); the right side of the
    Schur system grows like ||B|| / beta. The tightened tolerance never drops below
    INNER_TOL_FLOOR unless `reduction` itself does.
    """
    if inner_norm <= outer_norm or inner_norm == 0.0:
        return reduction
    return max(reduction * outer_norm / inner_norm, min(reduction, INNER_TOL_FLOOR))


def _apply(P: ShiftSplittingPreconditioner, r: Any) -> np.ndarray:
    sys = P.system
    r1, r2 = sys.split(r)
    shift = 0.0 if P.relaxed else P.params.alpha
    scale = 1.0 if P.relaxed else 2.0

    def schur(v: np.ndarray) -> np.ndarray:
        out = spmv(sys.A, v) + spmv_transpose(sys.B, cholesky_solve(P.factor, spmv(sys.B, v)))
        if shift:
            out = out + shift * v
        return out

    with P._lock:
        t = cholesky_solve(P.factor, r2)
        inner_rhs = scale * (r1 - spmv_transpose(sys.B, t))
        tol = _inner_tol(P.inner.reduction, scale * float(np.linalg.norm(r)), float(np.linalg.norm(inner_rhs)))
        opts = SolveOptions(tol=tol, restart=P.inner.restart, max_iters=P.inner.max_iters)
        z1, report = fgmres(schur, inner_rhs, None, opts, method="inner-gmres")
        z2 = cholesky_solve(P.factor, scale * r2 + spmv(sys.B, z1))

        P.applies += 1
        P.inner_iterations += report.outer_iterations
        if not report.converged:
            P.inner_capped += 1
            if P.inner_capped == 1:
                logger.warning(
                    "[%s] inner solve stopped at %d iterations with relative residual %.2e (target %.0e); applies are inexact",
                    P.label.upper(), report.outer_iterations, report.final_relative_residual, P.inner.reduction,
                )
        logger.debug("[%s] apply %d: %d inner steps", P.label.upper(), P.applies, report.outer_iterations)
    return np.concatenate([z1, z2])


def apply_mgss(P: MgssPreconditioner, r: Any) -> np.ndarray:
    return _apply(P, r)


def apply_rmgss(P: RmgssPreconditioner, r: Any) -> np.ndarray:
    return _apply(P, r)


def _check_cap(sys: SaddlePointSystem) -> None:
    cap = _APP_CONFIG.limits.splitting_max
    if sys.size > cap:
        raise SizeCapError(f"size_cap_exceeded: dense splitting limited to n+m <= {cap}, got {sys.size}")


def assemble_splitting_dense(sys: SaddlePointSystem, params: ShiftParams) -> tuple[np.ndarray, np.ndarray]:
    """Dense M and N with M - N equal to the block operator."""
    _check_cap(sys)
    A, B, C = sys.A.to_dense(), sys.B.to_dense(), sys.C.to_dense()
    In, Im = np.eye(sys.n), np.eye(sys.m)
    a, b = params.alpha, params.beta
    M = 0.5 * np.block([[a * In + A, B.T], [-B, b * Im + C]])
    N = 0.5 * np.block([[a * In - A, -B.T], [B, b * Im - C]])
    return M, N


def assemble_rmgss_dense(sys: SaddlePointSystem, params: ShiftParams) -> np.ndarray:
    _check_cap(sys)
    A, B, C = sys.A.to_dense(), sys.B.to_dense(), sys.C.to_dense()
    return np.block([[A, B.T], [-B, params.beta * np.eye(sys.m) + C]])


__all__ = [
    "ShiftSplittingPreconditioner", "MgssPreconditioner", "RmgssPreconditioner",
    "build_mgss", "build_rmgss", "apply_mgss", "apply_rmgss",
    "assemble_splitting_dense", "assemble_rmgss_dense",
]
