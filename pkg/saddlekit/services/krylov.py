"""Restarted flexible GMRES with right preconditioning.

Arnoldi with modified Gram-Schmidt, Givens rotations for the small least-squares
problem, and the preconditioned directions z_j = P(v_j) stored per restart cycle so
that P may change from one application to the next. With P = None (or any fixed
linear P) this is standard right-preconditioned GMRES(restart).

The residual history has one entry per Arnoldi step (the Givens estimate); at each
restart boundary the last entry is replaced by the true residual ||b - A x|| / ||b||.
"""
from __future__ import annotations
import logging
import math
import time
from typing import Any, Callable, Optional

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from saddlekit.errors import ConfigError, DimensionError
from saddlekit.models.options import SolveOptions
from saddlekit.models.reports import SolveReport

logger = logging.getLogger(__name__)

Preconditioner = Callable[[np.ndarray], np.ndarray]

BREAKDOWN_RTOL = 1e-14


def as_linear_operator(op: Any, size: int | None = None) -> LinearOperator:
    """Accept a LinearOperator, sparse/dense matrix, or a bare matvec callable."""
    if callable(op) and not hasattr(op, "shape"):
        if size is None:
            raise DimensionError("dimension_mismatch: a callable operator needs an explicit size")
        return LinearOperator((size, size), matvec=op, dtype=np.float64)
    return aslinearoperator(op)


def _givens(a: float, b: float) -> tuple[float, float]:
    if b == 0.0:
        return 1.0, 0.0
    r = math.hypot(a, b)
    return a / r, b / r


def _solve_projected(R: np.ndarray, g: np.ndarray) -> np.ndarray:
    diag = np.abs(np.diag(R))
    scale = float(np.abs(R).max()) if R.size else 0.0
    if diag.size and diag.min() > BREAKDOWN_RTOL * max(scale, np.finfo(float).tiny):
        return sla.solve_triangular(R, g, lower=False, check_finite=False)
    # Singular projected matrix (breakdown on a singular operator): least squares.
    return np.linalg.lstsq(R, g, rcond=None)[0]


def fgmres(
    op: Any,
    b: Any,
    precond: Optional[Preconditioner] = None,
    opts: Optional[SolveOptions] = None,
    *,
    method: str = "fgmres",
) -> tuple[np.ndarray, SolveReport]:
    opts = opts or SolveOptions()
    b = np.asarray(b, dtype=np.float64).ravel()
    N = b.shape[0]
    A = as_linear_operator(op, N)
    if A.shape != (N, N):
        raise DimensionError(f"dimension_mismatch: operator {A.shape} vs right-hand side of length {N}")
    if not np.all(np.isfinite(b)):
        raise ConfigError("non_finite_rhs: right-hand side contains NaN or Inf")
    if opts.x0 is not None and opts.x0.shape != (N,):
        raise DimensionError(f"dimension_mismatch: x0 has shape {opts.x0.shape}, expected ({N},)")

    t0 = time.perf_counter()
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(N), SolveReport(
            method=method, converged=True, outer_iterations=0, residual_history=[0.0], tol=opts.tol,
        )

    x = np.zeros(N) if opts.x0 is None else opts.x0.copy()
    r = b - A.matvec(x)
    beta = float(np.linalg.norm(r))
    history = [beta / bnorm]
    converged = history[-1] < opts.tol
    total = 0
    breakdown = False
    m = opts.restart

    while not converged and total < opts.max_iters:
        V = np.zeros((m + 1, N))
        Z = np.zeros((m, N))
        H = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = beta
        V[0] = r / beta
        k = 0
        happy = False
        for j in range(m):
            z = V[j] if precond is None else np.asarray(precond(V[j]), dtype=np.float64)
            Z[j] = z
            w = np.asarray(A.matvec(z), dtype=np.float64).ravel()
            w_norm0 = float(np.linalg.norm(w))
            for i in range(j + 1):
                H[i, j] = np.dot(w, V[i])
                w = w - H[i, j] * V[i]
            h_next = float(np.linalg.norm(w))
            H[j + 1, j] = h_next
            for i in range(j):
                hij = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = hij
            cs[j], sn[j] = _givens(H[j, j], H[j + 1, j])
            H[j, j] = cs[j] * H[j, j] + sn[j] * H[j + 1, j]
            H[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]
            k = j + 1
            total += 1
            estimate = abs(g[j + 1]) / bnorm
            history.append(estimate)
            if h_next <= BREAKDOWN_RTOL * w_norm0:
                happy = True
                break
            V[j + 1] = w / h_next
            if estimate < opts.tol or total >= opts.max_iters:
                break

        y = _solve_projected(H[:k, :k], g[:k])
        x = x + Z[:k].T @ y
        r = b - A.matvec(x)
        new_beta = float(np.linalg.norm(r))
        history[-1] = new_beta / bnorm
        converged = history[-1] < opts.tol
        logger.debug("[FGMRES] restart after %d steps: true relative residual %.3e", total, history[-1])
        if happy and not converged and new_beta >= beta * (1.0 - 1e-12):
            # Invariant Krylov subspace without progress: restarting cannot help.
            breakdown = True
            logger.debug("[FGMRES] breakdown without convergence at step %d", total)
            break
        beta = new_beta
        if beta == 0.0:
            converged = True
            break

    report = SolveReport(
        method=method,
        converged=converged,
        outer_iterations=total,
        residual_history=history,
        solve_seconds=time.perf_counter() - t0,
        tol=opts.tol,
        breakdown=breakdown,
    )
    return x, report


__all__ = ["fgmres", "as_linear_operator", "Preconditioner"]
