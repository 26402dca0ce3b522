"""Centralized configuration loader.

Reads environment variables (optionally from a `.env` file) once and exposes an
immutable `CONFIG` object. Per-call options (shifts, solver tolerances, problem
specs) are pydantic models in `saddlekit.models`; the values here only provide
their defaults and the process-wide limits.
"""
from __future__ import annotations
import os
from dataclasses import dataclass
from dotenv import load_dotenv

load_dotenv()


@dataclass(frozen=True)
class SolverDefaults:
    alpha: float
    beta: float
    restart: int
    tol: float
    max_iters: int
    inner_restart: int
    inner_reduction: float
    inner_max: int


@dataclass(frozen=True)
class DenseLimits:
    # Dense Cholesky of beta*I + C up to this order, sparse factorization above.
    cholesky_dense_max: int
    validate_full_max: int
    splitting_max: int
    iteration_matrix_max: int


@dataclass(frozen=True)
class RuntimeConfig:
    threads: int
    log_level: str
    output_dir: str


@dataclass(frozen=True)
class AppConfig:
    solver: SolverDefaults
    limits: DenseLimits
    runtime: RuntimeConfig


def _int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    return int(raw)


def _float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    return float(raw)


def load_config() -> AppConfig:
    solver = SolverDefaults(
        alpha=_float("SADDLEKIT_ALPHA", 0.01),
        beta=_float("SADDLEKIT_BETA", 0.001),
        restart=_int("SADDLEKIT_RESTART", 30),
        tol=_float("SADDLEKIT_TOL", 1e-9),
        max_iters=_int("SADDLEKIT_MAX_ITERS", 5000),
        inner_restart=_int("SADDLEKIT_INNER_RESTART", 10),
        inner_reduction=_float("SADDLEKIT_INNER_REDUCTION", 1e-2),
        inner_max=_int("SADDLEKIT_INNER_MAX", 40),
    )
    limits = DenseLimits(
        cholesky_dense_max=_int("SADDLEKIT_CHOLESKY_DENSE_MAX", 2000),
        validate_full_max=_int("SADDLEKIT_VALIDATE_FULL_MAX", 2000),
        splitting_max=_int("SADDLEKIT_SPLITTING_MAX", 2000),
        iteration_matrix_max=_int("SADDLEKIT_ITERATION_MATRIX_MAX", 1000),
    )
    runtime = RuntimeConfig(
        threads=max(1, _int("SADDLEKIT_THREADS", 4)),
        log_level=(os.getenv("SADDLEKIT_LOG_LEVEL", "INFO").strip().upper() or "INFO"),
        output_dir=os.getenv("SADDLEKIT_OUTPUT_DIR", "saddlekit_out"),
    )
    return AppConfig(solver=solver, limits=limits, runtime=runtime)


CONFIG = load_config()

__all__ = ["AppConfig", "SolverDefaults", "DenseLimits", "RuntimeConfig", "load_config", "CONFIG"]
