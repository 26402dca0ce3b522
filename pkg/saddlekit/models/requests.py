"""Pydantic request models for the CLI run configuration and the API endpoints."""
from __future__ import annotations
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from saddlekit.config import CONFIG as _APP_CONFIG
from saddlekit.models.options import (
    InnerSolveConfig,
    MethodKind,
    OseenSpec,
    PrecondKind,
    ShiftParams,
    SweepConfig,
)

_S = _APP_CONFIG.solver

BENCH_TOKENS = {
    "none": ("none", "gmres"),
    "mgss": ("mgss", "gmres"),
    "rmgss": ("rmgss", "gmres"),
    "mgss-stationary": ("mgss", "stationary"),
    "rmgss-stationary": ("rmgss", "stationary"),
}
API_VERIFY_MAX_INSTANCES = 20


class RunConfig(BaseModel):
    """Everything one CLI invocation needs, validated in one place."""
    model_config = ConfigDict(frozen=True)

    command: Literal["generate", "solve", "verify", "bench"]
    a: Optional[str] = None
    b: Optional[str] = None
    c: Optional[str] = None
    f: Optional[str] = None
    g: Optional[str] = None
    input_dir: Optional[str] = None
    sign_convention: Literal["paper", "nonsymmetric", "symmetric"] = "paper"
    shifts: ShiftParams = ShiftParams()
    precond: PrecondKind = "mgss"
    method: MethodKind = "gmres"
    tol: float = Field(_S.tol, gt=0)
    max_iters: int = Field(_S.max_iters, ge=1)
    restart: int = Field(_S.restart, ge=1)
    inner: InnerSolveConfig = InnerSolveConfig()
    spec: OseenSpec = OseenSpec()
    seed: int = 0
    out: Optional[str] = None
    grids: List[int] = Field(default_factory=lambda: [8, 16, 32, 64])
    methods: List[str] = Field(default_factory=lambda: ["none", "mgss"])
    instances: int = Field(100, ge=1)

    @model_validator(mode="after")
    def _consistent(self):
        if self.command == "solve" and self.method == "stationary" and self.precond == "none":
            raise ValueError("the stationary method needs a preconditioner (mgss or rmgss)")
        if self.command == "bench":
            if not self.methods:
                raise ValueError("empty method list")
            unknown = [t for t in self.methods if t not in BENCH_TOKENS]
            if unknown:
                raise ValueError(f"unknown bench methods {unknown}; choose from {sorted(BENCH_TOKENS)}")
            if not self.grids or any(p < 2 for p in self.grids):
                raise ValueError("grid list must be non-empty with every grid >= 2")
        files = [self.a, self.b, self.c]
        if any(files) and not all(files):
            raise ValueError("give all of --a, --b and --c, or none of them")
        return self


class SolveRequest(BaseModel):
    spec: OseenSpec = OseenSpec()
    alpha: float = Field(_S.alpha, gt=0)
    beta: float = Field(_S.beta, gt=0)
    precond: PrecondKind = "mgss"
    method: MethodKind = "gmres"
    tol: float = Field(_S.tol, gt=0)
    max_iters: int = Field(_S.max_iters, ge=1)
    restart: int = Field(_S.restart, ge=1)
    inner_restart: int = Field(_S.inner_restart, ge=1)
    inner_reduction: float = Field(_S.inner_reduction, gt=0, lt=1)
    inner_max: int = Field(_S.inner_max, ge=1)
    include_history: bool = True


class VerifyRequest(SweepConfig):
    instances: int = Field(5, ge=1, le=API_VERIFY_MAX_INSTANCES)


__all__ = ["RunConfig", "SolveRequest", "VerifyRequest", "BENCH_TOKENS", "API_VERIFY_MAX_INSTANCES"]
