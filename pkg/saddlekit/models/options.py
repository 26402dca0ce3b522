"""Per-call option models (validated with pydantic).

Defaults come from `saddlekit.config.CONFIG`. `build_options` converts pydantic
validation failures into `ConfigError` for callers outside the API layer.
"""
from __future__ import annotations
from typing import Any, Literal, Optional, TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from saddlekit.config import CONFIG as _APP_CONFIG
from saddlekit.errors import ConfigError

_S = _APP_CONFIG.solver

PrecondKind = Literal["none", "mgss", "rmgss"]
MethodKind = Literal["stationary", "gmres"]


class ShiftParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(_S.alpha, gt=0)
    beta: float = Field(_S.beta, gt=0)


class InnerSolveConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    restart: int = Field(_S.inner_restart, ge=1)
    reduction: float = Field(_S.inner_reduction, gt=0, lt=1)
    max_iters: int = Field(_S.inner_max, ge=1)

    @model_validator(mode="after")
    def _max_covers_restart(self):
        if self.max_iters < self.restart:
            raise ValueError("max_iters must be >= restart")
        return self


class SolveOptions(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    tol: float = Field(_S.tol, gt=0)
    max_iters: int = Field(_S.max_iters, ge=1)
    restart: int = Field(_S.restart, ge=1)
    x0: Optional[np.ndarray] = None

    @field_validator("x0", mode="before")
    @classmethod
    def _as_array(cls, v):
        if v is None:
            return None
        arr = np.asarray(v, dtype=np.float64)
        if arr.ndim != 1 or not np.all(np.isfinite(arr)):
            raise ValueError("x0 must be a finite 1-D vector")
        return arr


class OseenSpec(BaseModel):
    """Finite-difference Oseen problem on a p x p interior grid of the unit square."""
    model_config = ConfigDict(frozen=True)

    grid: int = Field(8, ge=2)
    nu: float = Field(1.0 / 50.0, gt=0)
    stab: float = Field(0.1, ge=0)
    wind: Literal["constant", "recirculating"] = "recirculating"
    wind_scale: float = Field(1.0, ge=0)
    stabilization: Literal["identity", "laplacian"] = "identity"
    seed: int = 0

    @property
    def n(self) -> int:
        return 2 * self.grid * self.grid

    @property
    def m(self) -> int:
        return self.grid * self.grid


class SweepConfig(BaseModel):
    """Randomized verification sweep over small valid systems and shift pairs."""
    model_config = ConfigDict(frozen=True)

    instances: int = Field(100, ge=1)
    max_size: int = Field(80, ge=3)
    density: float = Field(0.3, gt=0, le=1)
    alphas: tuple[float, ...] = (1e-3, 1e-2, 0.1, 1.0, 10.0)
    betas: tuple[float, ...] = (1e-3, 1e-2, 0.1, 1.0, 10.0)
    seed: int = 0
    positive_real_part_trials: int = Field(10_000, ge=1)
    power_starts: int = Field(20, ge=1)
    power_steps: int = Field(5000, ge=1)
    estimator: Literal["power", "eigvals", "auto"] = "power"
    certify: bool = True
    threads: int = Field(_APP_CONFIG.runtime.threads, ge=1)

    @field_validator("alphas", "betas")
    @classmethod
    def _positive(cls, v):
        if not v or any(s <= 0 for s in v):
            raise ValueError("shift lists must be non-empty and positive")
        return v


_M = TypeVar("_M", bound=BaseModel)


def build_options(model: type[_M], **values: Any) -> _M:
    """Instantiate `model`, dropping None values so defaults apply."""
    try:
        return model(**{k: v for k, v in values.items() if v is not None})
    except ValidationError as e:
        raise ConfigError(f"invalid_{model.__name__}: {e.errors(include_url=False)}") from e


__all__ = [
    "ShiftParams", "InnerSolveConfig", "SolveOptions", "OseenSpec", "SweepConfig",
    "PrecondKind", "MethodKind", "build_options",
]
