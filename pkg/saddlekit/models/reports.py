"""Pydantic report models serialized by the CLI and the API."""
from __future__ import annotations
from typing import Any, List, Optional

from pydantic import BaseModel, Field, computed_field

SCHEMA_VERSION = 1


class ValidationReport(BaseModel):
    mode: str
    n: int
    m: int
    # full mode: eigenvalues; sampled mode: smallest sampled Rayleigh quotients
    min_eig_sym_a: float
    min_eig_c: float
    b_rank: Optional[int] = None
    samples: Optional[int] = None
    a_positive_definite: bool
    c_positive_semidefinite: bool
    b_full_row_rank: Optional[bool] = None

    @computed_field
    @property
    def passed(self) -> bool:
        flags = [self.a_positive_definite, self.c_positive_semidefinite, self.b_full_row_rank]
        return all(f for f in flags if f is not None) and self.m <= self.n


class SolveReport(BaseModel):
    method: str
    converged: bool
    outer_iterations: int
    inner_iterations: int = 0
    residual_history: List[float] = Field(min_length=1)
    setup_seconds: float = 0.0
    solve_seconds: float = 0.0
    tol: float
    breakdown: bool = False

    @computed_field
    @property
    def final_relative_residual(self) -> float:
        return self.residual_history[-1]


class SolveRunReport(BaseModel):
    """JSON written by `saddlekit solve`."""
    schema_version: int = SCHEMA_VERSION
    converged: bool
    outer_iters: int
    inner_iters_total: int
    setup_seconds: float
    solve_seconds: float
    final_relative_residual: float
    n: int
    m: int
    config: dict[str, Any]
    error: Optional[str] = None


class SpectralReport(BaseModel):
    method: str
    rho: float
    dominant_real: float
    dominant_imag: float
    starts: int = 0
    converged_starts: int = 0
    # None when the estimate is indeterminate (no power start converged)
    rho_below_one: Optional[bool]
    min_pivot_i_minus_gamma: float
    min_pivot_i_plus_gamma: float
    pivot_threshold: float
    lambda_not_plus_one: bool
    lambda_not_minus_one: bool

    @computed_field
    @property
    def passed(self) -> bool:
        return bool(self.rho_below_one) and self.lambda_not_plus_one and self.lambda_not_minus_one


class PositiveRealPartReport(BaseModel):
    trials: int
    failures: int
    min_real_part: float
    max_identity_gap: float

    @computed_field
    @property
    def passed(self) -> bool:
        return self.failures == 0


class EigenpairSummary(BaseModel):
    lambda_real: float
    lambda_imag: float
    omega_real: float
    omega_imag: float
    p_real: float
    p_imag: float
    q: float
    r: float
    bx_norm: float
    bx_zero: bool
    x_nonzero: bool
    identity_residual: float
    identity_ok: bool
    re_omega_gap: float
    modulus_gap: float
    passed: bool


class ShiftCheck(BaseModel):
    alpha: float
    beta: float
    spectral: SpectralReport
    certificate: Optional[EigenpairSummary] = None
    error: Optional[str] = None

    @computed_field
    @property
    def passed(self) -> bool:
        if self.error is not None or not self.spectral.passed:
            return False
        return self.certificate is None or self.certificate.passed


class InstanceResult(BaseModel):
    index: int
    seed: int
    n: int
    m: int
    validation: Optional[ValidationReport] = None
    positive_real_part: Optional[PositiveRealPartReport] = None
    shifts: List[ShiftCheck] = Field(default_factory=list)
    error: Optional[str] = None

    @computed_field
    @property
    def passed(self) -> bool:
        if self.error is not None:
            return False
        if self.validation is not None and not self.validation.passed:
            return False
        if self.positive_real_part is not None and not self.positive_real_part.passed:
            return False
        return all(s.passed for s in self.shifts)


class VerificationReport(BaseModel):
    schema_version: int = SCHEMA_VERSION
    config: dict[str, Any]
    instances: List[InstanceResult]
    seconds: float

    @computed_field
    @property
    def failures(self) -> int:
        return sum(1 for inst in self.instances if not inst.passed)

    @computed_field
    @property
    def all_passed(self) -> bool:
        return self.failures == 0


class GenerateManifest(BaseModel):
    schema_version: int = SCHEMA_VERSION
    spec: dict[str, Any]
    seed: int
    n: int
    m: int
    nnz: dict[str, int]
    checksums: dict[str, str]


class BenchRow(BaseModel):
    grid: int
    n: int
    m: int
    precond: str
    method: str
    iters: Optional[int] = None
    inner_iters: Optional[int] = None
    setup_seconds: Optional[float] = None
    solve_seconds: Optional[float] = None
    converged: bool = False
    final_relative_residual: Optional[float] = None
    error: Optional[str] = None


__all__ = [
    "SCHEMA_VERSION", "ValidationReport", "SolveReport", "SolveRunReport", "SpectralReport",
    "PositiveRealPartReport", "EigenpairSummary", "ShiftCheck", "InstanceResult",
    "VerificationReport", "GenerateManifest", "BenchRow",
]
