"""Pydantic response models for API endpoints."""
from __future__ import annotations
from typing import Dict, Optional

from pydantic import BaseModel

from saddlekit.models.reports import SolveReport, ValidationReport


class HealthResponse(BaseModel):
    status: str = "ok"
    version: str
    defaults: Dict[str, float]
    limits: Dict[str, int]


class GenerateResponse(BaseModel):
    n: int
    m: int
    nnz: Dict[str, int]
    a_asymmetry: float
    validation: Optional[ValidationReport] = None


class SolveResponse(BaseModel):
    n: int
    m: int
    report: SolveReport


__all__ = ["HealthResponse", "GenerateResponse", "SolveResponse"]
