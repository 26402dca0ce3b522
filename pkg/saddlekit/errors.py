"""Exception hierarchy shared by services, storage, CLI and API.

Messages start with a snake_case code, then detail: "dimension_mismatch: ...".
"""
from __future__ import annotations
from typing import Any


class SaddlekitError(Exception):
    """Root of every error raised on purpose by this package."""


class ConfigError(SaddlekitError, ValueError):
    pass


class DimensionError(SaddlekitError, ValueError):
    pass


class NotPositiveDefiniteError(SaddlekitError):
    pass


class NotSymmetricError(SaddlekitError, ValueError):
    pass


class SizeCapError(SaddlekitError, ValueError):
    pass


class GenerationError(SaddlekitError):
    pass


class EigenvalueError(SaddlekitError):
    """An eigenvalue of the iteration matrix equals -1 (input violates the hypotheses)."""


class MatrixMarketParseError(SaddlekitError, ValueError):
    def __init__(self, code: str, line: int | None, detail: str = ""):
        self.code = code
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{code}{where}: {detail}" if detail else f"{code}{where}")


class DivergenceError(SaddlekitError):
    """Stationary iteration blew up; `report` holds the history up to that point."""

    def __init__(self, message: str, report: Any):
        super().__init__(message)
        self.report = report


__all__ = [
    "SaddlekitError", "ConfigError", "DimensionError", "NotPositiveDefiniteError", "NotSymmetricError",
    "SizeCapError", "GenerationError", "EigenvalueError", "MatrixMarketParseError",
    "DivergenceError",
]
