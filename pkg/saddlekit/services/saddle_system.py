"""Generalized saddle point system

    [ A   B^T ] [x]   [ f]
    [-B   C   ] [y] = [-g]

with A (n x n) positive definite but possibly nonsymmetric, B (m x n) of full row
rank, C (m x m) symmetric positive semidefinite and m <= n.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass, replace
from typing import Any, Literal

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator

from saddlekit.config import CONFIG as _APP_CONFIG
from saddlekit.errors import DimensionError, NotSymmetricError, SizeCapError
from saddlekit.models.reports import ValidationReport
from saddlekit.services.sparse_core import SYMMETRY_RTOL, SparseMatrix, spmv, spmv_transpose

logger = logging.getLogger(__name__)

RANK_RTOL = 1e-10
PSD_RTOL = 1e-12


@dataclass(frozen=True)
class SaddlePointSystem:
    A: SparseMatrix
    B: SparseMatrix
    C: SparseMatrix
    f: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        n = self.A.nrows
        if self.A.ncols != n:
            raise DimensionError(f"dimension_mismatch: A must be square, got {self.A.shape}")
        m = self.B.nrows
        if self.B.ncols != n:
            raise DimensionError(f"dimension_mismatch: B must be m x {n}, got {self.B.shape}")
        if self.C.shape != (m, m):
            raise DimensionError(f"dimension_mismatch: C must be {m} x {m}, got {self.C.shape}")
        if m > n:
            raise DimensionError(f"dimension_mismatch: m={m} exceeds n={n}")
        f = np.asarray(self.f, dtype=np.float64)
        g = np.asarray(self.g, dtype=np.float64)
        if f.shape != (n,) or g.shape != (m,):
            raise DimensionError(f"dimension_mismatch: f must have length {n} and g length {m}")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "g", g)
        if not self.C.is_symmetric(SYMMETRY_RTOL):
            raise NotSymmetricError(f"not_symmetric: C asymmetry {self.C.asymmetry():.3e}")

    @property
    def n(self) -> int:
        return self.A.nrows

    @property
    def m(self) -> int:
        return self.B.nrows

    @property
    def size(self) -> int:
        return self.n + self.m

    def split(self, u: Any) -> tuple[np.ndarray, np.ndarray]:
        vec = np.asarray(u, dtype=np.float64)
        if vec.ndim != 1 or vec.shape[0] != self.size:
            raise DimensionError(f"dimension_mismatch: expected a vector of length {self.size}, got shape {vec.shape}")
        return vec[: self.n], vec[self.n:]


def block_apply(sys: SaddlePointSystem, u: Any) -> np.ndarray:
    x, y = sys.split(u)
    top = spmv(sys.A, x) + spmv_transpose(sys.B, y)
    bottom = spmv(sys.C, y) - spmv(sys.B, x)
    return np.concatenate([top, bottom])


def rhs(sys: SaddlePointSystem) -> np.ndarray:
    return np.concatenate([sys.f, -sys.g])


def residual(sys: SaddlePointSystem, u: Any) -> np.ndarray:
    return rhs(sys) - block_apply(sys, u)


def relative_residual(sys: SaddlePointSystem, u: Any) -> float:
    b = rhs(sys)
    bnorm = float(np.linalg.norm(b))
    rnorm = float(np.linalg.norm(b - block_apply(sys, u)))
    return rnorm / bnorm if bnorm > 0 else rnorm


def as_operator(sys: SaddlePointSystem) -> LinearOperator:
    return LinearOperator((sys.size, sys.size), matvec=lambda u: block_apply(sys, u), dtype=np.float64)


def assemble_dense(sys: SaddlePointSystem) -> np.ndarray:
    """Dense [[A, B^T], [-B, C]] (verification scale only)."""
    A, B, C = sys.A.to_dense(), sys.B.to_dense(), sys.C.to_dense()
    return np.block([[A, B.T], [-B, C]])


def make_rhs_for_ones(sys: SaddlePointSystem) -> SaddlePointSystem:
    """Copy of `sys` whose exact solution is the all-ones vector."""
    ones_x = np.ones(sys.n)
    ones_y = np.ones(sys.m)
    f = spmv(sys.A, ones_x) + spmv_transpose(sys.B, ones_y)
    g = spmv(sys.B, ones_x) - spmv(sys.C, ones_y)
    return replace(sys, f=f, g=g)


def from_symmetric_form(A: SparseMatrix, B: SparseMatrix, D: SparseMatrix, f, g) -> SaddlePointSystem:
    """Build from blocks of [A B^T; B D](x; y) = (f; g); the second row is negated, so C = -D."""
    return SaddlePointSystem(A=A, B=B, C=SparseMatrix.from_scipy(-D.csr), f=f, g=g)


def to_symmetric_form(sys: SaddlePointSystem) -> tuple[SparseMatrix, SparseMatrix, SparseMatrix, np.ndarray, np.ndarray]:
    return sys.A, sys.B, SparseMatrix.from_scipy(-sys.C.csr), sys.f, sys.g


def validate(
    sys: SaddlePointSystem,
    mode: Literal["full", "sampled"] = "full",
    *,
    samples: int = 50,
    seed: int = 0,
) -> ValidationReport:
    """Check the structural hypotheses; failures are reported, never raised."""
    n, m = sys.n, sys.m
    if mode == "full":
        cap = _APP_CONFIG.limits.validate_full_max
        if sys.size > cap:
            raise SizeCapError(f"size_cap_exceeded: full validation limited to n+m <= {cap}, got {sys.size}")
        A = sys.A.to_dense()
        min_a = float(np.linalg.eigvalsh(0.5 * (A + A.T))[0])
        if m:
            eig_c = np.linalg.eigvalsh(sys.C.to_dense())
            min_c = float(eig_c[0])
            c_scale = float(np.abs(eig_c).max())
            B = sys.B.to_dense()
            b_norm = float(np.linalg.norm(B, 2))
            R = sla.qr(B, mode="r", pivoting=True)[0]
            diag = np.abs(np.diag(R))
            b_rank = int(np.count_nonzero(diag > RANK_RTOL * b_norm)) if b_norm > 0 else 0
        else:
            min_c, c_scale, b_rank = 0.0, 0.0, 0
        report = ValidationReport(
            mode="full", n=n, m=m,
            min_eig_sym_a=min_a, min_eig_c=min_c, b_rank=b_rank,
            a_positive_definite=min_a > 0,
            c_positive_semidefinite=min_c >= -PSD_RTOL * c_scale,
            b_full_row_rank=b_rank == m,
        )
    else:
        rng = np.random.default_rng(seed)
        V = rng.standard_normal((n, samples))
        quad_a = np.einsum("ij,ij->j", V, sys.A.csr @ V)
        rayleigh_a = quad_a / np.einsum("ij,ij->j", V, V)
        if m:
            W = rng.standard_normal((m, samples))
            wn2 = np.einsum("ij,ij->j", W, W)
            quad_c = np.einsum("ij,ij->j", W, sys.C.csr @ W)
            c_norm = sys.C.frobenius_norm()
            c_ok = bool(np.all(quad_c >= -PSD_RTOL * c_norm * wn2))
            min_c = float((quad_c / wn2).min())
        else:
            c_ok, min_c = True, 0.0
        report = ValidationReport(
            mode="sampled", n=n, m=m, samples=samples,
            min_eig_sym_a=float(rayleigh_a.min()), min_eig_c=min_c,
            a_positive_definite=bool(np.all(quad_a > 0)),
            c_positive_semidefinite=c_ok,
        )
    if not report.passed:
        logger.warning("[Validate] hypotheses violated: %s", report.model_dump(exclude={"passed"}))
    return report


__all__ = [
    "SaddlePointSystem", "block_apply", "rhs", "residual", "relative_residual", "as_operator",
    "assemble_dense", "make_rhs_for_ones", "from_symmetric_form", "to_symmetric_form", "validate",
]
