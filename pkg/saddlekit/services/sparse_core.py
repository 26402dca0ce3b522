"""Sparse matrix primitives and Cholesky factorization.

`SparseMatrix` wraps a canonical scipy CSR matrix (sorted column indices, no
duplicate entries). Values are treated as immutable after construction; every
operation allocates its own output.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from saddlekit.config import CONFIG as _APP_CONFIG
from saddlekit.errors import DimensionError, NotPositiveDefiniteError, NotSymmetricError

logger = logging.getLogger(__name__)

SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class SparseMatrix:
    csr: sp.csr_matrix

    def __post_init__(self):
        csr = self.csr
        if not sp.issparse(csr) or csr.format != "csr":
            raise DimensionError("not_csr: SparseMatrix requires a scipy CSR matrix; use SparseMatrix.from_scipy")
        if csr.dtype != np.float64:
            object.__setattr__(self, "csr", csr.astype(np.float64))
        if not self.csr.has_canonical_format:
            raise DimensionError("duplicate_or_unsorted_entries: CSR rows must hold strictly increasing column indices")

    # ---------------- construction ----------------

    @classmethod
    def from_scipy(cls, mat: Any) -> "SparseMatrix":
        """Canonicalize any scipy sparse matrix (duplicates are summed)."""
        csr = sp.csr_matrix(mat, dtype=np.float64, copy=True)
        csr.sum_duplicates()
        csr.sort_indices()
        return cls(csr)

    @classmethod
    def from_dense(cls, dense: Any) -> "SparseMatrix":
        arr = np.atleast_2d(np.asarray(dense, dtype=np.float64))
        return cls.from_scipy(sp.csr_matrix(arr))

    @classmethod
    def from_triplets(cls, rows, cols, values, shape: tuple[int, int]) -> "SparseMatrix":
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        nrows, ncols = shape
        if rows.size and (rows.min() < 0 or rows.max() >= nrows or cols.min() < 0 or cols.max() >= ncols):
            raise DimensionError(f"index_out_of_range: triplet index outside shape {shape}")
        keys = rows * max(ncols, 1) + cols
        if np.unique(keys).size != keys.size:
            raise DimensionError("duplicate_entries: (row, col) pairs must be unique")
        coo = sp.coo_matrix((values, (rows, cols)), shape=shape)
        return cls.from_scipy(coo)

    @classmethod
    def identity(cls, n: int, scale: float = 1.0) -> "SparseMatrix":
        return cls.from_scipy(sp.identity(n, format="csr") * scale)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "SparseMatrix":
        return cls(sp.csr_matrix((nrows, ncols), dtype=np.float64))

    # ---------------- properties ----------------

    @property
    def nrows(self) -> int:
        return int(self.csr.shape[0])

    @property
    def ncols(self) -> int:
        return int(self.csr.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @property
    def nnz(self) -> int:
        return int(self.csr.nnz)

    # ---------------- helpers ----------------

    def to_dense(self) -> np.ndarray:
        return self.csr.toarray()

    def transpose(self) -> "SparseMatrix":
        """Explicit transpose (materialized). Matvecs should use `spmv_transpose`."""
        return SparseMatrix.from_scipy(self.csr.T)

    def max_abs(self) -> float:
        return float(abs(self.csr).max()) if self.nnz else 0.0

    def frobenius_norm(self) -> float:
        return float(np.sqrt(np.dot(self.csr.data, self.csr.data)))

    def shifted(self, shift: float) -> "SparseMatrix":
        """Return shift*I + self for a square matrix."""
        if self.nrows != self.ncols:
            raise DimensionError(f"not_square: cannot shift a {self.nrows}x{self.ncols} matrix")
        return SparseMatrix.from_scipy(self.csr + shift * sp.identity(self.nrows, format="csr"))

    def asymmetry(self) -> float:
        """max |S - S^T| over all entries."""
        diff = self.csr - self.csr.T
        return float(abs(diff).max()) if diff.nnz else 0.0

    def is_symmetric(self, rtol: float = SYMMETRY_RTOL) -> bool:
        if self.nrows != self.ncols:
            return False
        return self.asymmetry() <= rtol * self.max_abs()


def _as_vector(x: Any, length: int, what: str) -> np.ndarray:
    vec = np.asarray(x, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != length:
        raise DimensionError(f"dimension_mismatch: {what} expects a vector of length {length}, got shape {vec.shape}")
    return vec


def spmv(M: SparseMatrix, x: Any) -> np.ndarray:
    """y = M x."""
    vec = _as_vector(x, M.ncols, "spmv")
    return M.csr @ vec


def spmv_transpose(M: SparseMatrix, x: Any) -> np.ndarray:
    """y = M^T x without forming M^T (the CSC view shares M's arrays)."""
    vec = _as_vector(x, M.nrows, "spmv_transpose")
    return M.csr.T @ vec


# ---------------- Cholesky ----------------

@dataclass(frozen=True)
class CholeskyFactor:
    """L L^T = P S P^T, P the identity for the dense path.

    `lower` is a dense ndarray (dense path) or a CSC matrix (sparse path); `perm`
    maps original indices to factored positions (sparse path only).
    """
    dimension: int
    kind: Literal["dense", "sparse"]
    lower: Any
    perm: np.ndarray | None = None
    _superlu: Any = field(default=None, repr=False, compare=False)

    def reconstruct(self) -> np.ndarray:
        """Dense L L^T in the original ordering."""
        L = self.lower if self.kind == "dense" else self.lower.toarray()
        prod = L @ L.T
        if self.perm is None:
            return prod
        return prod[np.ix_(self.perm, self.perm)]


def cholesky_factor(S: SparseMatrix, *, dense_max: int | None = None) -> CholeskyFactor:
    if S.nrows != S.ncols:
        raise DimensionError(f"not_square: cannot factor a {S.nrows}x{S.ncols} matrix")
    if not S.is_symmetric():
        raise NotSymmetricError(
            f"not_symmetric: max|S-S^T|={S.asymmetry():.3e} exceeds {SYMMETRY_RTOL:g}*max|S|"
        )
    m = S.nrows
    if m == 0:
        return CholeskyFactor(dimension=0, kind="dense", lower=np.zeros((0, 0)))
    limit = _APP_CONFIG.limits.cholesky_dense_max if dense_max is None else dense_max
    if m <= limit:
        try:
            L = sla.cholesky(S.to_dense(), lower=True, check_finite=True)
        except sla.LinAlgError as e:
            raise NotPositiveDefiniteError(f"not_positive_definite: {e}") from e
        return CholeskyFactor(dimension=m, kind="dense", lower=L)
    # No row pivoting with a symmetric fill-reducing ordering: U = D L^T for SPD input.
    try:
        lu = splu(
            S.csr.tocsc(),
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError as e:
        raise NotPositiveDefiniteError(f"not_positive_definite: {e}") from e
    pivots = lu.U.diagonal()
    if not np.array_equal(lu.perm_r, lu.perm_c) or np.any(pivots <= 0.0):
        bad = float(pivots.min()) if pivots.size else 0.0
        raise NotPositiveDefiniteError(f"not_positive_definite: non-positive pivot {bad:.3e} encountered")
    lower = (lu.L @ sp.diags(np.sqrt(pivots))).tocsc()
    logger.debug("[Cholesky] sparse factor m=%d nnz(L)=%d", m, lower.nnz)
    return CholeskyFactor(dimension=m, kind="sparse", lower=lower, perm=np.asarray(lu.perm_r), _superlu=lu)


def cholesky_solve(L: CholeskyFactor, b: Any) -> np.ndarray:
    """Solve (L L^T) z = b."""
    rhs = _as_vector(b, L.dimension, "cholesky_solve")
    if L.dimension == 0:
        return rhs.copy()
    if L.kind == "dense":
        return sla.cho_solve((L.lower, True), rhs, check_finite=False)
    return L._superlu.solve(rhs)


__all__ = [
    "SparseMatrix", "CholeskyFactor", "spmv", "spmv_transpose", "cholesky_factor", "cholesky_solve",
    "SYMMETRY_RTOL",
]
