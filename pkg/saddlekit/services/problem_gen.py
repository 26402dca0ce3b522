"""Reproducible saddle point test systems.

`generate_oseen` builds a finite-difference Oseen-type discretization on the unit
square (interior p x p grid, h = 1/(p+1)):

    A = blockdiag(K, K),  K = nu * (I (x) T + T (x) I) + W
    B = (1/h) [I (x) F, F (x) I]
    C = sigma h^2 I   (or sigma times a Neumann graph Laplacian)

W is the skew-symmetric part of a centered-difference convection term, so the
symmetric part of A is nu times the Dirichlet Laplacian (SPD). F is the forward
difference bidiag(-1, +1), which is nonsingular, hence rank(B) = p^2.

`generate_random` draws systems from the hypothesis class for property tests.
"""
from __future__ import annotations
import logging

import numpy as np
import scipy.sparse as sp

from saddlekit.config import CONFIG as _APP_CONFIG
from saddlekit.errors import ConfigError, GenerationError
from saddlekit.models.options import OseenSpec
from saddlekit.services.saddle_system import SaddlePointSystem, make_rhs_for_ones
from saddlekit.services.sparse_core import SparseMatrix

logger = logging.getLogger(__name__)


def _wind(spec: OseenSpec, h: float) -> tuple[np.ndarray, np.ndarray]:
    p = spec.grid
    c = spec.wind_scale
    if spec.wind == "constant":
        w = np.full(p * p, c)
        return w, w.copy()
    # Recirculating field on [-1, 1]^2 (divergence free); unknown k = i + p*j, i along x.
    coords = 2.0 * h * np.arange(1, p + 1) - 1.0
    X, Y = np.meshgrid(coords, coords)
    X, Y = X.ravel(), Y.ravel()
    return c * Y * (1.0 - X**2), -c * X * (1.0 - Y**2)


def _stabilization(spec: OseenSpec, h: float) -> sp.csr_matrix:
    m = spec.m
    if spec.stab == 0.0:
        return sp.csr_matrix((m, m))
    if spec.stabilization == "identity":
        return sp.identity(m, format="csr") * (spec.stab * h * h)
    p = spec.grid
    K = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(p, p)).tolil()
    K[0, 0] = 1.0
    K[p - 1, p - 1] = 1.0
    I = sp.identity(p)
    return (spec.stab * (sp.kron(I, K) + sp.kron(K, I))).tocsr()


def generate_oseen(spec: OseenSpec) -> SaddlePointSystem:
    p = spec.grid
    h = 1.0 / (p + 1)
    I = sp.identity(p, format="csr")
    T = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(p, p)) / (h * h)
    D = sp.diags([-1.0, 1.0], [-1, 1], shape=(p, p)) / (2.0 * h)
    lap = sp.kron(I, T) + sp.kron(T, I)
    w1, w2 = _wind(spec, h)
    conv = sp.diags(w1) @ sp.kron(I, D) + sp.diags(w2) @ sp.kron(D, I)
    skew = (0.5 * (conv - conv.T)).tocsr()
    skew.eliminate_zeros()
    K = spec.nu * lap + skew
    A = sp.block_diag([K, K], format="csr")
    F = sp.diags([-1.0, 1.0], [0, 1], shape=(p, p))
    B = sp.hstack([sp.kron(I, F), sp.kron(F, I)], format="csr") / h
    C = _stabilization(spec, h)
    system = SaddlePointSystem(
        A=SparseMatrix.from_scipy(A),
        B=SparseMatrix.from_scipy(B),
        C=SparseMatrix.from_scipy(C),
        f=np.zeros(spec.n),
        g=np.zeros(spec.m),
    )
    logger.debug("[Generate] oseen p=%d nu=%g sigma=%g wind=%s -> n=%d m=%d", p, spec.nu, spec.stab, spec.wind, spec.n, spec.m)
    return make_rhs_for_ones(system)


def _sparse_normal(rng: np.random.Generator, nrows: int, ncols: int, density: float) -> sp.csr_matrix:
    return sp.random(nrows, ncols, density=density, format="csr", random_state=rng, data_rvs=rng.standard_normal)


def generate_random(
    n: int,
    m: int,
    density: float,
    seed: int,
    *,
    rank_deficient_c: bool = False,
    max_draws: int = 100,
) -> SaddlePointSystem:
    """A = S + K + delta I with min eig of the symmetric part >= 0.1; B full row rank; C = L L^T."""
    if n < 1 or m < 1 or m > n:
        raise ConfigError(f"invalid_sizes: need 1 <= m <= n, got n={n} m={m}")
    if not 0.0 < density <= 1.0:
        raise ConfigError(f"invalid_density: {density} not in (0, 1]")
    rng = np.random.default_rng(seed)

    R = _sparse_normal(rng, n, n, density)
    S = 0.5 * (R + R.T)
    Q = _sparse_normal(rng, n, n, density)
    K = 0.5 * (Q - Q.T)
    # Gershgorin: lambda_min(S) >= -max row sum |S|
    gersh = float(np.asarray(abs(S).sum(axis=1)).max()) if S.nnz else 0.0
    A = S + K + (0.1 + gersh) * sp.identity(n, format="csr")

    check_rank = n <= _APP_CONFIG.limits.validate_full_max
    for attempt in range(1, max_draws + 1):
        Bm = _sparse_normal(rng, m, n, density)
        cols = rng.permutation(n)[:m]
        vals = rng.uniform(0.5, 1.5, m) * rng.choice([-1.0, 1.0], m)
        Bm = (Bm + sp.csr_matrix((vals, (np.arange(m), cols)), shape=(m, n))).tocsr()
        if not check_rank:
            break
        sv = np.linalg.svd(Bm.toarray(), compute_uv=False)
        if sv[-1] > 1e-8 * sv[0]:
            break
        logger.debug("[Generate] B draw %d rank deficient, redrawing", attempt)
    else:
        raise GenerationError(f"rank_deficient_b: no full-rank B after {max_draws} draws")

    k = max(1, m // 2) if rank_deficient_c else m
    L = _sparse_normal(rng, m, k, density)
    C = L @ L.T
    C = 0.5 * (C + C.T)

    system = SaddlePointSystem(
        A=SparseMatrix.from_scipy(A),
        B=SparseMatrix.from_scipy(Bm),
        C=SparseMatrix.from_scipy(C),
        f=np.zeros(n),
        g=np.zeros(m),
    )
    return make_rhs_for_ones(system)


__all__ = ["generate_oseen", "generate_random"]
