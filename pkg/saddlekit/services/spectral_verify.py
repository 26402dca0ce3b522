"""Small-scale verification of the shift-splitting convergence theory.

For G = M^{-1} N (dense), this module checks that

- the spectral radius of G is below one,
- I - G and I + G are nonsingular (no eigenvalue equals +1 or -1),
- Re(x* A x) > 0 for random complex x whenever A is positive definite,
- every dominant eigenpair (lam, (x; y)) satisfies, with w = (1 - lam)/(1 + lam),
  ||x|| = 1, p = x*Ax, q = y*y and r = y*Cy:

      alpha w + beta q conj(w) = p + r,    Re(w) = (Re p + r) / (alpha + beta q) > 0.

The dominant eigenvalue comes from power iteration with random complex starts and restarted
Arnoldi (Rayleigh-Ritz) acceleration, which separates clustered near-unit eigenvalues;
numpy's dense eigensolver is available as a cross-check.
"""
from __future__ import annotations
import logging
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
import scipy.linalg as sla

from saddlekit.config import CONFIG as _APP_CONFIG
from saddlekit.errors import ConfigError, EigenvalueError, SaddlekitError, SizeCapError
from saddlekit.models.options import ShiftParams, SweepConfig
from saddlekit.models.reports import (
    EigenpairSummary,
    InstanceResult,
    PositiveRealPartReport,
    ShiftCheck,
    SpectralReport,
    VerificationReport,
)
from saddlekit.services.preconditioners import assemble_splitting_dense
from saddlekit.services.problem_gen import generate_random
from saddlekit.services.saddle_system import SaddlePointSystem, validate
from saddlekit.services.sparse_core import SparseMatrix

logger = logging.getLogger(__name__)

RHO_SLACK = 1e-10
PIVOT_RTOL = 1e-10
RITZ_RTOL = 1e-10
KRYLOV_DIM = 80
BREAKDOWN_RTOL = 1e-12
NILPOTENT_RTOL = 1e-13
EIGENPAIR_TOL = 1e-8
MINUS_ONE_TOL = 1e-12
IDENTITY_RTOL = 1e-6
MODULUS_TOL = 1e-8
NULL_BX_RTOL = 1e-8

Estimator = Literal["power", "eigvals", "auto"]


def dense_iteration_matrix(sys: SaddlePointSystem, params: ShiftParams) -> np.ndarray:
    cap = _APP_CONFIG.limits.iteration_matrix_max
    if sys.size > cap:
        raise SizeCapError(f"size_cap_exceeded: iteration matrix limited to n+m <= {cap}, got {sys.size}")
    M, N = assemble_splitting_dense(sys, params)
    return sla.lu_solve(sla.lu_factor(M), N)


# ---------------- dominant eigenpair ----------------

@dataclass(frozen=True)
class DominantEigenpair:
    value: complex
    vector: Optional[np.ndarray]
    rho: float
    starts: int
    converged_starts: int
    method: str


def _arnoldi(gamma: np.ndarray, X: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Batched Arnoldi (classical Gram-Schmidt, reorthogonalized) from the unit rows of X."""
    s, N = X.shape
    V = np.zeros((s, m, N), dtype=complex)
    H = np.zeros((s, m, m), dtype=complex)
    V[:, 0] = X
    floor = BREAKDOWN_RTOL * float(np.linalg.norm(gamma))
    for j in range(m):
        w = V[:, j] @ gamma.T
        basis = V[:, : j + 1]
        for _ in range(2):
            h = np.einsum("skn,sn->sk", basis.conj(), w)
            w = w - np.einsum("skn,sk->sn", basis, h)
            H[:, : j + 1, j] += h
        if j + 1 == m:
            break
        norm = np.linalg.norm(w, axis=1)
        # Starts whose Krylov space became invariant keep zero columns from here on.
        live = norm > floor
        H[live, j + 1, j] = norm[live]
        V[live, j + 1] = w[live] / norm[live, None]
    return V, H


def _ritz(gamma: np.ndarray, V: np.ndarray, H: np.ndarray):
    """Dominant Ritz pair per start and its true residual ||G v - theta v|| (unit v)."""
    theta, S = np.linalg.eig(H)
    idx = np.argmax(np.abs(theta), axis=-1)
    rows = np.arange(theta.shape[0])
    th = theta[rows, idx]
    vec = np.einsum("smn,sm->sn", V, S[rows, :, idx])
    vec = vec / np.maximum(np.linalg.norm(vec, axis=1), np.finfo(float).tiny)[:, None]
    res = np.linalg.norm(vec @ gamma.T - th[:, None] * vec, axis=1)
    return th, vec, res


def _refine(gamma: np.ndarray, theta: complex, v: np.ndarray, steps: int = 3) -> tuple[complex, np.ndarray]:
    """A few shifted inverse iterations around a converged Ritz value."""
    N = gamma.shape[0]
    best_theta, best_v = theta, v / np.linalg.norm(v)
    best_res = np.linalg.norm(gamma @ best_v - best_theta * best_v)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu = sla.lu_factor(gamma - theta * np.eye(N), check_finite=False)
        w = best_v
        for _ in range(steps):
            w = sla.lu_solve(lu, w, check_finite=False)
            norm = np.linalg.norm(w)
            if not np.isfinite(norm) or norm == 0.0:
                break
            w = w / norm
            th = complex(np.vdot(w, gamma @ w))
            res = np.linalg.norm(gamma @ w - th * w)
            if res < best_res:
                best_theta, best_v, best_res = th, w, res
    return best_theta, best_v


def _power_pair(gamma: np.ndarray, starts: int, steps: int, seed: int) -> DominantEigenpair:
    """Power iteration from random complex starts, accelerated by restarted Arnoldi.

    A short plain power phase detects nilpotent inputs (iterates collapsing to zero).
    Each start then builds a Krylov basis of at most KRYLOV_DIM power iterates and
    restarts from its dominant Ritz vector until the Ritz residual drops below
    RITZ_RTOL * ||G||. Every matvec counts against `steps`.
    """
    N = gamma.shape[0]
    gnorm = float(np.linalg.norm(gamma))
    if N == 0 or gnorm == 0.0:
        vec = np.eye(N, 1, dtype=complex)[:, 0] if N else None
        return DominantEigenpair(0.0j, vec, 0.0, starts, starts, "power")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((starts, N)) + 1j * rng.standard_normal((starts, N))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    warm = min(N, steps)
    for _ in range(warm):
        Y = X @ gamma.T
        norms = np.linalg.norm(Y, axis=1)
        collapsed = norms <= NILPOTENT_RTOL * gnorm
        if np.any(collapsed):
            # G^k v vanishes for a random v: every eigenvalue is (numerically) zero.
            i = int(np.flatnonzero(collapsed)[0])
            lam = complex(np.vdot(X[i], Y[i]))
            return DominantEigenpair(lam, X[i], abs(lam), starts, starts, "power")
        X = Y / norms[:, None]

    thresh = RITZ_RTOL * gnorm
    done = np.zeros(starts, dtype=bool)
    theta = np.zeros(starts, dtype=complex)
    vecs = np.zeros((starts, N), dtype=complex)
    active = np.arange(starts)
    used = warm
    while active.size and used < steps:
        m = min(N, KRYLOV_DIM, steps - used)
        V, H = _arnoldi(gamma, X[active], m)
        th, v, res = _ritz(gamma, V, H)
        used += m
        ok = res <= thresh
        hit = active[ok]
        done[hit] = True
        theta[hit] = th[ok]
        vecs[hit] = v[ok]
        X[active[~ok]] = v[~ok]
        active = active[~ok]
    converged = int(done.sum())
    if converged == 0:
        logger.debug("[Verify] power iteration: no start converged in %d steps", steps)
        return DominantEigenpair(np.nan + 0j, None, float("nan"), starts, 0, "power")
    conv = np.flatnonzero(done)
    best = conv[np.argmax(np.abs(theta[conv]))]
    lam, vec = _refine(gamma, complex(theta[best]), vecs[best])
    rho = float(np.abs(theta[conv]).max())
    return DominantEigenpair(lam, vec, rho, starts, converged, "power")


def _eig_pair(gamma: np.ndarray) -> DominantEigenpair:
    if gamma.shape[0] == 0:
        return DominantEigenpair(0.0j, None, 0.0, 0, 0, "eigvals")
    w, V = np.linalg.eig(gamma)
    i = int(np.argmax(np.abs(w)))
    return DominantEigenpair(complex(w[i]), V[:, i], float(np.abs(w[i])), 0, 0, "eigvals")


def dominant_eigenpair(
    gamma: np.ndarray,
    *,
    method: Estimator = "power",
    starts: int = 20,
    steps: int = 5000,
    seed: int = 0,
) -> DominantEigenpair:
    gamma = np.asarray(gamma)
    if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
        raise ConfigError(f"not_square: iteration matrix has shape {gamma.shape}")
    if method == "eigvals":
        return _eig_pair(gamma)
    pair = _power_pair(gamma, starts, steps, seed)
    if method == "auto" and pair.converged_starts == 0:
        fallback = _eig_pair(gamma)
        return DominantEigenpair(fallback.value, fallback.vector, fallback.rho, pair.starts, 0, "auto:eigvals")
    return pair


def _min_pivot(mat: np.ndarray) -> float:
    if mat.shape[0] == 0:
        return float("inf")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, _ = sla.lu_factor(mat, check_finite=False)
    return float(np.abs(np.diag(lu)).min())


def _report(gamma: np.ndarray, pair: DominantEigenpair) -> SpectralReport:
    N = gamma.shape[0]
    eye = np.eye(N)
    threshold = PIVOT_RTOL * float(np.linalg.norm(gamma))
    p_minus = _min_pivot(eye - gamma)
    p_plus = _min_pivot(eye + gamma)
    indeterminate = not np.isfinite(pair.rho)
    report = SpectralReport(
        method=pair.method,
        rho=pair.rho,
        dominant_real=float(np.real(pair.value)),
        dominant_imag=float(np.imag(pair.value)),
        starts=pair.starts,
        converged_starts=pair.converged_starts,
        rho_below_one=None if indeterminate else bool(pair.rho < 1.0 + RHO_SLACK),
        min_pivot_i_minus_gamma=p_minus,
        min_pivot_i_plus_gamma=p_plus,
        pivot_threshold=threshold,
        lambda_not_plus_one=p_minus > threshold,
        lambda_not_minus_one=p_plus > threshold,
    )
    if indeterminate:
        logger.warning("[Verify] spectral radius indeterminate: no power start converged")
    return report


def spectral_radius_estimate(
    gamma: np.ndarray,
    *,
    method: Estimator = "power",
    starts: int = 20,
    steps: int = 5000,
    seed: int = 0,
) -> SpectralReport:
    gamma = np.asarray(gamma, dtype=np.float64)
    pair = dominant_eigenpair(gamma, method=method, starts=starts, steps=steps, seed=seed)
    return _report(gamma, pair)


# ---------------- positive real part of x* A x ----------------

def quadratic_form(A: SparseMatrix, x: np.ndarray) -> complex:
    x = np.asarray(x, dtype=complex)
    return complex(np.vdot(x, A.csr @ x))


def check_positive_real_part(A: SparseMatrix, trials: int = 10_000, seed: int = 0, *, chunk: int = 2048) -> PositiveRealPartReport:
    """Re(x*Ax) for random complex x = r + i s, compared with r^T A r + s^T A s."""
    n = A.nrows
    rng = np.random.default_rng(seed)
    scale = max(1.0, A.frobenius_norm())
    failures = 0
    min_real = float("inf")
    max_gap = 0.0
    done = 0
    while done < trials:
        k = min(chunk, trials - done)
        R = rng.standard_normal((n, k))
        S = rng.standard_normal((n, k))
        AR, AS = A.csr @ R, A.csr @ S
        X = R + 1j * S
        direct = np.real(np.einsum("ij,ij->j", np.conj(X), AR + 1j * AS))
        split = np.einsum("ij,ij->j", R, AR) + np.einsum("ij,ij->j", S, AS)
        norm2 = np.einsum("ij,ij->j", R, R) + np.einsum("ij,ij->j", S, S)
        failures += int(np.count_nonzero(split <= 0.0))
        min_real = min(min_real, float((split / norm2).min()))
        max_gap = max(max_gap, float((np.abs(direct - split) / (scale * norm2)).max()))
        done += k
    report = PositiveRealPartReport(trials=trials, failures=failures, min_real_part=min_real, max_identity_gap=max_gap)
    if failures:
        logger.warning("[Verify] Re(x*Ax) <= 0 for %d of %d random vectors", failures, trials)
    return report


# ---------------- eigenpair certificate ----------------

@dataclass(frozen=True)
class EigenpairCertificate:
    lam: complex
    x: np.ndarray
    y: np.ndarray
    omega: complex
    p: complex
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

    def summary(self) -> EigenpairSummary:
        return EigenpairSummary(
            lambda_real=self.lam.real, lambda_imag=self.lam.imag,
            omega_real=self.omega.real, omega_imag=self.omega.imag,
            p_real=self.p.real, p_imag=self.p.imag, q=self.q, r=self.r,
            bx_norm=self.bx_norm, bx_zero=self.bx_zero, x_nonzero=self.x_nonzero,
            identity_residual=self.identity_residual, identity_ok=self.identity_ok,
            re_omega_gap=self.re_omega_gap, modulus_gap=self.modulus_gap, passed=self.passed,
        )


def certify_eigenpair(
    sys: SaddlePointSystem,
    params: ShiftParams,
    lam: complex,
    v: np.ndarray,
    gamma: Optional[np.ndarray] = None,
) -> EigenpairCertificate:
    lam = complex(lam)
    if abs(lam + 1.0) <= MINUS_ONE_TOL:
        raise EigenvalueError(f"eigenvalue_minus_one: lambda={lam} is -1 to within {MINUS_ONE_TOL:g}")
    v = np.asarray(v, dtype=complex).ravel()
    if v.shape != (sys.size,):
        raise ConfigError(f"dimension_mismatch: eigenvector has length {v.size}, expected {sys.size}")
    vnorm = float(np.linalg.norm(v))
    if vnorm == 0.0:
        raise ConfigError("not_an_eigenpair: zero eigenvector")
    v = v / vnorm
    if gamma is None:
        gamma = dense_iteration_matrix(sys, params)
    eig_res = float(np.linalg.norm(gamma @ v - lam * v))
    if eig_res > EIGENPAIR_TOL * max(1.0, float(np.linalg.norm(gamma))):
        raise ConfigError(f"not_an_eigenpair: residual ||Gv - lam v|| = {eig_res:.3e}")

    alpha, beta = params.alpha, params.beta
    x, y = v[: sys.n], v[sys.n:]
    xnorm = float(np.linalg.norm(x))
    x_nonzero = xnorm > 1e-10
    if x_nonzero:
        x, y = x / xnorm, y / xnorm
    omega = (1.0 - lam) / (1.0 + lam)
    p = complex(np.vdot(x, sys.A.csr @ x))
    q = float(np.real(np.vdot(y, y)))
    r = float(np.real(np.vdot(y, sys.C.csr @ y)))
    identity = abs(alpha * omega + beta * q * np.conj(omega) - (p + r))
    identity_ok = identity <= IDENTITY_RTOL * (abs(p) + r + 1.0)

    re_predicted = (p.real + r) / (alpha + beta * q)
    re_omega_gap = abs(omega.real - re_predicted)
    re_ok = re_omega_gap <= IDENTITY_RTOL * max(1.0, abs(omega.real)) and omega.real > 0

    modulus_gap = abs(abs(lam) - abs(1.0 - omega) / abs(1.0 + omega))
    bx_norm = float(np.linalg.norm(sys.B.csr @ x))
    bx_zero = bx_norm <= NULL_BX_RTOL * max(1.0, sys.B.frobenius_norm())
    if bx_zero:
        # Bx = 0 forces alpha w = p, so |lam| = |alpha - p| / |alpha + p|.
        modulus_gap = max(modulus_gap, abs(abs(lam) - abs(alpha - p) / abs(alpha + p)))
    modulus_ok = modulus_gap <= MODULUS_TOL

    passed = bool(x_nonzero and identity_ok and re_ok and modulus_ok)
    if not passed:
        logger.warning(
            "[Verify] eigenpair lambda=%s failed: x_nonzero=%s identity=%.2e re_gap=%.2e modulus_gap=%.2e",
            lam, x_nonzero, identity, re_omega_gap, modulus_gap,
        )
    return EigenpairCertificate(
        lam=lam, x=x, y=y, omega=omega, p=p, q=q, r=r,
        bx_norm=bx_norm, bx_zero=bool(bx_zero), x_nonzero=bool(x_nonzero),
        identity_residual=float(identity), identity_ok=bool(identity_ok),
        re_omega_gap=float(re_omega_gap), modulus_gap=float(modulus_gap), passed=passed,
    )


# ---------------- checks and sweep ----------------

def check_shifts(
    sys: SaddlePointSystem,
    params: ShiftParams,
    *,
    method: Estimator = "power",
    starts: int = 20,
    steps: int = 5000,
    seed: int = 0,
    certify: bool = True,
) -> ShiftCheck:
    """Spectral checks (and optionally the eigenpair certificate) for one shift pair."""
    try:
        gamma = dense_iteration_matrix(sys, params)
        pair = dominant_eigenpair(gamma, method=method, starts=starts, steps=steps, seed=seed)
        spectral = _report(gamma, pair)
        certificate = None
        if certify and pair.vector is not None and np.isfinite(pair.rho):
            certificate = certify_eigenpair(sys, params, pair.value, pair.vector, gamma).summary()
        return ShiftCheck(alpha=params.alpha, beta=params.beta, spectral=spectral, certificate=certificate)
    except SaddlekitError as e:
        logger.warning("[Verify] alpha=%g beta=%g: %s", params.alpha, params.beta, e)
        return ShiftCheck(
            alpha=params.alpha, beta=params.beta, error=str(e),
            spectral=SpectralReport(
                method=method, rho=float("nan"), dominant_real=float("nan"), dominant_imag=float("nan"),
                rho_below_one=None, min_pivot_i_minus_gamma=float("nan"), min_pivot_i_plus_gamma=float("nan"),
                pivot_threshold=float("nan"), lambda_not_plus_one=False, lambda_not_minus_one=False,
            ),
        )


def verify_system(
    sys: SaddlePointSystem,
    shifts: list[ShiftParams],
    *,
    index: int = 0,
    seed: int = 0,
    trials: int = 10_000,
    method: Estimator = "power",
    starts: int = 20,
    steps: int = 5000,
    certify: bool = True,
) -> InstanceResult:
    validation = validate(sys, "full")
    positive = check_positive_real_part(sys.A, trials, seed)
    checks = [
        check_shifts(sys, s, method=method, starts=starts, steps=steps, seed=seed, certify=certify)
        for s in shifts
    ]
    return InstanceResult(
        index=index, seed=seed, n=sys.n, m=sys.m,
        validation=validation, positive_real_part=positive, shifts=checks,
    )


def _instance_sizes(max_size: int, seed: int) -> tuple[int, int]:
    rng = np.random.default_rng(seed)
    total = int(rng.integers(3, max_size + 1))
    m = int(rng.integers(1, total // 2 + 1))
    return total - m, m


def _sweep_instance(cfg: SweepConfig, index: int, seed: int) -> InstanceResult:
    n, m = _instance_sizes(cfg.max_size, seed)
    try:
        sys = generate_random(n, m, cfg.density, seed, rank_deficient_c=index % 3 == 2)
    except SaddlekitError as e:
        return InstanceResult(index=index, seed=seed, n=n, m=m, error=str(e))
    shifts = [ShiftParams(alpha=a, beta=b) for a in cfg.alphas for b in cfg.betas]
    result = verify_system(
        sys, shifts, index=index, seed=seed, trials=cfg.positive_real_part_trials,
        method=cfg.estimator, starts=cfg.power_starts, steps=cfg.power_steps, certify=cfg.certify,
    )
    logger.debug("[Verify] instance %d (n=%d m=%d) passed=%s", index, n, m, result.passed)
    return result


def run_sweep(cfg: SweepConfig) -> VerificationReport:
    t0 = time.perf_counter()
    seeds = np.random.default_rng(cfg.seed).integers(0, 2**31 - 1, size=cfg.instances)
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        futures = [pool.submit(_sweep_instance, cfg, i, int(s)) for i, s in enumerate(seeds)]
        instances = [f.result() for f in futures]
    report = VerificationReport(config=cfg.model_dump(), instances=instances, seconds=time.perf_counter() - t0)
    logger.info(
        "[Verify] %d instances x %d shift pairs: %d failures in %.1fs",
        cfg.instances, len(cfg.alphas) * len(cfg.betas), report.failures, report.seconds,
    )
    return report


__all__ = [
    "dense_iteration_matrix", "DominantEigenpair", "dominant_eigenpair", "spectral_radius_estimate",
    "quadratic_form", "check_positive_real_part", "EigenpairCertificate", "certify_eigenpair",
    "check_shifts", "verify_system", "run_sweep",
]
