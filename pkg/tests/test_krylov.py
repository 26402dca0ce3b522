import numpy as np
import pytest
import scipy.sparse as sp

from saddlekit.errors import ConfigError, DimensionError
from saddlekit.models.options import SolveOptions
from saddlekit.services.krylov import fgmres


def _nonincreasing(history, slack=1e-10):
    return all(b <= a * (1.0 + slack) + 1e-14 for a, b in zip(history, history[1:]))


def test_identity_converges_in_one_step(rng):
    b = rng.standard_normal(7)
    x, report = fgmres(sp.identity(7, format="csr"), b)
    assert report.converged
    assert report.outer_iterations == 1
    np.testing.assert_allclose(x, b, rtol=1e-14)


def test_three_distinct_eigenvalues_need_at_most_three_steps(rng):
    A = np.diag([1.0, 2.0, 3.0])
    b = rng.standard_normal(3)
    x, report = fgmres(A, b, opts=SolveOptions(tol=1e-12))
    assert report.converged
    assert report.outer_iterations <= 3
    np.testing.assert_allclose(x, np.linalg.solve(A, b), rtol=1e-10)


def test_history_is_nonincreasing_across_restarts(rng):
    n = 60
    A = np.eye(n) * 2.0 + rng.standard_normal((n, n)) / np.sqrt(n)
    b = rng.standard_normal(n)
    x, report = fgmres(A, b, opts=SolveOptions(tol=1e-10, restart=5, max_iters=2000))
    assert report.converged
    assert _nonincreasing(report.residual_history)
    # the reported final value is a true residual
    assert np.linalg.norm(b - A @ x) / np.linalg.norm(b) == pytest.approx(report.final_relative_residual, rel=1e-6)
    assert report.final_relative_residual < 1e-10


def test_max_iterations_gives_non_converged_report(rng):
    n = 40
    A = np.diag(np.linspace(1.0, 1e4, n))
    b = rng.standard_normal(n)
    _, report = fgmres(A, b, opts=SolveOptions(tol=1e-12, restart=3, max_iters=6))
    assert not report.converged
    assert report.outer_iterations == 6
    assert report.final_relative_residual >= 1e-12


def test_singular_operator_reports_non_convergence():
    A = np.diag([1.0, 0.0])
    _, report = fgmres(A, np.array([1.0, 1.0]), opts=SolveOptions(max_iters=50))
    assert not report.converged
    assert np.isfinite(report.final_relative_residual)


def test_exact_initial_guess_and_zero_rhs(rng):
    A = np.diag([1.0, 2.0, 3.0])
    x_star = rng.standard_normal(3)
    _, report = fgmres(A, A @ x_star, opts=SolveOptions(x0=x_star))
    assert report.converged and report.outer_iterations == 0
    x, report = fgmres(A, np.zeros(3))
    assert report.converged and not x.any()


def test_exact_preconditioner_matches_right_preconditioned_gmres(rng):
    n = 30
    A = np.eye(n) * 3.0 + rng.standard_normal((n, n)) / np.sqrt(n)
    P = np.triu(A)
    Pinv = np.linalg.inv(P)
    b = rng.standard_normal(n)
    opts = SolveOptions(tol=1e-11, restart=10)
    x_flex, rep_flex = fgmres(A, b, precond=lambda v: Pinv @ v, opts=opts)
    y, rep_right = fgmres(A @ Pinv, b, opts=opts)
    np.testing.assert_allclose(x_flex, Pinv @ y, atol=1e-10)
    assert rep_flex.outer_iterations == rep_right.outer_iterations


def test_callable_operator_and_input_checks():
    x, report = fgmres(lambda v: 2.0 * v, np.ones(4))
    assert report.converged
    np.testing.assert_allclose(x, 0.5 * np.ones(4))
    with pytest.raises(ConfigError):
        fgmres(np.eye(2), np.array([1.0, np.nan]))
    with pytest.raises(DimensionError):
        fgmres(np.eye(3), np.ones(2))
