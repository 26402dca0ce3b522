import numpy as np
import pytest

from saddlekit.errors import NotPositiveDefiniteError
from saddlekit.models.options import InnerSolveConfig, ShiftParams
from saddlekit.services.preconditioners import (
    apply_mgss,
    apply_rmgss,
    assemble_rmgss_dense,
    assemble_splitting_dense,
    build_mgss,
    build_rmgss,
)
from saddlekit.services.problem_gen import generate_random
from saddlekit.services.saddle_system import SaddlePointSystem, assemble_dense
from saddlekit.services.sparse_core import SparseMatrix

TIGHT = InnerSolveConfig(restart=100, reduction=1e-12, max_iters=4000)
SHIFTS = [1e-3, 1e-2, 0.1, 1.0, 10.0]


def _instance(seed, max_size=300):
    rng = np.random.default_rng(seed)
    total = int(rng.integers(3, max_size + 1))
    m = int(rng.integers(1, total // 2 + 1))
    sys = generate_random(total - m, m, min(1.0, 6.0 / total + 0.05), seed=seed, rank_deficient_c=seed % 3 == 0)
    params = ShiftParams(alpha=float(rng.choice(SHIFTS)), beta=float(rng.choice(SHIFTS)))
    return sys, params, rng


def _one_by_one(c: float) -> SaddlePointSystem:
    return SaddlePointSystem(
        A=SparseMatrix.from_dense([[2.0]]),
        B=SparseMatrix.from_dense([[1.0]]),
        C=SparseMatrix.from_dense([[c]]),
        f=np.zeros(1),
        g=np.zeros(1),
    )


def test_build_factors_shifted_c():
    P = build_mgss(_one_by_one(0.0), ShiftParams(alpha=1.0, beta=1.0))
    np.testing.assert_allclose(P.factor.lower, [[1.0]])
    P = build_mgss(_one_by_one(1.0), ShiftParams(alpha=1.0, beta=1.0))
    np.testing.assert_allclose(P.factor.lower, [[np.sqrt(2.0)]])
    assert P.setup_seconds >= 0.0


def test_build_rejects_c_with_negative_eigenvalue():
    with pytest.raises(NotPositiveDefiniteError, match="not positive semidefinite"):
        build_mgss(_one_by_one(-2.0), ShiftParams(alpha=1.0, beta=1.0))


def test_mgss_hand_case(hand_system):
    P = build_mgss(hand_system, ShiftParams(alpha=1.0, beta=1.0), TIGHT)
    z = apply_mgss(P, np.array([1.0, 1.0]))
    np.testing.assert_allclose(z, [0.0, 2.0], atol=1e-14)
    assert np.array_equal(apply_mgss(P, np.zeros(2)), np.zeros(2))


def test_rmgss_hand_case(hand_system):
    P = build_rmgss(hand_system, ShiftParams(alpha=1.0, beta=1.0), TIGHT)
    z = apply_rmgss(P, np.array([1.0, 1.0]))
    np.testing.assert_allclose(z, [0.0, 1.0], atol=1e-14)
    assert np.array_equal(apply_rmgss(P, np.zeros(2)), np.zeros(2))


def test_splitting_hand_case(hand_system):
    M, N = assemble_splitting_dense(hand_system, ShiftParams(alpha=1.0, beta=1.0))
    np.testing.assert_allclose(M, 0.5 * np.array([[3.0, 1.0], [-1.0, 1.0]]))
    np.testing.assert_allclose(N, 0.5 * np.array([[-1.0, -1.0], [1.0, 1.0]]))


def test_splitting_shifts_enter_linearly(hand_system):
    M1, _ = assemble_splitting_dense(hand_system, ShiftParams(alpha=1.0, beta=1.0))
    M2, _ = assemble_splitting_dense(hand_system, ShiftParams(alpha=3.0, beta=5.0))
    np.testing.assert_allclose(M2 - M1, np.diag([1.0, 2.0]))


def test_splitting_identity_on_random_instances():
    for seed in range(50):
        sys, params, _ = _instance(seed, max_size=80)
        M, N = assemble_splitting_dense(sys, params)
        K = assemble_dense(sys)
        scale = max(1.0, params.alpha, params.beta, float(np.abs(K).max()))
        np.testing.assert_allclose(M - N, K, rtol=0, atol=1e-14 * scale)


def test_mgss_apply_matches_dense_oracle():
    for seed in range(50):
        sys, params, rng = _instance(seed)
        P = build_mgss(sys, params, TIGHT)
        M, _ = assemble_splitting_dense(sys, params)
        r = rng.standard_normal(sys.size)
        z = apply_mgss(P, r)
        assert np.linalg.norm(M @ z - r) / np.linalg.norm(r) <= 1e-9, seed


def test_rmgss_apply_matches_dense_oracle():
    for seed in range(20):
        sys, params, rng = _instance(seed)
        P = build_rmgss(sys, params, TIGHT)
        Pd = assemble_rmgss_dense(sys, params)
        r = rng.standard_normal(sys.size)
        z = apply_rmgss(P, r)
        assert np.linalg.norm(Pd @ z - r) / np.linalg.norm(r) <= 1e-9, seed


@pytest.mark.parametrize("build, assemble", [
    (build_mgss, lambda sys, params: assemble_splitting_dense(sys, params)[0]),
    (build_rmgss, assemble_rmgss_dense),
])
def test_apply_residual_is_relative_to_r_for_small_beta(build, assemble):
    for seed in range(10):
        sys, _, rng = _instance(seed, max_size=150)
        params = ShiftParams(alpha=float(rng.choice(SHIFTS)), beta=1e-3)
        P = build(sys, params, TIGHT)
        r = rng.standard_normal(sys.size)
        z = P(r)
        assert np.linalg.norm(assemble(sys, params) @ z - r) / np.linalg.norm(r) <= 1e-9, seed


def test_counters_are_monotone_and_capped_applies_are_not_errors(rng):
    sys = generate_random(60, 20, 0.2, seed=2)
    P = build_mgss(sys, ShiftParams(alpha=0.01, beta=0.001), InnerSolveConfig(restart=2, reduction=1e-10, max_iters=2))
    seen = []
    for _ in range(3):
        z = P(rng.standard_normal(sys.size))
        assert np.all(np.isfinite(z))
        seen.append(P.inner_iterations)
    assert seen == sorted(seen)
    assert P.applies == 3
    assert P.inner_capped == 3
    assert P.inner_iterations == 6
