import numpy as np
import pytest

from qfbm.circulant import (
    build_ce_plan,
    ce_transform,
    increments_to_path,
    sample_ce_increments,
    sample_ce_pair,
)
from qfbm.errors import DomainError
from qfbm.kernel import increment_cov


def test_plan_shape_and_determinism():
    plan1 = build_ce_plan(33, 0.7, 0.1)
    plan2 = build_ce_plan(33, 0.7, 0.1)
    assert plan1.lam.shape == (64,)
    assert np.array_equal(plan1.lam, plan2.lam)


def test_brownian_plan_is_identity_times_h():
    for N, h in ((64, 1 / 64), (100, 0.3)):
        plan = build_ce_plan(N, 0.5, h)
        assert plan.lam == pytest.approx(np.full(2 * N - 2, h), rel=1e-12)
        assert plan.clamped == 0


def test_two_point_plan_by_hand():
    # first row [1, 2**(2H-1) - 1]; 2-point DFT gives {2**(2H-1), 2 - 2**(2H-1)}
    for H in (0.2, 0.6, 0.9):
        plan = build_ce_plan(2, H, 1.0)
        expected = np.array([2.0 ** (2 * H - 1), 2.0 - 2.0 ** (2 * H - 1)])
        assert plan.lam == pytest.approx(expected, rel=1e-13)


def test_eigenvalues_match_dense_circulant():
    N, H, h = 64, 0.8, 1 / 64
    plan = build_ce_plan(N, H, h)
    assert np.all(plan.lam >= 0.0)
    gamma = increment_cov(np.arange(N), h, H)
    row = np.concatenate([gamma, gamma[N - 2:0:-1]])
    n = 2 * N - 2
    dense = row[(np.arange(n)[None, :] - np.arange(n)[:, None]) % n]
    eigs = np.sort(np.linalg.eigvalsh(dense))
    assert np.sort(plan.lam) == pytest.approx(eigs, rel=1e-10, abs=1e-14)


def test_zero_noise_gives_zero_paths():
    plan = build_ce_plan(16, 0.8, 1.0)
    a, b = sample_ce_pair(plan, np.zeros((30, 2)))
    assert not a.any() and not b.any()


def test_noise_shape_validation():
    plan = build_ce_plan(16, 0.8, 1.0)
    with pytest.raises(DomainError):
        sample_ce_pair(plan, np.zeros((29, 2)))
    with pytest.raises(DomainError):
        sample_ce_pair(plan, np.zeros(60))


def test_invalid_parameters():
    with pytest.raises(DomainError):
        build_ce_plan(1, 0.5, 1.0)
    with pytest.raises(DomainError):
        build_ce_plan(8, 1.2, 1.0)
    with pytest.raises(DomainError):
        build_ce_plan(8, 0.5, 0.0)


@pytest.mark.parametrize("H", [0.5, 0.8])
def test_monte_carlo_lag_covariance(H):
    N, h, n_pairs = 16, 1 / 16, 15_000
    plan = build_ce_plan(N, H, h)
    rng = np.random.default_rng(1234)
    incr = sample_ce_increments(plan, rng, n_pairs)
    M = incr.shape[0]
    for k in range(5):
        prods = incr[:, : N - k] * incr[:, k:]
        per_sample = prods.mean(axis=1)
        est = per_sample.mean()
        se = per_sample.std(ddof=1) / np.sqrt(M)
        assert abs(est - increment_cov(k, h, H)) < 4 * se


@pytest.mark.parametrize("H", [0.2, 0.9])
def test_monte_carlo_entrywise_covariance(H):
    N, h, n_pairs = 16, 1 / 16, 20_000
    plan = build_ce_plan(N, H, h)
    rng = np.random.default_rng(5150)
    incr = sample_ce_increments(plan, rng, n_pairs)
    M = incr.shape[0]
    emp = incr.T @ incr / M
    sq = incr * incr
    se = np.sqrt((sq.T @ sq / M - emp**2) / M)
    idx = np.abs(np.arange(N)[:, None] - np.arange(N)[None, :])
    theo = increment_cov(np.arange(N), h, H)[idx]
    assert float(np.max(np.abs(emp - theo) / se)) < 4.0


def test_pair_independence():
    N, H, h, M = 16, 0.8, 1 / 16, 20_000
    plan = build_ce_plan(N, H, h)
    rng = np.random.default_rng(99)
    cross = np.empty(M)
    z = rng.standard_normal((M, 2 * N - 2, 2))
    Z = ce_transform(plan, z)
    re, im = Z.real[:, :N], Z.imag[:, :N]
    cross = (re * im).mean(axis=1)
    se = cross.std(ddof=1) / np.sqrt(M)
    assert abs(cross.mean()) < 4 * se


def test_increments_to_path():
    assert np.array_equal(increments_to_path([1.0, 1.0, 1.0]), [0.0, 1.0, 2.0, 3.0])
    assert np.array_equal(increments_to_path([2.5, -2.5]), [0.0, 2.5, 0.0])
    with pytest.raises(DomainError):
        increments_to_path([])
    with pytest.raises(DomainError):
        increments_to_path([np.nan, 1.0])
