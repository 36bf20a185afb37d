import numpy as np
import pytest

from devroye_lab.dimension import (
    correlation_profile,
    correlation_sum_heaviside,
    correlation_sum_smoothed,
    estimate_correlation_dimension,
    sample_size_heuristic,
)
from devroye_lab.errors import DomainError, InsufficientScalesError
from devroye_lab.process import ensemble_points, make_map


def test_two_point_hand_cases():
    same = np.array([[0.3], [0.3]])
    assert correlation_sum_heaviside(same, 0.5).value == pytest.approx(0.5)
    assert correlation_sum_smoothed(same, 0.5).value == pytest.approx(0.5)  # phi0(1) = 1
    apart = np.array([[0.0], [1.0]])
    assert correlation_sum_heaviside(apart, 0.5).value == 0.0


def test_heaviside_closed_convention_counts_ties():
    pts = np.array([[0.0], [1.0]])
    assert correlation_sum_heaviside(pts, 1.0).value == pytest.approx(0.5)


def test_saturation_at_large_epsilon():
    pts = np.linspace(0, 1, 50)[:, None]
    assert correlation_sum_heaviside(pts, 2.5).value == pytest.approx(49 / 50)


def test_iid_uniform_analytic_value():
    # integral of m(B(x, eps) cap [0,1]) dx = 2 eps - eps^2
    pts = ensemble_points(make_map("iid_uniform"), 1, 10_000, 1, 7)[0]
    val = correlation_sum_heaviside(pts, 0.1).value
    assert val == pytest.approx(0.19, abs=0.005)
    smoothed = correlation_sum_smoothed(pts, 0.1).value
    lo = 2 * 0.05 - 0.05**2
    hi = 2 * 0.2 - 0.2**2
    assert lo <= smoothed <= hi


def test_sandwich_on_random_point_sets():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = rng.integers(2, 40)
        pts = rng.random((n, rng.integers(1, 3)))
        eps = float(rng.uniform(0.01, 1.0))
        half = correlation_sum_heaviside(pts, eps / 2).value
        mid = correlation_sum_smoothed(pts, eps).value
        twice = correlation_sum_heaviside(pts, 2 * eps).value
        assert half <= mid + 1e-15 and mid <= twice + 1e-15


def test_monotone_in_epsilon():
    pts = ensemble_points(make_map("doubling"), 1, 800, 100, 5)[0]
    eps, k_th, k_ph = correlation_profile(pts, np.geomspace(0.01, 0.5, 10))
    assert np.all(np.diff(k_th) >= 0)
    assert np.all(np.diff(k_ph) >= 0)


def test_dimension_fit_1d_uniform():
    pts = ensemble_points(make_map("iid_uniform"), 1, 10_000, 1, 11)[0]
    fit = estimate_correlation_dimension(pts, np.geomspace(0.01, 0.1, 8), fit_flagged=True)
    assert fit.slope == pytest.approx(1.0, abs=0.1)


def test_identical_points_slope_zero():
    pts = np.full((200, 1), 0.42)
    fit = estimate_correlation_dimension(pts, np.geomspace(0.01, 0.1, 6), fit_flagged=True)
    assert fit.slope == pytest.approx(0.0, abs=1e-12)


def test_flagging_and_insufficient_scales():
    pts = ensemble_points(make_map("iid_uniform"), 1, 500, 1, 13)[0]
    # at n = 500 with d_c_prior = 1, eta = 1 the heuristic needs eps >= 500^(-1/4)
    with pytest.raises(InsufficientScalesError):
        estimate_correlation_dimension(pts, np.geomspace(0.01, 0.1, 6))
    fit = estimate_correlation_dimension(pts, np.geomspace(0.01, 0.1, 6), fit_flagged=True)
    assert fit.flagged.all()
    assert sample_size_heuristic(0.1, 1.0, 1.0) == pytest.approx(1e4)


def test_domain_errors():
    with pytest.raises(DomainError):
        correlation_sum_heaviside(np.array([[0.1]]), 0.5)
    with pytest.raises(DomainError):
        correlation_sum_heaviside(np.array([[0.1], [0.2]]), 0.0)
    with pytest.raises(DomainError):
        estimate_correlation_dimension(np.random.rand(50, 1), [0.1, 0.2, 0.3])


def test_pair_subsampling_agrees_with_exact(monkeypatch):
    import devroye_lab.dimension as dim

    pts = ensemble_points(make_map("iid_uniform"), 1, 4000, 1, 3)[0]
    exact = correlation_sum_smoothed(pts, 0.1)
    monkeypatch.setattr(dim, "MAX_EXACT_POINTS", 1000)
    sampled = correlation_sum_smoothed(pts, 0.1, seed=5)
    assert sampled.stderr is not None
    assert abs(sampled.value - exact.value) <= 4 * sampled.stderr
    # sampled path still satisfies the sandwich (same pairs for all kernels)
    half = correlation_sum_heaviside(pts, 0.05, seed=5).value
    twice = correlation_sum_heaviside(pts, 0.2, seed=5).value
    assert half <= sampled.value <= twice
