import numpy as np
import pytest

from devroye_lab.covariance import (
    CovarianceSeries,
    ZERO_TAIL,
    analytic_series,
    autocovariance,
    check_nuage,
    covariance_variance_bound,
    delta_n,
    empirical_series,
    geometric_series,
    sigma_squared,
    sigma_squared_for,
)
from devroye_lab.errors import DomainError, InsufficientDataError, NonSummableError
from devroye_lab.observables import Observable, make_observable
from devroye_lab.process import generate_trajectory, make_map


@pytest.fixture(scope="module")
def doubling_orbit():
    return generate_trajectory(make_map("doubling"), 205_000, 1000, seed=4)


def test_constant_observable_gives_zero(doubling_orbit):
    const = make_observable("custom_polynomial", params=(0.7,))
    for lag in (1, 2, 5):
        assert autocovariance(doubling_orbit, const, lag, 1000) == pytest.approx(0.0, abs=1e-14)


def test_doubling_cosine_covariances(doubling_orbit):
    # Fourier orthogonality under Lebesgue: E cos^2 = 1/2, higher lags vanish
    cos = make_observable("cosine2pi")
    assert autocovariance(doubling_orbit, cos, 1, 200_000) == pytest.approx(0.5, abs=0.01)
    assert autocovariance(doubling_orbit, cos, 2, 200_000) == pytest.approx(0.0, abs=0.01)


def test_iid_identity_covariances():
    traj = generate_trajectory(make_map("iid_uniform"), 201_000, 10, seed=6)
    ident = make_observable("identity")
    assert autocovariance(traj, ident, 1, 200_000) == pytest.approx(1.0 / 12.0, abs=0.003)
    assert autocovariance(traj, ident, 3, 200_000) == pytest.approx(0.0, abs=0.003)


def test_window_bounds_error(doubling_orbit):
    cos = make_observable("cosine2pi")
    with pytest.raises(DomainError):
        autocovariance(doubling_orbit, cos, 10, doubling_orbit.n - 5)


def test_shift_invariance_and_quadratic_scaling(doubling_orbit):
    base = make_observable("identity")
    shifted = Observable("identity", 1.0, 1.0, (), 1.0, shift=-2.5)  # u + 2.5
    c0 = autocovariance(doubling_orbit, base, 2, 50_000)
    c1 = autocovariance(doubling_orbit, shifted, 2, 50_000)
    # the estimator centers with the head mean only, so a shift c moves it
    # by c (m_lagged - m_head), bounded by |c| (lag-1) sup|u| / window
    assert c1 == pytest.approx(c0, abs=3 * 2.5 * 1.0 / 50_000)
    scaled = make_observable("custom_polynomial", params=(0.0, 3.0))  # u = 3x
    c3 = autocovariance(doubling_orbit, scaled, 2, 50_000)
    assert c3 == pytest.approx(9.0 * c0, rel=1e-9)


def test_variance_bound_formula():
    assert covariance_variance_bound(100, 100, 1, 1, 1, 1) == pytest.approx(0.3201)
    assert covariance_variance_bound(100, 100, 0, 1, 1, 1) == 0.0
    b1 = covariance_variance_bound(1000, 10, 2.0, 1.0, 1.0, 0.5)
    b2 = covariance_variance_bound(2000, 10, 2.0, 1.0, 1.0, 0.5)
    assert b2 < b1  # doubling the window shrinks the bound


def test_delta_n_trivial_cases():
    iid = CovarianceSeries(np.array([0.3]), "analytic", ZERO_TAIL)
    for n in (1, 2, 10):
        assert delta_n(iid, n) == 0.0
    c = 0.25
    single = CovarianceSeries(np.array([1.0, c]), "analytic", ZERO_TAIL)
    assert delta_n(single, 1) == pytest.approx(2 * c)
    for n in (2, 5, 50):
        assert delta_n(single, n) == pytest.approx(2 * c / n)


def test_delta_n_geometric_against_brute_force():
    # C(l+1) = r^l: brute-force partial sum with 1e6 terms
    r = 0.5
    series = geometric_series(1.0, 1.0, r, m=48)
    ks = np.arange(1, 1_000_000)
    cs = r**ks
    for n in (1, 3, 17):
        first = (2.0 / n) * cs[: n - 1].sum() if n > 1 else 0.0
        second = 2.0 * np.sum(cs[n - 1 :] / ks[n - 1 :])
        assert delta_n(series, n) == pytest.approx(first + second, abs=1e-10)


def test_delta_n_nonincreasing_for_catalog_series():
    series = analytic_series(make_map("doubling"), make_observable("identity"))
    vals = [delta_n(series, n) for n in range(1, 40)]
    assert np.all(np.diff(vals) <= 1e-15)


def test_delta_n_requires_tail_model():
    bare = CovarianceSeries(np.array([1.0, 0.5, 0.2]), "empirical", None)
    with pytest.raises(InsufficientDataError):
        delta_n(bare, 2)


def test_sigma_squared_cases():
    iid = CovarianceSeries(np.concatenate([[1.0 / 12.0], np.zeros(19)]), "analytic", ZERO_TAIL)
    assert sigma_squared(iid).value == pytest.approx(1.0 / 12.0)
    zero = CovarianceSeries(np.zeros(20), "analytic", ZERO_TAIL)
    assert sigma_squared(zero).value == 0.0
    diverging = CovarianceSeries(np.full(50, 0.2), "empirical", None)
    with pytest.raises(NonSummableError):
        sigma_squared(diverging)


def test_sigma_squared_doubling_cosine():
    # noise of the lag sum is ~2 sqrt(budget) sd(Chat); size the window so
    # that sits well inside the 0.01 tolerance
    traj = generate_trajectory(make_map("doubling"), 620_000, 1000, seed=8)
    cos = make_observable("cosine2pi")
    series = empirical_series(traj, cos, 20, window=600_000)
    assert sigma_squared(series).value == pytest.approx(0.5, abs=0.01)
    assert sigma_squared_for(make_map("doubling"), cos).value == 0.5  # analytic path


def test_check_nuage_constant_family():
    const = make_observable("custom_polynomial", params=(1.0,))
    report = check_nuage(make_map("iid_uniform"), 1.0, [const], lag_budget=10, orbit_n=20_000)
    assert report.c_eta_hat == 0.0


def test_check_nuage_iid_identity_ratio():
    ident = make_observable("identity")
    report = check_nuage(make_map("iid_uniform"), 1.0, [ident], lag_budget=30, orbit_n=400_000)
    assert report.c_eta_hat == pytest.approx(1.0 / 12.0, abs=0.01)


def test_check_nuage_trig_family_reports_finite_ratio():
    rng = np.random.default_rng(5)
    family = []
    for _ in range(5):
        coeffs = rng.normal(size=4) / 4.0
        family.append(make_observable("custom_polynomial", params=tuple(coeffs)))
    report = check_nuage(make_map("doubling"), 1.0, family, lag_budget=25, orbit_n=100_000)
    assert np.isfinite(report.c_eta_hat) and report.c_eta_hat >= 0.0
    assert len(report.rows) == 5
