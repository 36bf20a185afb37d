import numpy as np
import pytest
from scipy.integrate import quad

from devroye_lab.covariance import CovarianceSeries, ZERO_TAIL, geometric_series
from devroye_lab.errors import DomainError
from devroye_lab.observables import make_observable
from devroye_lab.process import generate_trajectory, make_map
from devroye_lab.spectral import (
    SpectralCurve,
    _sdf_closed_form,
    limit_spectral_distribution,
    raw_periodogram,
    sdf_uniform_grid,
    spectral_distribution,
    sup_deviation_experiment,
    trig_partial_sum_sup,
)


def test_raw_periodogram_trivials():
    traj = generate_trajectory(make_map("iid_uniform"), 16, 0, seed=1)
    const = make_observable("custom_polynomial", params=(0.4,))
    assert raw_periodogram(traj, const, 1.1, "empirical") == pytest.approx(0.0, abs=1e-28)
    one = generate_trajectory(make_map("iid_uniform"), 1, 0, seed=2)
    ident = make_observable("identity")
    vals = [raw_periodogram(one, ident, w, "exact") for w in (0.0, 1.0, 2.0)]
    x = one.points[0, 0] - 0.5
    assert np.allclose(vals, x * x)


def test_periodogram_discrete_fourier_identity():
    # y_j = cos(j w0) at a Fourier frequency: I_n(w0) = n/4
    n = 2048
    w0 = 2 * np.pi * 128 / n
    y = np.cos(np.arange(1, n + 1) * w0)
    z = np.exp(-1j * w0 * np.arange(1, n + 1)) @ y
    assert abs(z.real**2 + z.imag**2) / n == pytest.approx(n / 4, abs=1e-6)


def test_omega_domain_check():
    traj = generate_trajectory(make_map("iid_uniform"), 8, 0, seed=3)
    with pytest.raises(DomainError):
        raw_periodogram(traj, make_observable("identity"), 7.0)


def test_closed_form_matches_quadrature_of_periodogram():
    traj = generate_trajectory(make_map("iid_uniform"), 64, 0, seed=5)
    u = make_observable("identity")
    for w in (1.3, 0.37, 5.5):
        closed = spectral_distribution(traj, u, w, "empirical")
        viaquad, _ = quad(lambda s: raw_periodogram(traj, u, s, "empirical"), 0, w, limit=300)
        assert closed == pytest.approx(viaquad, abs=1e-6)


def test_sdf_endpoints():
    traj = generate_trajectory(make_map("doubling"), 100, 0, seed=6)
    u = make_observable("cosine2pi")
    assert spectral_distribution(traj, u, 0.0) == 0.0
    y = u(traj.points)
    y = y - y.mean()
    assert spectral_distribution(traj, u, 2 * np.pi) == pytest.approx(
        2 * np.pi * np.sum(y * y) / y.size, rel=1e-12
    )


def test_uniform_grid_matches_direct_evaluation_and_is_monotone():
    rng = np.random.default_rng(7)
    y = rng.normal(size=(3, 200))
    y -= y.mean(axis=1, keepdims=True)
    for N in (5, 16, 33):
        grid = sdf_uniform_grid(y, N)
        direct = _sdf_closed_form(y, 2 * np.pi * np.arange(N + 1) / N)
        assert np.allclose(grid, direct, atol=1e-10)
        assert np.all(np.diff(grid, axis=1) >= -1e-9)


def test_spectral_curve_invariants():
    omegas = np.linspace(0, 2 * np.pi, 33)
    traj = generate_trajectory(make_map("doubling"), 128, 0, seed=9)
    u = make_observable("cosine2pi")
    iv = raw_periodogram(traj, u, omegas)
    SpectralCurve(omegas, iv, "raw_I").validate()
    y = u(traj.points)
    jt = sdf_uniform_grid((y - y.mean())[None, :], 32)[0]
    SpectralCurve(omegas, jt, "J_tilde").validate()
    with pytest.raises(DomainError):
        SpectralCurve(omegas, -np.ones_like(omegas), "raw_I").validate()
    with pytest.raises(DomainError):
        SpectralCurve(omegas, -omegas, "J_n").validate()
    with pytest.raises(DomainError):
        SpectralCurve(omegas, omegas, "nope").validate()


def test_limit_distribution_cases():
    flat = CovarianceSeries(np.concatenate([[0.7], np.zeros(10)]), "analytic", ZERO_TAIL)
    for w in (0.3, 1.0, 6.0):
        assert limit_spectral_distribution(flat, w) == pytest.approx(0.7 * w)
    geo = geometric_series(1.0, 1.0, 0.5, m=48)
    ks = np.arange(1, 1_000_000)
    w = np.pi / 3
    brute = 1.0 * w + 2 * np.sum(np.sin(w * ks) / ks * 0.5**ks)
    assert limit_spectral_distribution(geo, w) == pytest.approx(brute, abs=1e-9)


def test_limit_distribution_periodic_increment():
    geo = geometric_series(0.8, 0.5, 0.4, m=48)
    for w in (0.2, 1.7, 3.0):
        lhs = limit_spectral_distribution(geo, w + 2 * np.pi) - limit_spectral_distribution(geo, w)
        assert lhs == pytest.approx(2 * np.pi * 0.8, abs=1e-9)


def test_trig_sup_small_cases():
    r1 = trig_partial_sum_sup(1, grid_size=4097)
    assert r1.value == pytest.approx(1.0, abs=1e-6)
    assert r1.omega_star == pytest.approx(np.pi / 2, abs=1e-3)
    for m in (10, 100, 1000):
        assert trig_partial_sum_sup(m, grid_size=1025).value <= 1.86


def test_sup_deviation_constant_observable_is_zero():
    const = make_observable("custom_polynomial", params=(0.25,))
    zeros = CovarianceSeries(np.zeros(8), "analytic", ZERO_TAIL)
    res = sup_deviation_experiment(
        make_map("iid_uniform"), const, [64, 128], 5, 11, series=zeros
    )
    assert all(r.e_sup2 == 0.0 for r in res.rows)


def test_sup_deviation_iid_identity_decays():
    # J(w) = w/12; the mean-square sup at n = 2^14 sits well under 1/4 of
    # the value at n = 2^8 (rate oracle run at 60 replicas)
    res = sup_deviation_experiment(
        make_map("iid_uniform"), make_observable("identity"), [2**8, 2**14], 60, 13
    )
    assert res.rows[1].e_sup2 <= res.rows[0].e_sup2 / 4.0
    assert all(r.e_sup2 <= r.e_sup2_upper for r in res.rows)
