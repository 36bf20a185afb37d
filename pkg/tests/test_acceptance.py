"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s`.  The Monte Carlo scales
and tolerances are the frozen contract of the package; calibration of the
variance constant D happens once (module fixture) and is shared by the
criteria that reference the fitted value.
"""

import hashlib
import json
import os

import numpy as np
import pytest
from scipy.integrate import quad

from devroye_lab import asclt, covariance, dimension, holder, measure, shadowing, spectral
from devroye_lab.cli import main as cli_main
from devroye_lab.measure import AtomicMeasure, EmpiricalMeasure, kantorovich_1d, make_density
from devroye_lab.observables import make_observable
from devroye_lab.process import ensemble_points, generate_trajectory, make_map
from devroye_lab.shadowing import parse_predicate

MAPS = ("doubling", "tent", "logistic", "iid_uniform", "lozi")
FUNCTIONALS = holder.FUNCTIONAL_KINDS
SEED = 20240601


def _report(criterion, name, ok, detail=""):
    print(f"\nACCEPTANCE {criterion} {name}: {'PASS' if ok else 'FAIL'} {detail}")
    return ok


@pytest.fixture(scope="module")
def calibration():
    """Criterion 1 fit: smallest D passing {mean, kantorovich} on doubling + tent."""
    res = holder.calibrate_devroye_constant(
        [make_map("doubling"), make_map("tent")],
        ["mean", "kantorovich"],
        [100, 1000],
        replicas=1000,
        master_seed=SEED,
    )
    return res


def test_criterion_1_devroye_harness(calibration):
    D = calibration.D_fit
    failures = []
    ratios = {}
    for map_id in MAPS:
        spec = make_map(map_id)
        for kind in FUNCTIONALS:
            for n in (100, 1000):
                f = holder.make_functional(kind, spec, n, SEED)
                rep = holder.estimate_variance_mc(f, spec, 1000, SEED, D=D)
                chk = holder.check_devroye(rep)
                ratios[(map_id, kind, n)] = rep.ratio
                if not chk.passed:
                    failures.append((map_id, kind, n, rep.ratio))
    ok = not failures
    _report(1, "devroye harness (5 functionals x 5 maps, 3 MC stderr slack)", ok,
            f"D_fit={D:.4f} worst_ratio={max(ratios.values()):.3f} failures={failures}")
    assert ok, failures


def test_criterion_2_covariance(calibration):
    spec = make_map("doubling")
    cos = make_observable("cosine2pi")
    traj = generate_trajectory(spec, 1_000_000 + 5, 1000, SEED)
    c1 = covariance.autocovariance(traj, cos, 1, 1_000_000)
    c2 = covariance.autocovariance(traj, cos, 2, 1_000_000)
    c5 = covariance.autocovariance(traj, cos, 5, 1_000_000)
    values_ok = abs(c1 - 0.5) <= 0.005 and abs(c2) <= 0.005 and abs(c5) <= 0.005

    D = calibration.D_fit
    bound_ok = True
    details = []
    for k, lag in ((1000, 1), (1000, 10), (10_000, 10)):
        pts = ensemble_points(spec, 1000, k + lag, 1000, SEED)
        vals = cos(pts.reshape(-1, 1)).reshape(1000, k + lag)
        chats = covariance.autocovariance_batch(vals, lag, k)
        v = float(np.var(chats, ddof=1))
        bound = covariance.covariance_variance_bound(k, lag, cos.L_u, 1.0, 1.0, D)
        details.append(f"(k={k},lag={lag}): var={v:.2e} bound={bound:.2e}")
        bound_ok &= v <= bound
    ok = values_ok and bound_ok
    _report(2, "covariance estimates and variance bound", ok,
            f"C(1)={c1:.4f} C(2)={c2:.4f} C(5)={c5:.4f}; " + "; ".join(details))
    assert values_ok, (c1, c2, c5)
    assert bound_ok, details


def test_criterion_3_spectral():
    # closed-form integrated periodogram vs quadrature on 20 random series
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(20):
        y = rng.normal(size=64)
        y -= y.mean()
        w = float(rng.uniform(0.1, 2 * np.pi))
        closed = float(spectral._sdf_closed_form(y[None, :], np.array([w]))[0, 0])
        j = np.arange(1, 65)

        def periodogram(s):
            z = np.exp(-1j * s * j) @ y
            return (z.real**2 + z.imag**2) / 64.0

        viaquad, _ = quad(periodogram, 0.0, w, limit=400)
        worst = max(worst, abs(closed - viaquad))
    quad_ok = worst <= 1e-6

    res = spectral.sup_deviation_experiment(
        make_map("doubling"), make_observable("cosine2pi"),
        [2**e for e in range(8, 15)], replicas=200, master_seed=SEED,
    )
    slope_ok = res.slope <= -0.6
    ok = quad_ok and slope_ok
    _report(3, "spectral closed form + sup-deviation rate", ok,
            f"max|closed-quad|={worst:.2e} slope={res.slope:.3f}")
    assert quad_ok, worst
    assert slope_ok, res.slope


def test_criterion_4_trig_lemma():
    res = spectral.trig_partial_sum_sup(100_000, grid_size=2049)
    in_band = 1.84 <= res.value <= 1.86
    near_frozen = abs(res.value - 1.8519) <= 1e-3
    ok = in_band and near_frozen
    _report(4, "trig partial-sum supremum", ok,
            f"sup={res.value:.6f} at m={res.m_star} omega={res.omega_star:.3g}")
    assert ok, res


def test_criterion_5_correlation_dimension():
    pts1 = ensemble_points(make_map("iid_uniform"), 1, 10_000, 1, SEED)[0]
    fit1 = dimension.estimate_correlation_dimension(
        pts1, np.geomspace(0.01, 0.1, 8), fit_flagged=True
    )
    pts2 = ensemble_points(make_map("iid_uniform", dim=2), 1, 10_000, 1, SEED)[0]
    fit2 = dimension.estimate_correlation_dimension(
        pts2, np.geomspace(0.02, 0.1, 8), fit_flagged=True
    )
    slopes_ok = abs(fit1.slope - 1.0) <= 0.1 and abs(fit2.slope - 2.0) <= 0.15

    # variance scaling var(K_phi0) <= C/(eps^2 n): fit C on the n=1000 row,
    # then every cell must pass within 3 MC standard errors
    eps_grid = np.array([0.05, 0.1, 0.2])
    spec = make_map("doubling")
    table = {}
    for n in (500, 1000):
        pts = ensemble_points(spec, 500, n, 1000, SEED)
        vals = np.empty((500, 3))
        for r in range(500):
            _, _, k_ph = dimension.correlation_profile(pts[r], eps_grid)
            vals[r] = k_ph
        for i, e in enumerate(eps_grid):
            v, se = measure._variance_with_stderr(vals[:, i])
            table[(n, float(e))] = (v, se)
    c_fit = max((v + 3 * se) * e * e * 1000 for (n, e), (v, se) in table.items() if n == 1000)
    scaling_ok = all(
        (v - 3 * se) * e * e * n <= c_fit for (n, e), (v, se) in table.items()
    )
    ok = slopes_ok and scaling_ok
    _report(5, "correlation dimension slopes + variance scaling", ok,
            f"slope1d={fit1.slope:.3f} slope2d={fit2.slope:.3f} C_fit={c_fit:.2e}")
    assert slopes_ok, (fit1.slope, fit2.slope)
    assert scaling_ok, table


def test_criterion_6_kantorovich(calibration):
    exact1 = kantorovich_1d(AtomicMeasure([0.0]), AtomicMeasure([1.0]))
    exact2 = kantorovich_1d(EmpiricalMeasure([0.0, 1.0]), EmpiricalMeasure([0.5, 0.5]))
    hand_ok = abs(exact1 - 1.0) <= 1e-12 and abs(exact2 - 0.5) <= 1e-12

    D = calibration.D_fit
    rows, _ = measure.kantorovich_convergence(
        make_map("doubling"), [100, 1000, 10_000], 1000, SEED, D=D
    )
    var_ok = all(r.kappa_var - 3 * r.kappa_var_stderr <= r.var_bound for r in rows)
    ok = hand_ok and var_ok
    detail = " ".join(f"n={r.n}: nv={r.n * r.kappa_var:.3f}" for r in rows)
    _report(6, "kantorovich hand cases + variance bound D_fit/n", ok,
            f"D_fit={D:.4f} {detail}")
    assert hand_ok, (exact1, exact2)
    assert var_ok, rows


def test_criterion_7_kde_and_besov():
    dens = make_density("analytic_logistic4")
    kernel = measure.make_kernel("triangle")
    errors = []
    for n in (1000, 10_000, 100_000):
        alpha = n ** (-0.25)
        traj = generate_trajectory(make_map("logistic"), n, 1000, SEED)
        grid = np.linspace(-2 * alpha, 1 + 2 * alpha, 2001)
        h = measure.kde(traj.x1, kernel, alpha, grid)
        errors.append(measure.kde_l1_error(h, grid, dens))
    kde_ok = errors[0] > errors[1] > errors[2]

    tau_log, _ = measure.fit_besov_exponent(dens, np.geomspace(1e-4, 1e-2, 9))
    tau_uni, _ = measure.fit_besov_exponent(
        make_density("analytic_uniform"), np.geomspace(1e-4, 1e-2, 9)
    )
    besov_ok = abs(tau_log - 0.5) <= 0.05 and abs(tau_uni - 1.0) <= 0.02
    ok = kde_ok and besov_ok
    _report(7, "kde L1 decrease + besov exponents", ok,
            f"L1={['%.3f' % e for e in errors]} tau_log={tau_log:.3f} tau_uni={tau_uni:.3f}")
    assert kde_ok, errors
    assert besov_ok, (tau_log, tau_uni)


@pytest.fixture(scope="module")
def shadow_runs(calibration):
    return shadowing.shadow_experiment(
        make_map("doubling"), parse_predicate("x1<=0.5"),
        [100, 1000], bank_size=1000, queries=500,
        t_grid=[0.5, 1.0, 2.0], master_seed=SEED, D=calibration.D_fit,
    )


def test_criterion_8_shadowing_tail_bounds(shadow_runs, calibration):
    ok = all(r.passed for r in shadow_runs.tail_rows)
    worst = max(r.empirical_p - r.tail_bound for r in shadow_runs.tail_rows)
    _report(8, "shadowing tail bounds (t in {0.5,1,2}, n in {1e2,1e3})", ok,
            f"D_fit={calibration.D_fit:.4f} worst_excess={worst:.4f}")
    assert ok, shadow_runs.tail_rows


def test_criterion_8_shadowing_remark_moment_bound(shadow_runs):
    ok = all(r.passed for r in shadow_runs.moment_rows)
    detail = " ".join(f"n={r.n}: EZ2={r.mean_z2:.4f} bound={r.bound:.4f}"
                      for r in shadow_runs.moment_rows)
    _report(8, "shadowing second-moment bound", ok, detail)
    assert ok, detail


def test_criterion_8_shadowing_invariants(shadow_runs):
    spec = make_map("doubling")
    bank = shadowing.build_bank(spec, parse_predicate("x1<=0.5"), 200, 100, SEED)
    smaller = shadowing.TrajectoryBank(bank.points[:60], spec, bank.predicate, bank.p_hat)
    ok = True
    for seed in range(5):
        q = generate_trajectory(spec, 100, 1000, seed=1000 + seed)
        z_big = shadowing.shadow_distance(q, bank)[0]
        z_small = shadowing.shadow_distance(q, smaller)[0]
        ok &= z_big <= z_small
        for eps in (0.05, 0.2):
            zp = shadowing.mismatch_count(q, bank, eps)[0]
            ok &= z_big >= eps * zp - 1e-15
    _report(8, "shadowing invariants (bank monotonicity, Z >= eps Z')", ok)
    assert ok


@pytest.fixture(scope="module")
def asclt_run():
    return asclt.asclt_experiment(
        make_map("doubling"), make_observable("cosine2pi"),
        n_max=1_000_000, rho=0.5, replicas=50, master_seed=SEED, sigma2=0.5,
    )


def test_criterion_9_asclt_single_atom_sanity():
    val = asclt.kappa_to_gaussian(AtomicMeasure([0.0]), 1.0)
    ok = abs(val - 0.79788) <= 1e-4
    _report(9, "asclt single-atom sanity", ok, f"kappa={val:.6f}")
    assert ok, val


def test_criterion_9_asclt_monotone_medians(asclt_run):
    meds = [r.kappa_median for r in asclt_run.rows]
    ok = all(b < a for a, b in zip(meds, meds[1:]))
    _report(9, "asclt strictly decreasing checkpoint medians", ok,
            " ".join(f"{r.n}:{m:.4f}" for r, m in zip(asclt_run.rows, meds)))
    assert ok, meds


def test_criterion_9_asclt_final_median(asclt_run):
    final = asclt_run.rows[-1].kappa_median
    ok = final < 0.1
    _report(9, "asclt final median < 0.1 at n = 1e6", ok, f"median={final:.4f}")
    assert ok, final


# ---------------------------------------------------------------------------
# criterion 10: byte-identical reruns from manifests at 1 and 8 threads


def _digest(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


_CLI_RUNS = {
    "calibrate-D": ["calibrate-D", "--maps", "doubling,tent", "--functionals",
                    "mean,kantorovich", "--n-grid", "50", "--replicas", "60",
                    "--seed", "1"],
    "covariance": ["covariance", "--map", "doubling", "--obs", "cosine2pi",
                   "--k", "5000", "--maxlag", "5", "--seed", "2"],
    "spectrum": ["spectrum", "--map", "doubling", "--obs", "cosine2pi", "--n", "1024",
                 "--grid", "32", "--replicas", "6", "--seed", "3"],
    "spectrum-rate": ["spectrum-rate", "--map", "doubling", "--obs", "cosine2pi",
                      "--n-grid", "256,512", "--replicas", "20", "--seed", "4"],
    "trig-check": ["trig-check", "--m-max", "3000", "--grid", "1025"],
    "corrdim": ["corrdim", "--map", "iid_uniform", "--n", "2000", "--eps-min", "0.02",
                "--eps-max", "0.2", "--eps-count", "6", "--seed", "5"],
    "kantorovich": ["kantorovich", "--map", "doubling", "--n-grid", "100,200",
                    "--replicas", "60", "--ref-n", "8000", "--seed", "6"],
    "kde": ["kde", "--map", "logistic", "--n", "5000", "--bandwidth-rule", "n14",
            "--kernel", "triangle", "--grid", "501", "--seed", "7"],
    "besov": ["besov", "--density", "analytic_logistic4", "--delta-min", "1e-4",
              "--delta-max", "1e-2", "--count", "5"],
    "shadow": ["shadow", "--map", "doubling", "--predicate", "x1<=0.5", "--n", "50,100",
               "--bank", "200", "--queries", "100", "--eps", "0.2", "--seed", "8",
               "--D", "1.0"],
    "asclt": ["asclt", "--map", "doubling", "--obs", "cosine2pi", "--n-max", "2000",
              "--replicas", "10", "--seed", "9"],
    "devroye-check": ["devroye-check", "--map", "iid_uniform", "--functional", "mean",
                      "--n", "50", "--replicas", "100", "--D", "1.0", "--seed", "10"],
    "simulate": ["simulate", "--map", "lozi", "--n", "200", "--seed", "11"],
}


def test_criterion_10_reproducibility(tmp_path):
    old = os.environ.get("DEVROYE_LAB_THREADS")
    mismatches = []
    try:
        for name, argv in _CLI_RUNS.items():
            ext = ".json" if name in ("devroye-check", "calibrate-D", "trig-check") else ".csv"
            first = str(tmp_path / f"{name}-a{ext}")
            os.environ["DEVROYE_LAB_THREADS"] = "1"
            rc = cli_main(argv + ["--out", first])
            assert rc in (0, 1), (name, rc)
            manifest_path = first + ".manifest.json"
            base = json.load(open(manifest_path))["outputs"]
            os.environ["DEVROYE_LAB_THREADS"] = "8"
            second = str(tmp_path / f"{name}-b{ext}")
            rc = cli_main([name, "--config", manifest_path, "--out", second])
            assert rc in (0, 1), (name, rc)
            redo = json.load(open(second + ".manifest.json"))["outputs"]
            a = {os.path.basename(k).replace(f"{name}-a", ""): v for k, v in base.items()}
            b = {os.path.basename(k).replace(f"{name}-b", ""): v for k, v in redo.items()}
            if a != b:
                mismatches.append(name)
    finally:
        if old is None:
            os.environ.pop("DEVROYE_LAB_THREADS", None)
        else:
            os.environ["DEVROYE_LAB_THREADS"] = old
    ok = not mismatches
    _report(10, "manifest reruns byte-identical on 1 and 8 threads", ok, str(mismatches))
    assert ok, mismatches
