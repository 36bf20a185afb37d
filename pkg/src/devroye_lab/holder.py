"""Separately Holder functionals and the variance-bound harness.

A functional K of n sample points is separately eta-Holder with
per-coordinate coefficients L_j when perturbing coordinate j alone moves
K by at most L_j ||dx_j||^eta.  The variance inequality under test is

    var(K) <= D * sum_j L_j^2

with a constant D that the harness treats as a falsifiable empirical
object: a calibration pass fits the smallest D making the training
functionals pass, validation re-checks everything else against it.

Catalog coefficients (eta = 1):
    mean             L_j = L_u / n
    kantorovich      L_j = 1 / n            (1-Lipschitz test functions)
    cov_product      L_j = 4 L_u^2 A / k    (product estimator, window k)
    corr_phi0        L_j = 2 (n-1) / (n^2 eps)
    asclt_kn         L_q = (L_u / D_n) sum_(j>=q) j^(-3/2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from .asclt import kappa_to_gaussian, weighted_empirical
from .covariance import autocovariance_batch, sigma_squared_for
from .dimension import correlation_sum_smoothed
from .errors import DomainError, ParameterError
from .measure import EmpiricalMeasure, _variance_with_stderr, kantorovich_1d
from .observables import Observable, make_observable, mean_of
from .parallel import map_chunks
from .process import MapSpec, ensemble_points, generate_trajectory
from .rng import TAG_PROBE, TAG_REFERENCE, derive_seed, uniform_at

FUNCTIONAL_KINDS = ("mean", "kantorovich", "cov_product", "corr_phi0", "asclt_kn")


@dataclass(frozen=True)
class SeparatelyHolderFunctional:
    name: str
    arity: int
    eta: float
    evaluate: object  # callable: points (arity, dim) -> float
    lj: np.ndarray | None  # closed-form coefficients; None for custom functionals
    meta: dict

    def __call__(self, points: np.ndarray) -> float:
        return self.evaluate(points)


def devroye_bound(L, D: float) -> float:
    """D * sum of squared per-coordinate coefficients (empty sum is 0)."""
    L = np.asarray(L, dtype=float)
    if L.size and L.min() < 0:
        raise DomainError("Holder coefficients must be nonnegative")
    return float(D * np.sum(L * L))


def make_functional(
    kind: str,
    map_spec: MapSpec,
    n: int,
    master_seed: int = 0,
    eps: float | None = None,
    lag: int = 2,
    sigma2: float | None = None,
    reference_factor: int = 100,
) -> SeparatelyHolderFunctional:
    """Catalog functional of arity n adapted to the given map."""
    if n < 2:
        raise DomainError(f"functional arity must be >= 2, got {n}")
    A = map_spec.bound_A
    if kind == "mean":
        u = make_observable("identity", bound_A=A)
        return SeparatelyHolderFunctional(
            "mean", n, 1.0,
            lambda pts, _u=u: float(_u(pts).mean()),
            np.full(n, u.L_u / n),
            {"observable": u.key()},
        )
    if kind == "kantorovich":
        ref_traj = generate_trajectory(
            map_spec, reference_factor * n, seed=derive_seed(master_seed, TAG_REFERENCE)
        )
        ref = EmpiricalMeasure.from_trajectory(ref_traj)
        return SeparatelyHolderFunctional(
            "kantorovich", n, 1.0,
            lambda pts, _ref=ref: kantorovich_1d(EmpiricalMeasure(pts[:, 0]), _ref),
            np.full(n, 1.0 / n),
            {"reference_n": ref.n},
        )
    if kind == "cov_product":
        if not 2 <= lag <= n:
            raise DomainError(f"lag must be in [2, n], got {lag}")
        u = make_observable("identity", bound_A=A)
        window = n - lag + 1  # pairs (j, j + lag - 1) touch every coordinate

        def _cov(pts, _u=u, _lag=lag, _w=window):
            return float(autocovariance_batch(_u(pts)[None, :], _lag, _w)[0])

        # proof-form coefficient: |u| <= L_u A^eta after u(0) = 0 normalization
        return SeparatelyHolderFunctional(
            "cov_product", n, 1.0,
            _cov,
            np.full(n, 4.0 * u.L_u**2 * A / window),
            {"lag": lag, "window": window},
        )
    if kind == "corr_phi0":
        e = 0.2 * A if eps is None else float(eps)
        if e <= 0:
            raise DomainError(f"eps must be positive, got {e}")
        return SeparatelyHolderFunctional(
            "corr_phi0", n, 1.0,
            lambda pts, _e=e: correlation_sum_smoothed(pts, _e).value,
            np.full(n, 2.0 * (n - 1) / (n * n * e)),
            {"eps": e},
        )
    if kind == "asclt_kn":
        u = _asclt_observable(map_spec)
        s2 = sigma2 if sigma2 is not None else sigma_squared_for(map_spec, u).value
        if s2 <= 0:
            raise DomainError(f"nonpositive sigma^2 = {s2} for {map_spec.map_id}")

        def _kn(pts, _u=u, _s2=s2):
            return kappa_to_gaussian(weighted_empirical(np.cumsum(_u(pts))), _s2)

        q = np.arange(1, n + 1)
        D_n = float(np.sum(1.0 / q))
        lj = (u.L_u / D_n) * zeta(1.5, q)  # Hurwitz zeta = sum_(j>=q) j^(-3/2)
        return SeparatelyHolderFunctional(
            "asclt_kn", n, 1.0, _kn, lj, {"observable": u.key(), "sigma2": s2}
        )
    raise ParameterError(f"unknown functional kind '{kind}' (catalog: {', '.join(FUNCTIONAL_KINDS)})")


def _asclt_observable(map_spec: MapSpec) -> Observable:
    """Centered observable used by the partial-sum functional on each map."""
    if map_spec.map_id in ("doubling", "tent"):
        return make_observable("cosine2pi", bound_A=map_spec.bound_A)  # mean 0 already
    u = make_observable("identity", bound_A=map_spec.bound_A)
    return u.centered(mean_of(u, map_spec))


def lj_coefficients(functional: SeparatelyHolderFunctional, box=None, seed: int = 0):
    """Per-coordinate coefficients: closed form for catalog functionals,
    randomized probing (flagged as a lower-bound estimate) otherwise."""
    if functional.lj is not None:
        return functional.lj, False
    if box is None:
        raise DomainError("custom functionals need a probing box")
    return probe_lj(functional.evaluate, functional.arity, functional.eta, box, seed), True


def probe_lj(
    evaluate,
    arity: int,
    eta: float,
    box,
    seed: int = 0,
    probes: int = 64,
    scales: int = 16,
    refine_sweeps: int = 4,
) -> np.ndarray:
    """Empirical lower bound on each L_j by randomized coordinate probing.

    Per coordinate: 64 base configurations (half uniform over the box,
    half random corners) x 16 perturbation scales in both directions,
    followed by greedy coordinate-descent sweeps that push the other
    coordinates toward whichever box endpoint increases the quotient.
    Never used to claim the variance inequality fails.
    """
    box = np.asarray(box, dtype=float)
    if box.ndim == 1:
        box = np.tile(box, (arity, 1))
    lo, hi = box[:, 0], box[:, 1]
    span = float((hi - lo).max())
    deltas = span * np.geomspace(1e-4, 0.5, scales)
    stream = derive_seed(seed, TAG_PROBE)
    est = np.zeros(arity)

    def quotient(x, j, base_val):
        best = 0.0
        xj = x[j, 0]
        for d in deltas:
            for cand in (min(xj + d, hi[j]), max(xj - d, lo[j])):
                step = abs(cand - xj)
                if step == 0.0:
                    continue
                x2 = x.copy()
                x2[j, 0] = cand
                q = abs(evaluate(x2) - base_val) / step**eta
                if q > best:
                    best = q
        return best

    for j in range(arity):
        counters = np.arange(2 * probes * arity, dtype=np.uint64) + np.uint64(j * 2 * probes * arity)
        u = uniform_at(stream, counters).reshape(2 * probes, arity)
        bases = np.empty((probes, arity))
        bases[: probes // 2] = lo + (hi - lo) * u[: probes // 2]
        bases[probes // 2 :] = np.where(u[probes // 2 : probes] < 0.5, lo, hi)
        best_q, best_x = 0.0, None
        for b in range(probes):
            x = bases[b][:, None].copy()
            q = quotient(x, j, evaluate(x))
            if q > best_q:
                best_q, best_x = q, x
        if best_x is None:  # coordinate j never moved K: L_j estimate is 0
            est[j] = 0.0
            continue
        for _ in range(refine_sweeps):
            improved = False
            for i in range(arity):  # including j: the quotient probes from its base
                for cand in (lo[i], hi[i], 0.5 * (lo[i] + hi[i])):
                    x2 = best_x.copy()
                    x2[i, 0] = cand
                    q = quotient(x2, j, evaluate(x2))
                    if q > best_q:
                        best_q, best_x = q, x2
                        improved = True
            if not improved:
                break
        est[j] = best_q
    return est


@dataclass(frozen=True)
class VarianceReport:
    functional_id: str
    arity: int
    replicas: int
    mc_variance: float
    mc_variance_stderr: float
    sum_lj_sq: float
    devroye_bound: float
    D_used: float

    @property
    def ratio(self) -> float:
        return self.mc_variance / self.devroye_bound if self.devroye_bound > 0 else math.inf


@dataclass(frozen=True)
class DevroyeCheck:
    passed: bool
    margin: float  # mc_variance / bound
    slack: float  # 3 * stderr, the Monte Carlo allowance


def estimate_variance_mc(
    functional: SeparatelyHolderFunctional,
    map_spec: MapSpec,
    replicas: int,
    master_seed: int,
    D: float = 1.0,
    burn_in: int = 1000,
) -> VarianceReport:
    """Monte Carlo variance of K over an ensemble, with fourth-moment stderr."""
    if replicas < 2:
        raise DomainError(f"need at least 2 replicas, got {replicas}")
    n = functional.arity

    def chunk_values(lo, hi):
        pts = ensemble_points(map_spec, hi - lo, n, burn_in, master_seed, replica_offset=lo)
        return np.array([functional.evaluate(pts[r]) for r in range(hi - lo)])

    vals = np.concatenate(map_chunks(chunk_values, replicas))
    var, se = _variance_with_stderr(vals)
    if functional.lj is None:
        ssq = bound = math.nan
    else:
        ssq = float(np.sum(functional.lj**2))
        bound = devroye_bound(functional.lj, D)
    return VarianceReport(functional.name, n, replicas, var, se, ssq, bound, D)


def check_devroye(report: VarianceReport) -> DevroyeCheck:
    """Pass iff mc_variance - 3 stderr <= bound; margin is the plain ratio."""
    slack = 3.0 * report.mc_variance_stderr
    passed = report.mc_variance - slack <= report.devroye_bound
    return DevroyeCheck(bool(passed), report.ratio, slack)


@dataclass(frozen=True)
class CalibrationCell:
    map_id: str
    functional_id: str
    n: int
    mc_variance: float
    stderr: float
    sum_lj_sq: float
    min_D: float  # smallest D making this cell pass


@dataclass(frozen=True)
class CalibrationResult:
    D_fit: float
    training: list
    validation: list  # VarianceReport/DevroyeCheck pairs at D_fit


def calibrate_devroye_constant(
    training_maps,
    training_kinds,
    n_list,
    replicas: int,
    master_seed: int,
    validation_maps=(),
    validation_kinds=(),
) -> CalibrationResult:
    """Fit the smallest D making every training cell pass, then validate.

    min_D per cell is (mc_variance - 3 stderr) / sum L_j^2; D_fit is their
    maximum.  Validation cells are re-checked with check_devroye at D_fit.
    """
    cells = []
    for spec in training_maps:
        for kind in training_kinds:
            for n in n_list:
                f = make_functional(kind, spec, int(n), master_seed)
                rep = estimate_variance_mc(f, spec, replicas, master_seed)
                min_d = max(0.0, (rep.mc_variance - 3.0 * rep.mc_variance_stderr) / rep.sum_lj_sq)
                cells.append(
                    CalibrationCell(
                        spec.map_id, kind, int(n), rep.mc_variance, rep.mc_variance_stderr,
                        rep.sum_lj_sq, min_d,
                    )
                )
    D_fit = max(c.min_D for c in cells)
    validation = []
    for spec in validation_maps:
        for kind in validation_kinds:
            for n in n_list:
                f = make_functional(kind, spec, int(n), master_seed)
                rep = estimate_variance_mc(f, spec, replicas, master_seed, D=D_fit)
                validation.append((rep, check_devroye(rep)))
    return CalibrationResult(D_fit, cells, validation)
