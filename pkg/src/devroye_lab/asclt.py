"""Almost-sure CLT machinery: log-weighted partial-sum measures.

The weighted empirical measure puts mass 1/(k D_n) on S_k / sqrt(k) for
k = 1..n with D_n the harmonic number; its Kantorovich distance to the
centered Gaussian is evaluated exactly (step CDF against the Gaussian
CDF, tails integrated in closed form).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covariance import sigma_squared_for
from .errors import CenteringError, DomainError
from .measure import AtomicMeasure, GaussianLaw, _kappa_atoms_vs_law
from .observables import Observable, analytic_mean, long_run_mean
from .process import MapSpec, Trajectory, ensemble_points


def partial_sums(traj: Trajectory, u: Observable, centering_tol: float = 1e-3) -> np.ndarray:
    """Prefix sums S_1..S_n of u along the trajectory; u must be centered.

    Centering is accepted when the analytic mean is exactly 0 or a long
    reference orbit gives |mean| below centering_tol; otherwise the caller
    is told to subtract the mean first.
    """
    mean = analytic_mean(u, traj.map)
    if mean is None:
        mean = long_run_mean(u, traj.map)
    if abs(mean) >= centering_tol:
        raise CenteringError(
            f"observable {u.key()} has mean {mean:.3g} on {traj.map.map_id}; "
            "subtract the mean (Observable.centered) before forming partial sums"
        )
    return np.cumsum(u(traj.points))


@dataclass(frozen=True)
class WeightedEmpiricalMeasure:
    """Atoms S_k/sqrt(k) with weights 1/(k D_n), in trajectory order."""

    atoms: np.ndarray
    weights: np.ndarray
    n: int
    D_n: float

    def to_atomic(self) -> AtomicMeasure:
        return AtomicMeasure(self.atoms, self.weights)


def harmonic_number(n: int) -> float:
    return float(np.sum(1.0 / np.arange(1, n + 1)))


def weighted_empirical(S: np.ndarray) -> WeightedEmpiricalMeasure:
    S = np.asarray(S, dtype=float).reshape(-1)
    n = S.size
    if n < 1:
        raise DomainError("need at least one partial sum")
    k = np.arange(1, n + 1, dtype=float)
    inv_k = 1.0 / k
    D_n = float(inv_k.sum())
    return WeightedEmpiricalMeasure(S / np.sqrt(k), inv_k / D_n, n, D_n)


def kappa_to_gaussian(measure: WeightedEmpiricalMeasure | AtomicMeasure, sigma2: float) -> float:
    """Exact Kantorovich distance to N(0, sigma^2).

    The Gaussian CDF is evaluated through erf (absolute error far below
    1e-10); between consecutive atoms the integral of |F_A - F_N| is in
    closed form and the two tails integrate analytically.
    """
    law = GaussianLaw(sigma2)
    atomic = measure.to_atomic() if isinstance(measure, WeightedEmpiricalMeasure) else measure
    return _kappa_atoms_vs_law(atomic.atoms, atomic.cum_weights, law)


def checkpoints(n_max: int, rho: float = 0.5) -> list[int]:
    """Schedule n_k = round(exp(k^(1+rho))), deduplicated, n_max appended."""
    if not 0.0 < rho < 1.0:
        raise DomainError(f"rho must be in (0, 1), got {rho}")
    out = []
    k = 1
    while True:
        v = int(round(math.exp(k ** (1.0 + rho))))
        if v > n_max:
            break
        if v >= 1:
            out.append(v)
        k += 1
    out.append(int(n_max))
    return sorted(set(out))


@dataclass(frozen=True)
class AscltRow:
    n: int
    D_n: float
    kappa_mean: float
    kappa_median: float
    kappa_var: float
    var_bound: float  # c_fit / D_n with c_fit shared across checkpoints
    marginal_kappa: float  # normality diagnostic: replica marginal of S_n/sqrt(n)


@dataclass(frozen=True)
class AscltResult:
    rows: list
    sigma2: float
    var_constant: float  # fitted c in var <= c / D_n


def asclt_experiment(
    map_spec: MapSpec,
    u: Observable,
    n_max: int,
    rho: float,
    replicas: int,
    master_seed: int,
    sigma2: float | None = None,
    burn_in: int = 1000,
    chunk: int = 8,
) -> AscltResult:
    """kappa(A_(n_k), N(0, sigma^2)) along the checkpoint schedule.

    sigma^2 comes from the covariance module (analytic when available) so
    a failure there is visible separately; it is never re-estimated here.
    The marginal_kappa column is evidence for the plain CLT: the distance
    between the replica marginal of S_n/sqrt(n) and the same Gaussian.
    """
    if sigma2 is None:
        sigma2 = sigma_squared_for(map_spec, u).value
    if sigma2 <= 0:
        raise DomainError(f"sigma^2 must be positive, got {sigma2}")
    cps = checkpoints(n_max, rho)
    kappas = np.empty((replicas, len(cps)))
    endpoints = np.empty((replicas, len(cps)))
    ks = np.arange(1, n_max + 1, dtype=float)
    sqrt_k = np.sqrt(ks)
    for lo in range(0, replicas, chunk):
        hi = min(lo + chunk, replicas)
        pts = ensemble_points(map_spec, hi - lo, n_max, burn_in, master_seed, replica_offset=lo)
        vals = u(pts.reshape(-1, pts.shape[-1])).reshape(hi - lo, n_max)
        S = np.cumsum(vals, axis=1)
        atoms_all = S / sqrt_k[None, :]
        for r in range(hi - lo):
            for ci, n in enumerate(cps):
                wm = weighted_empirical(S[r, :n])
                kappas[lo + r, ci] = kappa_to_gaussian(wm, sigma2)
                endpoints[lo + r, ci] = atoms_all[r, n - 1]
    rows = []
    var_by_cp = kappas.var(axis=0, ddof=1) if replicas > 1 else np.zeros(len(cps))
    d_ns = np.array([harmonic_number(n) for n in cps])
    c_fit = float(np.max(var_by_cp * d_ns)) if replicas > 1 else 0.0
    for ci, n in enumerate(cps):
        marg = kappa_to_gaussian(AtomicMeasure(endpoints[:, ci]), sigma2)
        rows.append(
            AscltRow(
                n,
                float(d_ns[ci]),
                float(kappas[:, ci].mean()),
                float(np.median(kappas[:, ci])),
                float(var_by_cp[ci]),
                c_fit / float(d_ns[ci]),
                float(marg),
            )
        )
    return AscltResult(rows, float(sigma2), c_fit)
