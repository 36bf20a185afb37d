"""Periodogram, spectral distribution functions and their limit curve.

The integrated periodogram has the closed form (no quadrature)

    J_n(w) = w R(0)/n + (2/n) sum_(m=1..n-1) sin(m w)/m R(m),

where R(m) is the unnormalized autocorrelation of the centered values;
centering by the exact mean gives J_n, by the sample mean gives its
empirical twin.  On the uniform grid w_p = 2 pi p / N the sine sums fold
modulo N, so a length-N FFT evaluates all grid values at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import next_fast_len

from .covariance import CovarianceSeries, analytic_series, delta_n
from .errors import DomainError, InsufficientDataError
from .observables import Observable, mean_of
from .process import MapSpec, Trajectory, ensemble_points


@dataclass(frozen=True)
class SpectralCurve:
    """Values of a spectral function on an increasing omega grid.

    kind: raw_I | J_n | J_tilde | J_limit.  The integrated kinds must be
    nondecreasing (they integrate nonnegative functions); raw periodogram
    values must be nonnegative.  validate() enforces this up to a small
    numerical tolerance.
    """

    omegas: np.ndarray
    values: np.ndarray
    kind: str

    def validate(self, tol: float = 1e-8) -> "SpectralCurve":
        if np.any(np.diff(self.omegas) <= 0):
            raise DomainError("omega grid must be strictly increasing")
        if self.kind == "raw_I":
            if self.values.min() < -tol:
                raise DomainError(f"raw periodogram dipped to {self.values.min()}")
        elif self.kind in ("J_n", "J_tilde", "J_limit"):
            worst = float(np.diff(self.values).min()) if self.values.size > 1 else 0.0
            if worst < -tol:
                raise DomainError(f"{self.kind} decreased by {-worst}")
        else:
            raise DomainError(f"unknown curve kind '{self.kind}'")
        return self


def center_value(traj: Trajectory, u: Observable, mean_mode: str) -> float:
    if mean_mode == "exact":
        return mean_of(u, traj.map)
    if mean_mode == "empirical":
        return float(u(traj.points).mean())
    raise DomainError(f"mean_mode must be 'exact' or 'empirical', got '{mean_mode}'")


def raw_periodogram(traj: Trajectory, u: Observable, omega, mean_mode: str = "empirical"):
    """I_n(w) = (1/n) |sum_j e^(-i j w) (u(X_j) - center)|^2, w in [0, 2 pi]."""
    omega_arr = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any((omega_arr < 0) | (omega_arr > 2 * np.pi)):
        raise DomainError("omega must lie in [0, 2 pi]")
    y = u(traj.points) - center_value(traj, u, mean_mode)
    j = np.arange(1, y.size + 1)
    z = np.exp(-1j * np.outer(omega_arr, j)) @ y
    vals = (z.real**2 + z.imag**2) / y.size
    return vals if np.ndim(omega) else float(vals[0])


def _autocorrelation(y: np.ndarray) -> np.ndarray:
    """R(m) = sum_j y_j y_(j+m) for m = 0..n-1, rows of a (R, n) array."""
    n = y.shape[-1]
    L = next_fast_len(2 * n)
    f = np.fft.rfft(y, L, axis=-1)
    return np.fft.irfft(f * np.conj(f), L, axis=-1)[..., :n]


def spectral_distribution(traj: Trajectory, u: Observable, omega, mean_mode: str = "empirical"):
    """Closed-form J_n (exact centering) or its empirical version (sample mean)."""
    omega_arr = np.atleast_1d(np.asarray(omega, dtype=float))
    y = u(traj.points) - center_value(traj, u, mean_mode)
    vals = _sdf_closed_form(y[None, :], omega_arr)[0]
    return vals if np.ndim(omega) else float(vals[0])


def _sdf_closed_form(y: np.ndarray, omegas: np.ndarray) -> np.ndarray:
    """Direct O(n * len(omegas)) evaluation for arbitrary omega values."""
    R, n = y.shape
    ac = _autocorrelation(y)
    out = np.multiply.outer(ac[:, 0] / n, omegas)
    if n > 1:
        m = np.arange(1, n)
        sins = np.sin(np.outer(m, omegas))  # (n-1, len(omegas))
        out += (2.0 / n) * (ac[:, 1:] / m) @ sins
    return out


def sdf_uniform_grid(y: np.ndarray, N: int) -> np.ndarray:
    """J values at w_p = 2 pi p / N, p = 0..N, per row of centered values.

    Folds the sine sum modulo N and evaluates it with one length-N FFT per
    row; identical to _sdf_closed_form on the same grid.
    """
    if N < 1:
        raise DomainError(f"grid size must be >= 1, got {N}")
    R, n = y.shape
    ac = _autocorrelation(y)
    omega = 2.0 * np.pi * np.arange(N + 1) / N
    out = np.multiply.outer(ac[:, 0] / n, omega)
    if n > 1:
        m = np.arange(1, n)
        w = ac[:, 1:] / m
        idx = m % N
        folded = np.empty((R, N))
        for r in range(R):
            folded[r] = np.bincount(idx, weights=w[r], minlength=N)
        sin_part = -np.fft.fft(folded, axis=1).imag  # sum_t folded_t sin(2 pi p t / N)
        out[:, :N] += (2.0 / n) * sin_part
        out[:, N] += (2.0 / n) * sin_part[:, 0]  # p = N aliases p = 0
    return out


def limit_spectral_distribution(series: CovarianceSeries, omega) -> float:
    """J(w) = C(1) w + 2 sum_(k>=1) sin(w k)/k C(k+1), truncation below 1e-9.

    Beyond the stored lags the tail model is used as a signed
    continuation, which is exact for analytic series; the geometric decay
    bounds the truncation error.
    """
    w = float(omega)
    if series.tail is None:
        raise InsufficientDataError("series has no tail model")
    if series.tail.r >= 1.0:
        raise InsufficientDataError(f"tail rate {series.tail.r} >= 1: not summable")
    total = series.values[0] * w
    acc = 0.0
    k = 1
    block = 4096
    while True:
        ks = np.arange(k, k + block)
        stored = ks + 1 <= series.m
        vals = np.where(stored, series.values[np.clip(ks, 0, series.m - 1)], 0.0)
        if not stored.all():
            t = series.tail
            vals = vals + np.where(stored, 0.0, t.magnitude(ks + 1))
        acc += float((np.sin(w * ks) / ks * vals).sum())
        k += block
        if k + 1 > series.m:
            t = series.tail
            if t.c == 0.0 or t.r == 0.0:
                break
            remainder = t.c * t.r ** (k + 1) / (k * (1.0 - t.r))
            if remainder < 5e-10:
                break
    return float(total + 2.0 * acc)


def theoretical_envelope(
    n: int,
    series: CovarianceSeries,
    L_u: float,
    A: float,
    eta: float,
    D: float,
    N_max: int = 1000,
) -> float:
    """Shape of the sup-deviation mean-square bound, with unit leading constant.

    Evaluates inf over N of N [ (C(1)^2 + D A^(2 eta) L_u^4 (1 + log n)^2)/n
    + Delta_n^2 ] + [ C(1)/N + Delta_N ]^2 numerically over N = 1..N_max.
    """
    c1 = float(series.values[0])
    dn = delta_n(series, n)
    inner = (c1 * c1 + D * A ** (2 * eta) * L_u**4 * (1.0 + math.log(n)) ** 2) / n + dn * dn
    best = math.inf
    for N in range(1, N_max + 1):
        dN = delta_n(series, N)
        val = N * inner + (c1 / N + dN) ** 2
        if val < best:
            best = val
    return best


@dataclass(frozen=True)
class SupDeviationRow:
    n: int
    grid_size: int
    e_sup2: float  # grid sup: lower-bound estimator of the true sup
    e_sup2_upper: float  # monotonicity bracket: upper bound of the true sup
    envelope: float


@dataclass(frozen=True)
class SupDeviationResult:
    rows: list
    slope: float  # log-log slope of e_sup2 against n
    envelope_constant: float  # fitted leading constant for the envelope shape


def sup_deviation_experiment(
    map_spec: MapSpec,
    u: Observable,
    n_grid,
    replicas: int,
    master_seed: int,
    grid_size: int | None = None,
    series: CovarianceSeries | None = None,
    D: float = 1.0,
    burn_in: int = 1000,
) -> SupDeviationResult:
    """Monte Carlo estimate of E[(sup_w |Jtilde_n - J|)^2] against n.

    The sup over the uniform grid w_p = 2 pi p / N underestimates the true
    sup; the bracket max(|Jtilde(w_(p+1)) - J(w_p)|, |Jtilde(w_p) -
    J(w_(p+1))|) over cells upper-bounds it by monotonicity of both
    curves.  N defaults to ceil(n^(1/3)) per size.
    """
    if series is None:
        series = analytic_series(map_spec, u)
        if series is None:
            raise InsufficientDataError(
                f"no analytic covariance series for {map_spec.map_id} + {u.obs_id}; pass one"
            )
    rows = []
    for n in sorted(int(v) for v in n_grid):
        N = grid_size if grid_size is not None else int(math.ceil(n ** (1.0 / 3.0)))
        pts = ensemble_points(map_spec, replicas, n, burn_in, master_seed)
        vals = u(pts.reshape(-1, pts.shape[-1])).reshape(replicas, n)
        y = vals - vals.mean(axis=1, keepdims=True)
        Jt = sdf_uniform_grid(y, N)
        omega = 2.0 * np.pi * np.arange(N + 1) / N
        J = np.array([limit_spectral_distribution(series, w) for w in omega])
        dev = np.abs(Jt - J[None, :])
        sup_grid = dev.max(axis=1)
        upper = np.maximum(np.abs(Jt[:, 1:] - J[None, :-1]), np.abs(Jt[:, :-1] - J[None, 1:]))
        sup_upper = upper.max(axis=1)
        env = theoretical_envelope(n, series, u.L_u, map_spec.bound_A, u.eta, D)
        rows.append(
            SupDeviationRow(n, N, float(np.mean(sup_grid**2)), float(np.mean(sup_upper**2)), env)
        )
    ns = np.array([r.n for r in rows], dtype=float)
    es = np.array([r.e_sup2 for r in rows])
    slope = loglog_slope(ns, es) if es.min() > 0 and es.size >= 2 else math.nan
    gamma = max((r.e_sup2 / r.envelope for r in rows if r.envelope > 0), default=math.nan)
    return SupDeviationResult(rows, slope, float(gamma))


def loglog_slope(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise DomainError("need at least two points for a slope")
    A = np.vstack([np.ones_like(x), np.log(x)]).T
    coef, *_ = np.linalg.lstsq(A, np.log(y), rcond=None)
    return float(coef[1])


@dataclass(frozen=True)
class TrigSupResult:
    value: float
    m_star: int
    omega_star: float
    refinements: int


def trig_partial_sum_sup(m_max: int, grid_size: int = 2049, tol: float = 1e-6) -> TrigSupResult:
    """sup over m <= m_max and w of |sum_(k<=m) sin(k w)/k|.

    By the sign symmetry of sine around pi it is enough to scan (0, pi].
    A coarse uniform grid locates the maximizing ridge; the neighborhood
    of the argmax is then re-scanned at doubled resolution until the value
    changes by less than tol.
    """
    if m_max < 1:
        raise DomainError(f"m_max must be >= 1, got {m_max}")

    def scan(omegas: np.ndarray):
        prefix = np.zeros_like(omegas)
        best_val, best_m, best_w = -1.0, 0, 0.0
        chunk = max(256, int(2**21 // max(omegas.size, 1)))
        k = 1
        while k <= m_max:
            ks = np.arange(k, min(k + chunk, m_max + 1))
            cs = prefix + np.cumsum(np.sin(np.outer(ks, omegas)) / ks[:, None], axis=0)
            flat = np.abs(cs)
            i, j = np.unravel_index(np.argmax(flat), flat.shape)
            if flat[i, j] > best_val:
                best_val, best_m, best_w = float(flat[i, j]), int(ks[i]), float(omegas[j])
            prefix = cs[-1]
            k = int(ks[-1]) + 1
        return best_val, best_m, best_w

    omegas = np.linspace(np.pi / grid_size, np.pi, grid_size)
    spacing = omegas[1] - omegas[0]
    best, m_star, w_star = scan(omegas)
    refinements = 0
    for _ in range(60):
        lo = max(w_star - spacing, 1e-12)
        hi = min(w_star + spacing, np.pi)
        local = np.linspace(lo, hi, 129)
        spacing = local[1] - local[0]
        v, m, w = scan(local)
        refinements += 1
        change = abs(v - best)
        if v > best:
            best, m_star, w_star = v, m, w
        if change < tol:
            break
    return TrigSupResult(best, m_star, w_star, refinements)
