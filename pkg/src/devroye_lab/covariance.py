"""Auto-covariance estimation and the derived series quantities.

Indexing convention (documented once, used everywhere): C(1) is the
variance of u(X_1) and C(l) for l >= 2 is the covariance at time distance
l - 1, i.e. C(l) = E u(X_1) u(X_l) - (E u(X_1))^2.  The windowed
estimator pairs u(X_j) with u(X_(j+l-1)) accordingly, so Chat_k(1) is the
empirical variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientDataError, NonSummableError
from .observables import Observable, make_observable, mean_of
from .process import MapSpec, Trajectory, generate_trajectory
from .rng import TAG_REFERENCE, derive_seed


def autocovariance(traj: Trajectory, u: Observable, lag: int, window: int) -> float:
    """Windowed estimator Chat_k(l) with sample-mean centering, no bias correction."""
    if lag < 1 or window < 1:
        raise DomainError("lag and window must be >= 1")
    y = u(traj.points)
    if y.size < window + lag:
        raise DomainError(
            f"trajectory length {y.size} < window + lag = {window + lag}"
        )
    head = y[:window]
    return float(np.mean(head * y[lag - 1 : lag - 1 + window]) - np.mean(head) ** 2)


def autocovariance_batch(values: np.ndarray, lag: int, window: int) -> np.ndarray:
    """Chat_k(l) per row of an ensemble value array, shape (R, n).

    Unlike the public estimator this only requires the indices actually
    touched (window + lag - 1), so a functional of arity n can use every
    coordinate.
    """
    if values.shape[1] < window + lag - 1:
        raise DomainError("rows shorter than window + lag - 1")
    head = values[:, :window]
    prod = np.mean(head * values[:, lag - 1 : lag - 1 + window], axis=1)
    return prod - np.mean(head, axis=1) ** 2


def covariance_variance_bound(k: int, n: int, L_u: float, A: float, eta: float, D: float) -> float:
    """Mean-square error bound for Chat_k(n): the two-term k^-2 expression."""
    return 16.0 * D * L_u**4 * A ** (2 * eta) * (n + k) / k**2 + D**2 * L_u**4 / k**2


@dataclass(frozen=True)
class TailModel:
    """Geometric envelope |C(l)| <= c * r^l for lags beyond the stored ones."""

    c: float
    r: float

    def magnitude(self, lags: np.ndarray) -> np.ndarray:
        if self.c == 0.0:
            return np.zeros_like(np.asarray(lags, dtype=float))
        return self.c * self.r ** np.asarray(lags, dtype=float)


ZERO_TAIL = TailModel(0.0, 0.0)


@dataclass(frozen=True)
class CovarianceSeries:
    """C(1), ..., C(m) plus an optional tail model for the lags beyond m."""

    values: np.ndarray
    source: str  # empirical | analytic
    tail: TailModel | None = None

    @property
    def m(self) -> int:
        return self.values.size

    def abs_value(self, lag: int) -> float:
        if lag <= self.m:
            return abs(float(self.values[lag - 1]))
        if self.tail is None:
            raise InsufficientDataError(f"lag {lag} beyond stored {self.m} and no tail model")
        return float(self.tail.magnitude(np.array([lag]))[0])


def fit_geometric_tail(values: np.ndarray) -> TailModel | None:
    """Least-squares geometric fit on the last decade of available lags.

    Returns None when the tail does not decay (fitted rate >= 1), which
    callers surface as a diagnostic rather than hiding.
    """
    m = values.size
    lags = np.arange(1, m + 1)
    lo = max(2, m // 10)
    sel = (lags >= lo) & (np.abs(values) > 0)
    if sel.sum() < 2:
        return ZERO_TAIL if np.all(values[max(1, lo - 1) :] == 0.0) else None
    x = lags[sel].astype(float)
    y = np.log(np.abs(values[sel]))
    A = np.vstack([np.ones_like(x), x]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    r = math.exp(coef[1])
    if r >= 1.0:
        return None
    return TailModel(math.exp(coef[0]), r)


def empirical_series(
    traj: Trajectory, u: Observable, max_lag: int, window: int | None = None
) -> CovarianceSeries:
    """Empirical C(1..max_lag) from one trajectory, with a fitted tail."""
    if window is None:
        window = traj.n - max_lag
    vals = np.array([autocovariance(traj, u, lag, window) for lag in range(1, max_lag + 1)])
    return CovarianceSeries(vals, "empirical", fit_geometric_tail(vals))


def analytic_series(map_spec: MapSpec, u: Observable, m: int = 64) -> CovarianceSeries | None:
    """Closed-form covariance series for catalog (map, observable) pairs.

    Lebesgue-invariant maps with the cosine observable have only the
    variance term (orthogonality of cos(2 pi x) against cos(2 pi 2^k x),
    and the tent map satisfies cos(2 pi f^k(x)) = cos(2^(k+1) pi x)); the
    identity observable on the doubling map has the exact geometric tail
    cov(x, f^k x) = 2^-k / 12.
    """
    vals = None
    tail = ZERO_TAIL
    if u.obs_id == "cosine2pi" and map_spec.map_id in ("doubling", "tent", "iid_uniform"):
        vals = np.zeros(m)
        vals[0] = 0.5
    elif u.obs_id == "identity":
        if map_spec.map_id in ("iid_uniform", "tent"):
            vals = np.zeros(m)
            vals[0] = 1.0 / 12.0
        elif map_spec.map_id == "doubling":
            vals = (1.0 / 12.0) * 0.5 ** np.arange(m)
            tail = TailModel(1.0 / 12.0, 0.5)
        elif map_spec.map_id == "logistic" and map_spec.analytic_density == "arcsine":
            vals = np.zeros(m)
            vals[0] = 1.0 / 8.0
    if vals is None:
        return None
    return CovarianceSeries(vals, "analytic", tail)


def geometric_series(c1: float, c: float, r: float, m: int = 64) -> CovarianceSeries:
    """Synthetic series with C(1) = c1 and C(l) = c * r^(l-1) for l >= 2."""
    vals = np.empty(m)
    vals[0] = c1
    vals[1:] = c * r ** np.arange(1, m)
    return CovarianceSeries(vals, "analytic", TailModel(c / r if r > 0 else 0.0, r))


_TRUNC = 1e-13


def delta_n(series: CovarianceSeries, n: int) -> float:
    """Weighted covariance tail (2/n) sum_(k<n) |C(k+1)| + 2 sum_(k>=n) |C(k+1)|/k.

    The infinite part is evaluated under the tail model with truncation
    error below 1e-12.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if series.tail is None:  # the second sum is infinite, so a tail is always needed
        raise InsufficientDataError("series has no tail model; cannot evaluate the infinite sum")
    if series.tail.r >= 1.0:
        raise NonSummableError(f"tail rate {series.tail.r} >= 1")
    first = 0.0
    if n > 1:
        ks = np.arange(1, n)
        first = (2.0 / n) * _abs_at_lags(series, ks + 1).sum()
    second = 0.0
    k = n
    block = 4096
    while True:
        ks = np.arange(k, k + block)
        stored = ks + 1 <= series.m
        vals = np.where(
            stored,
            np.abs(_stored_at(series, ks + 1)),
            series.tail.magnitude(ks + 1),
        )
        second += float((vals / ks).sum())
        k += block
        if k + 1 > series.m:
            t = series.tail
            if t.c == 0.0 or t.r == 0.0:
                break
            remainder = t.c * t.r ** (k + 1) / (k * (1.0 - t.r))
            if remainder < _TRUNC:
                second += remainder  # cheap upper closure, below tolerance anyway
                break
    return first + 2.0 * second


def _stored_at(series: CovarianceSeries, lags: np.ndarray) -> np.ndarray:
    idx = np.clip(lags - 1, 0, series.m - 1)
    return series.values[idx]


def _abs_at_lags(series: CovarianceSeries, lags: np.ndarray) -> np.ndarray:
    stored = lags <= series.m
    out = np.where(stored, np.abs(_stored_at(series, lags)), 0.0)
    if not stored.all():
        if series.tail is None:
            raise InsufficientDataError("lags beyond stored values and no tail model")
        out = out + np.where(stored, 0.0, series.tail.magnitude(lags))
    return out


@dataclass(frozen=True)
class SigmaSquared:
    value: float
    negative: bool  # numerically negative estimate of a nonnegative quantity
    tail_bound: float


def sigma_squared(series: CovarianceSeries, cauchy_tol: float = 0.05) -> SigmaSquared:
    """CLT variance C(1) + 2 sum_(l>=2) C(l) with a summability diagnostic.

    The partial sums over the last fifth of the stored lags must be Cauchy
    within cauchy_tol * C(1); otherwise NonSummableError.  The tail beyond
    the stored lags contributes at most tail_bound in absolute value.
    """
    c1 = float(series.values[0])
    partial = c1 + 2.0 * np.concatenate([[0.0], np.cumsum(series.values[1:])])
    last = partial[-max(2, series.m // 5) :]
    spread = float(last.max() - last.min())
    scale = max(abs(c1), 1e-30)
    if spread > cauchy_tol * scale:
        raise NonSummableError(
            f"partial sums spread {spread:.3g} exceeds {cauchy_tol} * C(1) = {cauchy_tol * scale:.3g}"
        )
    tail_bound = 0.0
    if series.tail is not None and series.tail.c > 0 and series.tail.r > 0:
        t = series.tail
        tail_bound = 2.0 * t.c * t.r ** (series.m + 1) / (1.0 - t.r)
    value = float(partial[-1])
    return SigmaSquared(value, value < 0.0, tail_bound)


@dataclass(frozen=True)
class NuageRow:
    obs_key: str
    norm_eta: float
    abs_sum: float  # sum of |Chat(l)| up to the lag budget
    tail_bound: float
    ratio: float
    decaying: bool


@dataclass(frozen=True)
class NuageReport:
    c_eta_hat: float
    rows: list


def check_nuage(
    map_spec: MapSpec,
    eta: float,
    observables,
    lag_budget: int = 40,
    orbit_n: int = 200_000,
    seed: int = 0,
) -> NuageReport:
    """Empirical constant for: sum of |C_u(l)| <= C_eta * ||u||_eta^2.

    Returns the max over the family of the normalized absolute covariance
    sum.  A non-decaying empirical tail is reported per row, not raised.
    """
    traj = generate_trajectory(map_spec, orbit_n, seed=derive_seed(seed, TAG_REFERENCE))
    rows = []
    for u in observables:
        series = empirical_series(traj, u, lag_budget)
        abs_sum = float(np.abs(series.values).sum())
        decaying = series.tail is not None
        tail_bound = 0.0
        if decaying and series.tail.c > 0 and series.tail.r > 0:
            t = series.tail
            tail_bound = t.c * t.r ** (series.m + 1) / (1.0 - t.r)
        norm = u.L_u
        ratio = 0.0 if norm == 0.0 else (abs_sum + tail_bound) / norm**2
        rows.append(NuageRow(u.key(), norm, abs_sum, tail_bound, ratio, decaying))
    return NuageReport(max((r.ratio for r in rows), default=0.0), rows)


def sigma_squared_for(map_spec: MapSpec, u: Observable, orbit_n: int = 1_000_000,
                      max_lag: int = 60) -> SigmaSquared:
    """CLT variance for (map, u): analytic series when known, else empirical."""
    series = analytic_series(map_spec, u)
    if series is None:
        traj = generate_trajectory(map_spec, orbit_n, seed=derive_seed(0, TAG_REFERENCE))
        series = empirical_series(traj, u, max_lag)
    return sigma_squared(series)
