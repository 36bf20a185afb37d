"""Observable catalog: real Holder functions of the process state.

An observable carries its declared Holder exponent and constant, so the
variance-bound machinery can form L_j coefficients without re-deriving
them.  All catalog observables read the first coordinate, which keeps
them 1-Lipschitz compositions on 2-d maps (projection is 1-Lipschitz).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import comb, j0

from .errors import ParameterError
from .process import MapSpec, generate_trajectory
from .rng import TAG_REFERENCE, uniform_at

_CATALOG = ("identity", "cosine2pi", "abs_shift", "custom_polynomial")


@dataclass(frozen=True)
class Observable:
    """u: R^d -> R with declared eta-Holder constant L_u and sup bound."""

    obs_id: str
    eta: float
    L_u: float
    params: tuple = ()
    bound: float = 1.0  # sup |u| over the a.s. support
    shift: float = 0.0  # subtracted from the raw value (centering)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        x = points[:, 0] if points.ndim == 2 else points
        if self.obs_id == "identity":
            v = x
        elif self.obs_id == "cosine2pi":
            v = np.cos(2.0 * np.pi * x)
        elif self.obs_id == "abs_shift":
            v = np.abs(x - self.params[0])
        else:
            v = np.polynomial.polynomial.polyval(x, self.params)
        return v - self.shift if self.shift else v

    def key(self) -> str:
        ps = ",".join(f"{p:.17g}" for p in self.params)
        return f"{self.obs_id}({ps})-{self.shift:.17g}"

    def centered(self, mean: float) -> "Observable":
        return Observable(self.obs_id, self.eta, self.L_u, self.params,
                          self.bound + abs(mean), self.shift + mean)


def make_observable(obs_id: str, eta: float = 1.0, params=(), bound_A: float = 1.0) -> Observable:
    """Catalog observable with its Holder constant on ||x|| <= bound_A.

    Constants are exact for eta = 1; for eta < 1 they use the
    interpolation L_eta = L_1^eta * osc^(1-eta), which is how the catalog
    supplies eta = 1/2.
    """
    if not 0.0 < eta <= 1.0:
        raise ParameterError(f"eta must be in (0, 1], got {eta}")
    A = float(bound_A)
    if obs_id == "identity":
        lip, osc = 1.0, 2.0 * A
    elif obs_id == "cosine2pi":
        lip, osc = 2.0 * np.pi, 2.0
    elif obs_id == "abs_shift":
        params = params or (0.5,)
        c = float(params[0])
        lip, osc = 1.0, A + abs(c)
    elif obs_id == "custom_polynomial":
        if not params:
            raise ParameterError("custom_polynomial needs coefficients")
        xs = np.linspace(-A, A, 4097)
        dp = np.polynomial.polynomial.polyval(xs, np.polynomial.polynomial.polyder(params))
        p = np.polynomial.polynomial.polyval(xs, params)
        lip, osc = float(np.abs(dp).max()), float(p.max() - p.min())
    else:
        raise ParameterError(f"unknown observable '{obs_id}' (catalog: {', '.join(_CATALOG)})")
    L = lip if eta == 1.0 else lip**eta * osc ** (1.0 - eta)
    if obs_id == "identity":
        sup = A
    elif obs_id == "cosine2pi":
        sup = 1.0
    elif obs_id == "abs_shift":
        sup = A + abs(params[0])
    else:
        sup = float(np.abs(np.polynomial.polynomial.polyval(np.linspace(-A, A, 4097), params)).max())
    return Observable(obs_id, eta, L, tuple(float(p) for p in params), sup)


def holder_ratio(obs: Observable, bound_A: float, pairs: int = 10_000, seed: int = 2024) -> float:
    """Max of |u(x)-u(y)| / (L_u ||x-y||^eta) over random pairs (should be <= 1)."""
    u = uniform_at(seed, np.arange(2 * pairs, dtype=np.uint64))
    x = (2.0 * u[:pairs] - 1.0) * bound_A
    y = (2.0 * u[pairs:] - 1.0) * bound_A
    num = np.abs(obs(x[:, None]) - obs(y[:, None]))
    den = obs.L_u * np.abs(x - y) ** obs.eta
    ok = den > 0
    return float((num[ok] / den[ok]).max())


def _arcsine_moment(k: int) -> float:
    # E x^k under the density 1/(pi sqrt(x(1-x))) on [0,1]
    return float(comb(2 * k, k, exact=True)) / 4.0**k


def analytic_mean(obs: Observable, map_spec: MapSpec) -> float | None:
    """Exact E u(X_1) when the invariant law is known in closed form.

    The doubling and tent maps preserve Lebesgue measure on [0, 1]; the
    quadratic map at a = 4 has the arcsine density.  Returns None when no
    closed form is available (then use long_run_mean).
    """
    raw = None
    if map_spec.map_id in ("doubling", "tent", "iid_uniform"):
        if obs.obs_id == "identity":
            raw = 0.5
        elif obs.obs_id == "cosine2pi":
            raw = 0.0
        elif obs.obs_id == "abs_shift":
            c = obs.params[0]
            raw = (c * c + (1.0 - c) ** 2) / 2.0
        else:
            raw = sum(c / (k + 1.0) for k, c in enumerate(obs.params))
    elif map_spec.map_id == "logistic" and map_spec.analytic_density == "arcsine":
        if obs.obs_id == "identity":
            raw = 0.5
        elif obs.obs_id == "cosine2pi":
            raw = -float(j0(np.pi))
        elif obs.obs_id == "custom_polynomial":
            raw = sum(c * _arcsine_moment(k) for k, c in enumerate(obs.params))
    if raw is None:
        return None
    return raw - obs.shift


_MEAN_CACHE: dict = {}


def long_run_mean(obs: Observable, map_spec: MapSpec, n: int = 10_000_000) -> float:
    """Cached long-orbit estimate of E u(X_1) on a fixed reference stream."""
    key = (map_spec.key(), obs.key(), n)
    if key not in _MEAN_CACHE:
        traj = generate_trajectory(map_spec, n, burn_in=1000, seed=TAG_REFERENCE)
        _MEAN_CACHE[key] = float(obs(traj.points).mean())
    return _MEAN_CACHE[key]


def mean_of(obs: Observable, map_spec: MapSpec, n: int = 10_000_000) -> float:
    m = analytic_mean(obs, map_spec)
    return m if m is not None else long_run_mean(obs, map_spec, n)
