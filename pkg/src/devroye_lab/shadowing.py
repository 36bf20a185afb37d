"""Shadowing distance and mismatch count against sampled trajectory banks.

The set of process trajectories lying in E is infinite; it is stood in
for by a finite bank sampled from the process conditioned on E.  The inf
over the bank upper-bounds the true shadowing functional, which is the
conservative direction when checking tail bounds: the empirical tail can
only come out too large, never flattered.  Bank-size convergence curves
are reported so the approximation error stays visible.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError
from .process import MapSpec, Trajectory, ensemble_points
from .rng import TAG_QUERY


@dataclass(frozen=True)
class Predicate:
    """E = {trajectories with the first coordinate of X_1 in S}."""

    kind: str  # le | ge | between
    a: float
    b: float = math.nan

    def __call__(self, first_points: np.ndarray) -> np.ndarray:
        x = first_points[:, 0]
        if self.kind == "le":
            return x <= self.a
        if self.kind == "ge":
            return x >= self.a
        return (x >= self.a) & (x <= self.b)

    def describe(self) -> str:
        if self.kind == "le":
            return f"x1<={self.a:g}"
        if self.kind == "ge":
            return f"x1>={self.a:g}"
        return f"x1 in [{self.a:g},{self.b:g}]"


def parse_predicate(text: str) -> Predicate:
    """Accepts 'x1<=c', 'x1>=c' and 'x1 in [a,b]'."""
    s = text.replace(" ", "")
    m = re.fullmatch(r"x1<=([-+0-9.eE]+)", s)
    if m:
        return Predicate("le", float(m.group(1)))
    m = re.fullmatch(r"x1>=([-+0-9.eE]+)", s)
    if m:
        return Predicate("ge", float(m.group(1)))
    m = re.fullmatch(r"x1in\[([-+0-9.eE]+),([-+0-9.eE]+)\]", s)
    if m:
        return Predicate("between", float(m.group(1)), float(m.group(2)))
    raise ParameterError(f"cannot parse predicate '{text}'")


@dataclass(frozen=True)
class TrajectoryBank:
    points: np.ndarray  # (bank_size, n, dim)
    map: MapSpec
    predicate: Predicate
    p_hat: float  # acceptance rate of the rejection sampler

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]


def build_bank(
    map_spec: MapSpec,
    predicate: Predicate,
    bank_size: int,
    n: int,
    master_seed: int,
    burn_in: int = 1000,
    max_draws: int = 1_000_000,
) -> TrajectoryBank:
    """Rejection-sample bank_size trajectories whose X_1 satisfies the predicate."""
    if bank_size < 1:
        raise DomainError(f"bank_size must be >= 1, got {bank_size}")
    accepted = []
    count = 0
    draws = 0
    offset = 0
    batch = max(256, 2 * bank_size)
    while count < bank_size:
        if draws >= max_draws:
            raise DomainError(
                f"predicate {predicate.describe()} not satisfied {bank_size} times "
                f"in {max_draws} draws"
            )
        pts = ensemble_points(map_spec, batch, n, burn_in, master_seed, replica_offset=offset)
        keep = predicate(pts[:, 0, :])
        offset += batch
        draws += batch
        got = pts[keep]
        accepted.append(got)
        count += got.shape[0]
    bank = np.concatenate(accepted, axis=0)[:bank_size]
    p_hat = count / draws  # includes the overshoot of the last batch
    return TrajectoryBank(bank, map_spec, predicate, float(p_hat))


def _step_norms(bank_pts: np.ndarray, query: np.ndarray) -> np.ndarray:
    diff = bank_pts - query[None, :, :]
    if diff.shape[-1] == 1:
        return np.abs(diff[..., 0])
    return np.sqrt((diff * diff).sum(axis=-1))


def shadow_distance(query, bank: TrajectoryBank) -> tuple[float, int]:
    """Z_E: min over the bank of the mean pointwise distance, with argmin."""
    q = query.points if isinstance(query, Trajectory) else np.asarray(query, dtype=float)
    if bank.size == 0:
        raise DomainError("empty bank")
    if q.shape != bank.points.shape[1:]:
        raise DomainError(f"query shape {q.shape} does not match bank {bank.points.shape[1:]}")
    means = _step_norms(bank.points, q).mean(axis=1)
    idx = int(np.argmin(means))  # ties resolve to the lowest bank index
    return float(means[idx]), idx


def mismatch_count(query, bank: TrajectoryBank, eps: float) -> tuple[float, int]:
    """Z'_(E, eps): min over the bank of the mismatch fraction at tolerance eps."""
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")
    q = query.points if isinstance(query, Trajectory) else np.asarray(query, dtype=float)
    if bank.size == 0:
        raise DomainError("empty bank")
    if q.shape != bank.points.shape[1:]:
        raise DomainError(f"query shape {q.shape} does not match bank {bank.points.shape[1:]}")
    fracs = (_step_norms(bank.points, q) > eps).mean(axis=1)
    idx = int(np.argmin(fracs))
    return float(fracs[idx]), idx


@dataclass(frozen=True)
class ShadowBounds:
    n: int
    t: float
    threshold: float  # (t + 2^(4/3) D^(1/3) / P_E) / n^(1/3)
    tail: float  # D / (n^(1/3) t^2)
    threshold_mismatch: float | None  # same with the eps^(2/3) factors
    tail_mismatch: float | None


def shadow_bound_report(n: int, t: float, D: float, P_E: float, eps: float | None = None) -> ShadowBounds:
    """Numeric thresholds and tail probabilities of both shadowing bounds."""
    if not 0.0 < P_E <= 1.0:
        raise DomainError(f"P_E must be in (0, 1], got {P_E}")
    if t <= 0:
        raise DomainError(f"t must be positive, got {t}")
    shift = 2.0 ** (4.0 / 3.0) * D ** (1.0 / 3.0) / P_E
    thr = (t + shift) / n ** (1.0 / 3.0)
    tail = D / (n ** (1.0 / 3.0) * t * t)
    thr2 = tail2 = None
    if eps is not None:
        if eps <= 0:
            raise DomainError(f"eps must be positive, got {eps}")
        thr2 = (t + shift) / (eps ** (2.0 / 3.0) * n ** (1.0 / 3.0))
        tail2 = D / (eps ** (2.0 / 3.0) * n ** (1.0 / 3.0) * t * t)
    return ShadowBounds(n, t, thr, tail, thr2, tail2)


@dataclass(frozen=True)
class ShadowTailRow:
    n: int
    t: float
    threshold: float
    empirical_p: float
    tail_bound: float
    mc_sigma: float
    passed: bool


@dataclass(frozen=True)
class ShadowMomentRow:
    n: int
    mean_z2: float
    bound: float  # sqrt(D) / sqrt(n P_E)
    passed: bool


@dataclass(frozen=True)
class ShadowExperimentResult:
    tail_rows: list
    moment_rows: list
    mismatch_rows: list  # second-theorem tails for Z' at the given eps
    bank_curve: list  # (n, bank_prefix, median Z) rows: approximation visibility
    p_hat: float


def shadow_experiment(
    map_spec: MapSpec,
    predicate: Predicate,
    n_grid,
    bank_size: int,
    queries: int,
    t_grid,
    master_seed: int,
    D: float,
    burn_in: int = 1000,
    eps: float | None = None,
) -> ShadowExperimentResult:
    """Empirical tail of Z_E against the theorem bound, per n and t.

    Queries are unconditioned process trajectories.  The tail check allows
    3 binomial MC standard deviations; the second-moment check compares
    the plain empirical mean of Z^2 with sqrt(D)/sqrt(n P_E).  When eps is
    given, the mismatch fraction Z' is checked against the second-theorem
    bound with its eps^(2/3) factors.
    """
    tail_rows, moment_rows, mismatch_rows, curve = [], [], [], []
    p_hat = math.nan
    for n in sorted(int(v) for v in n_grid):
        bank = build_bank(map_spec, predicate, bank_size, n, master_seed, burn_in)
        p_hat = bank.p_hat
        qpts = ensemble_points(map_spec, queries, n, burn_in, TAG_QUERY + master_seed)
        dists = np.empty((queries, bank.size))
        zprime = np.empty(queries) if eps is not None else None
        for i in range(queries):
            norms = _step_norms(bank.points, qpts[i])
            dists[i] = norms.mean(axis=1)
            if eps is not None:
                zprime[i] = (norms > eps).mean(axis=1).min()
        z = dists.min(axis=1)
        for t in t_grid:
            b = shadow_bound_report(n, float(t), D, bank.p_hat, eps=eps)
            p_emp = float(np.mean(z >= b.threshold))
            sigma = math.sqrt(max(p_emp * (1.0 - p_emp), 1.0 / queries) / queries)
            tail_rows.append(
                ShadowTailRow(
                    n, float(t), b.threshold, p_emp, b.tail, sigma,
                    p_emp <= b.tail + 3.0 * sigma,
                )
            )
            if eps is not None:
                p_mis = float(np.mean(zprime >= b.threshold_mismatch))
                sig_m = math.sqrt(max(p_mis * (1.0 - p_mis), 1.0 / queries) / queries)
                mismatch_rows.append(
                    ShadowTailRow(
                        n, float(t), b.threshold_mismatch, p_mis, b.tail_mismatch, sig_m,
                        p_mis <= b.tail_mismatch + 3.0 * sig_m,
                    )
                )
        ez2 = float(np.mean(z * z))
        bound = math.sqrt(D) / math.sqrt(n * bank.p_hat)
        moment_rows.append(ShadowMomentRow(n, ez2, bound, ez2 <= bound))
        prefix = 10
        while prefix <= bank.size:
            curve.append((n, prefix, float(np.median(dists[:, :prefix].min(axis=1)))))
            prefix *= 10
    return ShadowExperimentResult(tail_rows, moment_rows, mismatch_rows, curve, p_hat)
