"""Empirical measures, exact 1-d Kantorovich distance, KDE, density checks.

The Kantorovich (Wasserstein-1) distance between one-dimensional laws is
the L1 distance between their distribution functions, so it reduces to
piecewise integration of |F1 - F2|.  Every law here exposes its CDF, the
antiderivative of its CDF and a generalized inverse; between consecutive
atoms of a step function the integral of |c - F| then has a closed form,
which makes the distance exact (no quadrature) for every pairing used in
the experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, ParameterError
from .parallel import map_chunks
from .process import MapSpec, ensemble_points, generate_trajectory
from .rng import TAG_REFERENCE, derive_seed


# ---------------------------------------------------------------------------
# atomic measures


class AtomicMeasure:
    """Finitely supported probability measure with sorted atoms.

    Weights must be positive and sum to 1 within 1e-12.  Provides the CDF
    interface consumed by the Kantorovich engine.
    """

    def __init__(self, atoms, weights=None):
        atoms = np.asarray(atoms, dtype=float).reshape(-1)
        if atoms.size == 0:
            raise DomainError("empty atom list")
        if weights is None:
            order = np.argsort(atoms, kind="stable")
            self.atoms = atoms[order]
            self.weights = np.full(atoms.size, 1.0 / atoms.size)
        else:
            weights = np.asarray(weights, dtype=float).reshape(-1)
            if weights.shape != atoms.shape:
                raise DomainError("atoms and weights differ in length")
            order = np.argsort(atoms, kind="stable")
            self.atoms = atoms[order]
            self.weights = weights[order]
        total = float(self.weights.sum())
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"weights sum to {total}, expected 1")
        self.cum_weights = np.cumsum(self.weights)
        self.cum_weights[-1] = 1.0
        self._cdf_integral_table = None

    @property
    def n(self) -> int:
        return self.atoms.size

    def support(self):
        return float(self.atoms[0]), float(self.atoms[-1])

    def _table(self):
        if self._cdf_integral_table is None:
            gaps = np.diff(self.atoms)
            self._cdf_integral_table = np.concatenate(
                [[0.0], np.cumsum(self.cum_weights[:-1] * gaps)]
            )
        return self._cdf_integral_table

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.atoms, t, side="right")
        return np.where(idx == 0, 0.0, self.cum_weights[np.maximum(idx - 1, 0)])

    def cdf_integral(self, t):
        """A(t) = integral of the CDF from below the support up to t."""
        t = np.asarray(t, dtype=float)
        tab = self._table()
        idx = np.searchsorted(self.atoms, t, side="right") - 1
        safe = np.maximum(idx, 0)
        val = tab[safe] + self.cum_weights[safe] * (t - self.atoms[safe])
        return np.where(idx < 0, 0.0, val)

    def quantile(self, c):
        c = np.asarray(c, dtype=float)
        idx = np.minimum(np.searchsorted(self.cum_weights, c, side="left"), self.n - 1)
        return self.atoms[idx]

    def integral_one_minus_cdf(self, a):
        hi = self.atoms[-1]
        a = min(float(a), hi)
        return (hi - a) - (float(self.cdf_integral(hi)) - float(self.cdf_integral(a)))


class EmpiricalMeasure(AtomicMeasure):
    """Uniform-weight empirical measure of a 1-d sample."""

    def __init__(self, values):
        super().__init__(values)

    @classmethod
    def from_trajectory(cls, traj) -> "EmpiricalMeasure":
        return cls(traj.points[:, 0])


# ---------------------------------------------------------------------------
# smooth laws


@dataclass(frozen=True)
class DensityModel:
    """Probability density on a bounded interval with closed-form CDF data.

    kind: analytic_uniform | analytic_logistic4 | tabulated.  The pdf is
    defined as 0 at and outside the open support, so grid evaluations of
    singular densities stay finite.
    """

    kind: str
    lo: float
    hi: float
    grid: np.ndarray | None = None
    pdf_values: np.ndarray | None = None

    def support(self):
        return self.lo, self.hi

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "analytic_uniform":
            inside = (x > self.lo) & (x < self.hi)
            return np.where(inside, 1.0 / (self.hi - self.lo), 0.0)
        if self.kind == "analytic_logistic4":
            v = x * (1.0 - x)
            out = np.zeros_like(v)
            ok = v > 0
            out[ok] = 1.0 / (np.pi * np.sqrt(v[ok]))
            return out
        return np.interp(x, self.grid, self.pdf_values, left=0.0, right=0.0)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "analytic_uniform":
            return np.clip((t - self.lo) / (self.hi - self.lo), 0.0, 1.0)
        if self.kind == "analytic_logistic4":
            return (2.0 / np.pi) * np.arcsin(np.sqrt(np.clip(t, 0.0, 1.0)))
        cg = self._tab_cdf()
        return np.interp(t, self.grid, cg, left=0.0, right=1.0)

    def cdf_integral(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "analytic_uniform":
            tt = np.clip(t, self.lo, self.hi)
            inner = 0.5 * (tt - self.lo) ** 2 / (self.hi - self.lo)
            return inner + np.maximum(t - self.hi, 0.0)
        if self.kind == "analytic_logistic4":
            tt = np.clip(t, 0.0, 1.0)
            th = np.arcsin(np.sqrt(tt))
            inner = (2.0 / np.pi) * (-th * np.cos(2 * th) / 2.0 + np.sin(2 * th) / 4.0)
            return inner + np.maximum(t - 1.0, 0.0)
        ci = self._tab_cdf_integral()
        tt = np.clip(t, self.grid[0], self.grid[-1])
        base = np.interp(tt, self.grid, ci)
        return base + np.maximum(t - self.grid[-1], 0.0)

    def quantile(self, c):
        c = np.asarray(c, dtype=float)
        if self.kind == "analytic_uniform":
            return self.lo + np.clip(c, 0.0, 1.0) * (self.hi - self.lo)
        if self.kind == "analytic_logistic4":
            return np.sin(0.5 * np.pi * np.clip(c, 0.0, 1.0)) ** 2
        cg = self._tab_cdf()
        return np.interp(c, cg, self.grid)

    def integral_one_minus_cdf(self, a):
        a = min(float(a), self.hi)
        return (self.hi - a) - (float(self.cdf_integral(self.hi)) - float(self.cdf_integral(a)))

    def _tab_cdf(self):
        dx = np.diff(self.grid)
        mids = 0.5 * (self.pdf_values[:-1] + self.pdf_values[1:])
        cg = np.concatenate([[0.0], np.cumsum(mids * dx)])
        return cg / cg[-1]

    def _tab_cdf_integral(self):
        cg = self._tab_cdf()
        dx = np.diff(self.grid)
        mids = 0.5 * (cg[:-1] + cg[1:])
        return np.concatenate([[0.0], np.cumsum(mids * dx)])

    def singular_points(self):
        if self.kind == "analytic_logistic4":
            return (self.lo, self.hi)
        return ()


def make_density(kind: str, grid=None, pdf_values=None) -> DensityModel:
    if kind == "analytic_uniform":
        return DensityModel(kind, 0.0, 1.0)
    if kind == "analytic_logistic4":
        return DensityModel(kind, 0.0, 1.0)
    if kind == "tabulated":
        grid = np.asarray(grid, dtype=float)
        pdf_values = np.asarray(pdf_values, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ParameterError("tabulated density needs a strictly increasing grid")
        if np.any(pdf_values < 0):
            raise ParameterError("tabulated density must be nonnegative")
        mass = float(np.trapezoid(pdf_values, grid))
        if abs(mass - 1.0) > 1e-6:
            raise ParameterError(f"tabulated density integrates to {mass}, expected 1 +- 1e-6")
        return DensityModel(kind, float(grid[0]), float(grid[-1]), grid, pdf_values)
    raise ParameterError(f"unknown density kind '{kind}'")


@dataclass(frozen=True)
class GaussianLaw:
    """Centered Gaussian, used by the almost-sure CLT distance."""

    sigma2: float

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise DomainError(f"sigma^2 must be positive, got {self.sigma2}")

    @property
    def sigma(self):
        return math.sqrt(self.sigma2)

    def support(self):
        return -math.inf, math.inf

    def cdf(self, t):
        from scipy.special import ndtr

        return ndtr(np.asarray(t, dtype=float) / self.sigma)

    def cdf_integral(self, t):
        from scipy.special import ndtr

        z = np.asarray(t, dtype=float) / self.sigma
        return self.sigma * (z * ndtr(z) + np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi))

    def quantile(self, c):
        from scipy.special import ndtri

        return self.sigma * ndtri(np.clip(np.asarray(c, dtype=float), 1e-300, 1 - 1e-16))

    def integral_one_minus_cdf(self, a):
        # integral_a^inf (1 - F) = A(a) - a since t - A(t) -> 0 at +inf
        return float(self.cdf_integral(a)) - float(a)


# ---------------------------------------------------------------------------
# Kantorovich distance


def _kappa_atoms_vs_law(atoms: np.ndarray, cum_weights: np.ndarray, law) -> float:
    """Exact integral of |F_atoms - F_law| over the whole line."""
    a = atoms
    total = float(law.cdf_integral(a[0]))  # left tail: F_atoms = 0
    total += law.integral_one_minus_cdf(a[-1])  # right tail: F_atoms = 1
    if a.size > 1:
        c = cum_weights[:-1]
        lo, hi = a[:-1], a[1:]
        tstar = np.clip(law.quantile(c), lo, hi)
        A_lo = law.cdf_integral(lo)
        A_hi = law.cdf_integral(hi)
        A_ts = law.cdf_integral(tstar)
        below = c * (tstar - lo) - (A_ts - A_lo)  # where F_law <= c
        above = (A_hi - A_ts) - c * (hi - tstar)  # where F_law >= c
        total += float(np.sum(below + above))
    return total


def kantorovich_1d(m1, m2) -> float:
    """Kantorovich (Wasserstein-1) distance between two 1-d laws.

    Exact piecewise evaluation whenever at least one side is atomic.  Both
    sides must have bounded support unless one is atomic (the Gaussian
    case is reached through the almost-sure CLT wrapper).
    """
    a1, a2 = isinstance(m1, AtomicMeasure), isinstance(m2, AtomicMeasure)
    if a1 and a2:
        small, big = (m1, m2) if m1.n <= m2.n else (m2, m1)
        return _kappa_atoms_vs_law(small.atoms, small.cum_weights, big)
    if a1 or a2:
        atomic, law = (m1, m2) if a1 else (m2, m1)
        return _kappa_atoms_vs_law(atomic.atoms, atomic.cum_weights, law)
    lo1, hi1 = m1.support()
    lo2, hi2 = m2.support()
    if not all(map(math.isfinite, (lo1, hi1, lo2, hi2))):
        raise DomainError("kantorovich_1d needs bounded support for non-atomic laws")
    lo, hi = min(lo1, lo2), max(hi1, hi2)
    val, _ = quad(
        lambda t: abs(float(m1.cdf(t)) - float(m2.cdf(t))),
        lo,
        hi,
        epsabs=1e-8,
        epsrel=1e-8,
        limit=400,
        points=sorted({lo1, hi1, lo2, hi2}),
    )
    return float(val)


@dataclass(frozen=True)
class KantorovichRow:
    n: int
    kappa_mean: float
    kappa_var: float
    kappa_var_stderr: float
    var_bound: float  # D / n with the supplied D
    smoothed_mean_bound: float  # 2 delta + c_fit / (delta^eta sqrt(n))


def kantorovich_convergence(
    map_spec: MapSpec,
    n_grid,
    replicas: int,
    master_seed: int,
    reference_n: int | None = None,
    eta: float = 1.0,
    D: float = 1.0,
    burn_in: int = 1000,
):
    """Monte Carlo table of kappa(E_n, mu) against the variance bound D/n.

    mu is approximated by a frozen reference empirical measure of size
    reference_n (default 100x the largest n).  The smoothed mean bound
    evaluates 2 delta + c_fit / (delta^eta sqrt(n)) at
    delta = n^(-1/(2(1+eta))) with c_fit fitted from the data.
    """
    n_grid = sorted(int(n) for n in n_grid)
    if reference_n is None:
        reference_n = 100 * n_grid[-1]
    ref_traj = generate_trajectory(
        map_spec, reference_n, burn_in, derive_seed(master_seed, TAG_REFERENCE)
    )
    ref = EmpiricalMeasure.from_trajectory(ref_traj)

    means, variances, stderrs = [], [], []
    for n in n_grid:
        pts = ensemble_points(map_spec, replicas, n, burn_in, master_seed)

        def eval_chunk(lo, hi, _pts=pts):
            return np.array(
                [kantorovich_1d(EmpiricalMeasure(_pts[r, :, 0]), ref) for r in range(lo, hi)]
            )

        vals = np.concatenate(map_chunks(eval_chunk, replicas))
        means.append(float(vals.mean()))
        v, se = _variance_with_stderr(vals)
        variances.append(v)
        stderrs.append(se)

    deltas = np.array([n ** (-1.0 / (2.0 * (1.0 + eta))) for n in n_grid])
    resid = np.array(means) - 2.0 * deltas
    c_fit = float(np.max(np.maximum(resid, 0.0) * deltas**eta * np.sqrt(n_grid)))
    rows = [
        KantorovichRow(
            n,
            means[i],
            variances[i],
            stderrs[i],
            D / n,
            2.0 * deltas[i] + c_fit / (deltas[i] ** eta * math.sqrt(n)),
        )
        for i, n in enumerate(n_grid)
    ]
    return rows, ref


def _variance_with_stderr(vals: np.ndarray) -> tuple[float, float]:
    """Unbiased sample variance and its standard error (fourth-moment formula)."""
    R = vals.size
    if R < 2:
        raise DomainError("need at least 2 replicas for a variance")
    m = vals.mean()
    d = vals - m
    s2 = float(np.sum(d * d) / (R - 1))
    m4 = float(np.mean(d**4))
    var_s2 = (m4 - (R - 3.0) / (R - 1.0) * s2 * s2) / R
    return s2, math.sqrt(max(var_s2, 0.0))


# ---------------------------------------------------------------------------
# kernel density estimation


@dataclass(frozen=True)
class Kernel:
    """Nonnegative Lipschitz kernel with compact support and unit mass."""

    kernel_id: str
    radius: float
    lipschitz: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kernel_id == "triangle":
            return np.clip(1.0 - np.abs(t), 0.0, None)
        return 0.75 * np.clip(1.0 - t * t, 0.0, None)  # epanechnikov


def make_kernel(kernel_id: str) -> Kernel:
    if kernel_id == "triangle":
        return Kernel("triangle", 1.0, 1.0)
    if kernel_id == "epanechnikov":
        return Kernel("epanechnikov", 1.0, 1.5)
    raise ParameterError(f"unknown kernel '{kernel_id}' (triangle, epanechnikov)")


def kde(values, kernel: Kernel, bandwidth: float, grid) -> np.ndarray:
    """Empirical density h(s) = (1/(n a)) sum_j psi((s - X_j)/a) on the grid."""
    if bandwidth <= 0:
        raise DomainError(f"bandwidth must be positive, got {bandwidth}")
    values = np.asarray(values, dtype=float).reshape(-1)
    grid = np.asarray(grid, dtype=float)
    h = np.zeros_like(grid)
    step = max(1, int(4e6 // max(grid.size, 1)))
    for c in range(0, values.size, step):
        chunk = values[c : c + step]
        h += kernel((grid[:, None] - chunk[None, :]) / bandwidth).sum(axis=1)
    return h / (values.size * bandwidth)


def kde_l1_error(h_values, grid, density: DensityModel) -> float:
    """Trapezoid integral of |h - Phi| on the common grid."""
    h_values = np.asarray(h_values, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if h_values.shape != grid.shape:
        raise DomainError("kde values and grid have different shapes")
    return float(np.trapezoid(np.abs(h_values - density.pdf(grid)), grid))


# ---------------------------------------------------------------------------
# Besov L1 shift modulus


def _quad_regularized(f, a: float, b: float) -> float:
    """Adaptive quadrature of f on [a, b] after s = a + (b-a) sin^2(pi u / 2).

    The substitution sends both endpoints to zeros of ds/du of order one,
    which cancels inverse-square-root endpoint singularities exactly.
    """
    if b <= a:
        return 0.0
    span = b - a

    def g(u):
        s = a + span * math.sin(0.5 * math.pi * u) ** 2
        ds = span * 0.5 * math.pi * math.sin(math.pi * u)
        return f(s) * ds

    val, _ = quad(g, 0.0, 1.0, epsabs=1e-11, epsrel=1e-11, limit=400)
    return float(val)


def besov_modulus(density: DensityModel, delta: float) -> float:
    """L1 modulus integral |Phi(s) - Phi(s - delta)| ds.

    Segments where only one shifted copy is supported reduce to CDF
    differences and are exact; the overlap is integrated by regularized
    quadrature with breakpoints at every support endpoint of either copy.
    """
    if delta < 0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    if delta == 0.0:
        return 0.0
    lo, hi = density.support()
    if delta >= hi - lo:
        return 2.0  # disjoint supports: both copies contribute full mass
    # only Phi(s): s in [lo, lo + delta); only Phi(s - delta): s in (hi, hi + delta]
    exact = float(density.cdf(lo + delta) - density.cdf(lo))
    exact += float(1.0 - density.cdf(hi - delta))
    # overlap [lo + delta, hi], split at interior singular points of either copy
    breaks = {lo + delta, hi}
    for s in density.singular_points():
        for cand in (s, s + delta):
            if lo + delta < cand < hi:
                breaks.add(cand)
    pts = sorted(breaks)
    f = lambda s: abs(float(density.pdf(s)) - float(density.pdf(s - delta)))
    overlap = sum(_quad_regularized(f, pts[i], pts[i + 1]) for i in range(len(pts) - 1))
    return exact + overlap


def fit_besov_exponent(density: DensityModel, delta_grid) -> tuple[float, np.ndarray]:
    """Log-log slope tau-hat of the shift modulus over the delta grid."""
    deltas = np.asarray(sorted(float(d) for d in delta_grid))
    if deltas.size < 2 or deltas[0] <= 0:
        raise DomainError("need at least two positive deltas")
    mods = np.array([besov_modulus(density, d) for d in deltas])
    A = np.vstack([np.ones_like(deltas), np.log(deltas)]).T
    coef, *_ = np.linalg.lstsq(A, np.log(mods), rcond=None)
    return float(coef[1]), mods


# ---------------------------------------------------------------------------
# measure Holder regularity (mu(A) <= C m(A)^rho)


@dataclass(frozen=True)
class MeasureHolderReport:
    rho_grid: np.ndarray
    lengths: np.ndarray  # Lebesgue measures of the intervals, decreasing
    ratios: np.ndarray  # shape (len(rho_grid), len(intervals)): mu(A)/m(A)^rho
    rho_hat: float


def measure_holder_check(
    map_spec: MapSpec,
    intervals,
    rho_grid,
    orbit_n: int = 10_000_000,
    seed: int = 0,
    slack: float = 0.15,
) -> MeasureHolderReport:
    """Largest exponent rho with mu(A)/m(A)^rho nonincreasing as m(A) -> 0.

    mu is estimated from one long orbit; intervals must be sorted by
    decreasing length.  Ratios may wobble by the Monte Carlo slack factor
    without disqualifying an exponent.
    """
    traj = generate_trajectory(map_spec, orbit_n, seed=derive_seed(seed, TAG_REFERENCE))
    xs = np.sort(traj.points[:, 0])
    iv = [(float(a), float(b)) for a, b in intervals]
    lengths = np.array([b - a for a, b in iv])
    if np.any(np.diff(lengths) > 0):
        raise DomainError("intervals must be sorted by decreasing length")
    mu = np.array(
        [
            (np.searchsorted(xs, b, "right") - np.searchsorted(xs, a, "left")) / xs.size
            for a, b in iv
        ]
    )
    rho_grid = np.asarray(sorted(float(r) for r in rho_grid))
    ratios = mu[None, :] / lengths[None, :] ** rho_grid[:, None]
    rho_hat = float("nan")
    for i, rho in enumerate(rho_grid):
        r = ratios[i]
        if np.all(r[1:] <= r[:-1] * (1.0 + slack)):
            rho_hat = float(rho)
    return MeasureHolderReport(rho_grid, lengths, ratios, rho_hat)
