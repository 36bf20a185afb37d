"""Map catalog and trajectory generation.

Every other module consumes bounded stationary samples through the two
types defined here: MapSpec (the dynamics, its parameters and its almost
sure bound) and Trajectory (a finite orbit with full provenance).

Arithmetic note: the doubling and tent maps collapse to a fixed point in
double precision within ~53 iterations, because both act as bit shifts on
the mantissa.  They are therefore iterated exactly over rationals p / Q
with the large odd denominator Q = 5^26: doubling is p -> 2p mod Q and
the tent map is p -> min(2p, 2Q - 2p), both exact in 64-bit integers.
Since 2 is a primitive root modulo 5^k the generic orbit period is
4 * 5^25 (~1.2e18), so long orbits stay nondegenerate and equidistribute
without any additive noise (per-step float jitter was tried first and
rejected: rounding its sub-ulp scale onto the mantissa lattice biased the
invariant measure measurably).  Recorded points are the double-precision
projections p / Q.  The quadratic and Lozi maps iterate in doubles
exactly as written.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError
from .rng import derive_seed, splitmix_at, uniform_at

DEFAULT_BURN_IN = 1000
RATIONAL_DENOMINATOR = 5**26  # odd, and ord(2 mod 5^26) = 4 * 5^25

_CATALOG = ("doubling", "tent", "logistic", "iid_uniform", "lozi")


@dataclass(frozen=True)
class MapSpec:
    """A catalog map: identifier, parameters, dimension and a.s. bound."""

    map_id: str
    params: tuple
    dim: int
    bound_A: float
    analytic_density: str | None = None
    rational_q: int | None = None  # exact integer-state denominator
    init_box: tuple = ((0.0, 1.0),)

    def key(self) -> str:
        ps = ",".join(f"{p:.17g}" for p in self.params)
        return f"{self.map_id}({ps})d{self.dim}" if ps else f"{self.map_id}d{self.dim}"


def make_map(map_id: str, params=None, dim: int | None = None) -> MapSpec:
    """Build a MapSpec for a catalog map, validating parameter ranges."""
    if map_id == "doubling":
        if params:
            raise ParameterError("doubling map takes no parameters")
        return MapSpec("doubling", (), 1, 1.0, None, RATIONAL_DENOMINATOR)
    if map_id == "tent":
        if params:
            raise ParameterError("tent map takes no parameters")
        return MapSpec("tent", (), 1, 1.0, None, RATIONAL_DENOMINATOR)
    if map_id == "logistic":
        a = 4.0 if not params else float(params[0])
        if not 0.0 < a <= 4.0:
            raise ParameterError(f"logistic parameter a must be in (0, 4], got {a}")
        density = "arcsine" if a == 4.0 else None
        return MapSpec("logistic", (a,), 1, 1.0, density)
    if map_id == "iid_uniform":
        d = int(dim) if dim is not None else 1
        if d not in (1, 2):
            raise ParameterError(f"iid_uniform supports dim 1 or 2, got {d}")
        box = tuple(((0.0, 1.0),) * d)
        return MapSpec("iid_uniform", (), d, float(np.sqrt(d)), "uniform", None, box)
    if map_id == "lozi":
        if params:
            a, b = float(params[0]), float(params[1])
        else:
            a, b = 1.7, 0.5
        if not (0.0 < a < 2.0 and 0.0 < abs(b) < 1.0):
            raise ParameterError(f"lozi parameters outside supported range: a={a}, b={b}")
        # bound_A = 2 is a clipped check on the classical attractor, not a rescale
        return MapSpec("lozi", (a, b), 2, 2.0, None, None, ((-0.1, 0.1), (-0.1, 0.1)))
    raise ParameterError(f"unknown map '{map_id}' (catalog: {', '.join(_CATALOG)})")


@dataclass(frozen=True)
class Trajectory:
    """A finite orbit segment with provenance (map, seed, burn-in)."""

    points: np.ndarray  # shape (n, dim)
    map: MapSpec
    seed: int
    burn_in: int

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def x1(self) -> np.ndarray:
        """First coordinate of every point, shape (n,)."""
        return self.points[:, 0]


def _check_bound(points: np.ndarray, spec: MapSpec) -> None:
    norms = np.abs(points[..., 0]) if spec.dim == 1 else np.sqrt((points**2).sum(axis=-1))
    worst = float(norms.max())
    if worst > spec.bound_A:
        raise DomainError(
            f"{spec.map_id} trajectory violated its a.s. bound: |x| = {worst} > {spec.bound_A}"
        )


def _initial_states(spec: MapSpec, seeds: np.ndarray) -> np.ndarray:
    """Initial condition per replica, uniform over the map's init box."""
    out = np.empty((seeds.size, spec.dim))
    for j, (lo, hi) in enumerate(spec.init_box):
        u = np.array([uniform_at(int(s), np.uint64(j))[()] for s in seeds])
        out[:, j] = lo + (hi - lo) * u
    return out


def _iid_points(spec: MapSpec, seed: int, n: int, burn_in: int, x0) -> np.ndarray:
    d = spec.dim
    # point k is the state after burn_in + k fresh draws; state 0 is the init draw
    steps = burn_in + np.arange(n)
    pts = np.empty((n, d))
    for j in range(d):
        counters = np.where(steps == 0, np.uint64(j), np.uint64(d) + (steps.astype(np.uint64) - 1) * np.uint64(d) + np.uint64(j))
        pts[:, j] = uniform_at(seed, counters)
    if x0 is not None and burn_in == 0:
        pts[0] = np.asarray(x0, dtype=float)
    return pts


def _initial_numerators(spec: MapSpec, seeds: np.ndarray, x0) -> np.ndarray:
    q = spec.rational_q
    if x0 is not None:
        x = float(np.asarray(x0).reshape(-1)[0])
        p = int(round(x * q))
        p = min(max(p, 1), q - 1)
        return np.full(seeds.size, p, dtype=np.uint64)
    bits = np.array([int(splitmix_at(int(s), np.uint64(0))) for s in seeds], dtype=np.uint64)
    return np.uint64(1) + bits % np.uint64(q - 1)


def _orbit_rational_scalar(spec: MapSpec, seed: int, n: int, burn_in: int, x0) -> np.ndarray:
    """Exact integer dynamics p/Q for the doubling and tent maps."""
    q = spec.rational_q
    p = int(_initial_numerators(spec, np.array([seed], dtype=np.uint64), x0)[0])
    tent = spec.map_id == "tent"
    fq = float(q)
    out = np.empty(n)
    k = 0
    for t in range(burn_in + n):
        if t >= burn_in:
            out[k] = p / fq
            k += 1
            if k == n:
                break
        m = 2 * p
        if tent:
            p = m if m <= q else 2 * q - m
        else:
            p = m if m < q else m - q
    return out.reshape(n, 1)


def _orbit_rational_vector(spec: MapSpec, seeds: np.ndarray, n: int, burn_in: int, x0) -> np.ndarray:
    q = np.uint64(spec.rational_q)
    p = _initial_numerators(spec, seeds, x0)
    tent = spec.map_id == "tent"
    fq = float(spec.rational_q)
    out = np.empty((seeds.size, n))
    k = 0
    for t in range(burn_in + n):
        if t >= burn_in:
            out[:, k] = p / fq
            k += 1
            if k == n:
                break
        m = p + p
        if tent:
            p = np.where(m <= q, m, (q + q) - m)
        else:
            p = np.where(m < q, m, m - q)
    return out[:, :, None]


def _orbit_scalar_1d(spec: MapSpec, seed: int, n: int, burn_in: int, x0) -> np.ndarray:
    """Single-replica fast path: plain Python loop over C doubles."""
    if spec.rational_q is not None:
        return _orbit_rational_scalar(spec, seed, n, burn_in, x0)
    if x0 is None:
        x = float(_initial_states(spec, np.array([seed]))[0, 0])
    else:
        x = float(np.asarray(x0).reshape(-1)[0])
    out = np.empty(n)
    a = spec.params[0] if spec.params else 0.0
    k = 0
    for t in range(burn_in + n):
        if t >= burn_in:
            out[k] = x
            k += 1
            if k == n:
                break
        x = a * x * (1.0 - x)  # logistic
    return out.reshape(n, 1)


def _orbit_vector_1d(spec: MapSpec, seeds: np.ndarray, n: int, burn_in: int, x0) -> np.ndarray:
    if spec.rational_q is not None:
        return _orbit_rational_vector(spec, seeds, n, burn_in, x0)
    R = seeds.size
    if x0 is None:
        x = _initial_states(spec, seeds)[:, 0]
    else:
        x = np.full(R, float(np.asarray(x0).reshape(-1)[0]))
    out = np.empty((R, n))
    a = spec.params[0] if spec.params else 0.0
    k = 0
    for t in range(burn_in + n):
        if t >= burn_in:
            out[:, k] = x
            k += 1
            if k == n:
                break
        x = a * x * (1.0 - x)
    return out[:, :, None]


def _orbit_lozi(spec: MapSpec, seeds: np.ndarray, n: int, burn_in: int, x0) -> np.ndarray:
    a, b = spec.params
    R = seeds.size
    if x0 is None:
        st = _initial_states(spec, seeds)
        x, y = st[:, 0].copy(), st[:, 1].copy()
    else:
        p = np.asarray(x0, dtype=float).reshape(-1)
        x, y = np.full(R, p[0]), np.full(R, p[1])
    if R == 1:  # scalar fast path, same C-double arithmetic as the array one
        xs, ys = float(x[0]), float(y[0])
        out = np.empty((1, n, 2))
        k = 0
        for t in range(burn_in + n):
            if t >= burn_in:
                out[0, k, 0] = xs
                out[0, k, 1] = ys
                k += 1
                if k == n:
                    break
            xs, ys = 1.0 + ys - a * abs(xs), b * xs
        return out
    out = np.empty((R, n, 2))
    k = 0
    for t in range(burn_in + n):
        if t >= burn_in:
            out[:, k, 0] = x
            out[:, k, 1] = y
            k += 1
            if k == n:
                break
        x, y = 1.0 + y - a * np.abs(x), b * x
    return out


def generate_trajectory(
    map_spec: MapSpec,
    n: int,
    burn_in: int = DEFAULT_BURN_IN,
    seed: int = 0,
    x0=None,
) -> Trajectory:
    """One orbit of length n, recorded after burn_in iterations.

    The initial condition is drawn uniformly from the map's init box via
    the trajectory's counter stream; pass x0 to force it instead.  Output
    is bit-identical to the corresponding row of ensemble_points.
    """
    if n < 1:
        raise DomainError(f"trajectory length must be >= 1, got {n}")
    if burn_in < 0:
        raise DomainError(f"burn_in must be >= 0, got {burn_in}")
    if map_spec.map_id == "iid_uniform":
        pts = _iid_points(map_spec, seed, n, burn_in, x0)
    elif map_spec.map_id == "lozi":
        pts = _orbit_lozi(map_spec, np.array([seed]), n, burn_in, x0)[0]
    else:
        pts = _orbit_scalar_1d(map_spec, seed, n, burn_in, x0)
    _check_bound(pts, map_spec)
    pts.setflags(write=False)
    return Trajectory(pts, map_spec, seed, burn_in)


def ensemble_points(
    map_spec: MapSpec,
    replicas: int,
    n: int,
    burn_in: int = DEFAULT_BURN_IN,
    master_seed: int = 0,
    x0=None,
    replica_offset: int = 0,
) -> np.ndarray:
    """Lockstep ensemble, shape (replicas, n, dim).

    Replica r uses the derived seed derive_seed(master_seed, replica_offset
    + r); rows are bit-identical to generate_trajectory with that seed,
    independent of how the ensemble is chunked or threaded.
    """
    if replicas < 1:
        raise DomainError(f"replicas must be >= 1, got {replicas}")
    if n < 1:
        raise DomainError(f"trajectory length must be >= 1, got {n}")
    seeds = np.array(
        [derive_seed(master_seed, replica_offset + r) for r in range(replicas)], dtype=np.uint64
    )
    if map_spec.map_id == "iid_uniform":
        pts = np.stack([_iid_points(map_spec, int(s), n, burn_in, x0) for s in seeds])
    elif map_spec.map_id == "lozi":
        pts = _orbit_lozi(map_spec, seeds, n, burn_in, x0)
    elif replicas == 1:
        pts = _orbit_scalar_1d(map_spec, int(seeds[0]), n, burn_in, x0)[None, :, :]
    else:
        pts = _orbit_vector_1d(map_spec, seeds, n, burn_in, x0)
    _check_bound(pts, map_spec)
    return pts


def sample_ensemble(
    map_spec: MapSpec,
    replicas: int,
    n: int,
    burn_in: int = DEFAULT_BURN_IN,
    master_seed: int = 0,
) -> list[Trajectory]:
    """Ensemble as Trajectory objects, ordered by replica index."""
    pts = ensemble_points(map_spec, replicas, n, burn_in, master_seed)
    out = []
    for r in range(replicas):
        p = pts[r]
        p.setflags(write=False)
        out.append(Trajectory(p, map_spec, derive_seed(master_seed, r), burn_in))
    return out


def write_trajectory(traj: Trajectory, path) -> None:
    """Cache file: provenance header line, then one point per line."""
    spec = traj.map
    ps = ",".join(f"{p:.17g}" for p in spec.params)
    with open(path, "w", encoding="utf-8") as f:
        f.write(
            f"# map={spec.map_id} params={ps} dim={spec.dim} "
            f"n={traj.n} seed={traj.seed} burnin={traj.burn_in}\n"
        )
        for row in traj.points:
            f.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def read_trajectory(path) -> Trajectory:
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip()
        if not header.startswith("# "):
            raise DomainError(f"{path}: missing trajectory header")
        fields = dict(item.split("=", 1) for item in header[2:].split())
        params = tuple(float(v) for v in fields["params"].split(",") if v)
        spec = make_map(fields["map"], params or None, dim=int(fields["dim"]))
        pts = np.loadtxt(f, ndmin=2)
    n = int(fields["n"])
    if pts.shape != (n, spec.dim):
        raise DomainError(f"{path}: expected {n} points of dim {spec.dim}, got {pts.shape}")
    pts.setflags(write=False)
    return Trajectory(pts, spec, int(fields["seed"]), int(fields["burnin"]))
