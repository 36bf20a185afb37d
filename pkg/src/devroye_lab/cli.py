"""Command-line entry point: one experiment per invocation.

Outputs are CSV for curves/tables and JSON for reports, written with
17-significant-digit decimals so reruns can be compared byte for byte.
Every run writes a manifest sidecar <out>.manifest.json recording the
subcommand, the full effective parameter map and SHA-256 digests of every
output file; re-ingesting a manifest via --config reproduces the run
(flags still override).  Exit codes: 0 success, 1 validation failure
(a declared bound was violated or a non-finite value reached an output),
2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time

import numpy as np

from . import __version__, asclt, covariance, dimension, holder, measure, shadowing, spectral
from .errors import DevroyeLabError, ParameterError, ValidationError
from .observables import make_observable, mean_of
from .process import ensemble_points, generate_trajectory, make_map, write_trajectory
from .shadowing import parse_predicate

CATALOG_MAPS = ("doubling", "tent", "logistic", "iid_uniform", "lozi")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    v = float(x)
    if not math.isfinite(v):
        raise ValidationError(f"non-finite value {v} reached an output cell")
    return f"{v:.17g}"


def _write_csv(path: str, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(c) for c in row))
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _write_manifest(args, outputs: list[str]) -> None:
    params = {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in ("func", "config") and not callable(v)
    }
    manifest = {
        "tool": "devroye-lab",
        "version": __version__,
        "subcommand": args.subcommand,
        "parameters": params,
        "master_seed": getattr(args, "seed", None),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "outputs": {p: _sha256(p) for p in outputs},
    }
    _write_json(args.out + ".manifest.json", manifest)


def load_config(path: str) -> dict:
    """Read a config: JSON object, manifest JSON, or key = value lines."""
    with open(path, encoding="utf-8") as f:
        text = f.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        obj = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key = value, got '{raw}'")
            key, val = (s.strip() for s in line.split("=", 1))
            obj[key] = _coerce(val)
        return obj
    if not isinstance(obj, dict):
        raise ParameterError(f"{path}: top-level JSON value must be an object")
    if "parameters" in obj and isinstance(obj["parameters"], dict):
        return obj["parameters"]  # manifest round-trip
    return obj


def _coerce(val: str):
    for cast in (int, float):
        try:
            return cast(val)
        except ValueError:
            pass
    return val


def _map_from(args):
    params = None
    if getattr(args, "params", None):
        params = tuple(float(v) for v in args.params.split(","))
    return make_map(args.map, params, dim=getattr(args, "dim", None))


def _obs_from(args, map_spec):
    params = ()
    if getattr(args, "obs_params", None):
        params = tuple(float(v) for v in args.obs_params.split(","))
    return make_observable(args.obs, params=params, bound_A=map_spec.bound_A)


def _maybe_plot(args, csv_path: str, outputs: list[str]) -> None:
    if getattr(args, "plot", False):
        from . import report

        png = report.render(args.subcommand, csv_path, csv_path + ".png")
        if png:
            outputs.append(png)


# ---------------------------------------------------------------------------
# subcommand handlers (each returns True when all declared bounds held)


def _cmd_simulate(args) -> tuple[bool, list[str]]:
    spec = _map_from(args)
    x0 = None
    if args.x0 is not None:
        x0 = tuple(float(v) for v in args.x0.split(","))
    traj = generate_trajectory(spec, args.n, args.burnin, args.seed, x0=x0)
    write_trajectory(traj, args.out)
    return True, [args.out]


def _cmd_covariance(args) -> tuple[bool, list[str]]:
    spec = _map_from(args)
    u = _obs_from(args, spec)
    traj = generate_trajectory(spec, args.k + args.maxlag, args.burnin, args.seed)
    rows = []
    for lag in range(1, args.maxlag + 1):
        chat = covariance.autocovariance(traj, u, lag, args.k)
        bound = covariance.covariance_variance_bound(
            args.k, lag, u.L_u, spec.bound_A, u.eta, args.D
        )
        rows.append((lag, chat, bound))
    _write_csv(args.out, ["lag", "C_hat", "bound_at_lag"], rows)
    outputs = [args.out]
    _maybe_plot(args, args.out, outputs)
    return True, outputs


def _cmd_spectrum(args) -> tuple[bool, list[str]]:
    spec = _map_from(args)
    u = _obs_from(args, spec)
    series = covariance.analytic_series(spec, u)
    if series is None:
        ref = generate_trajectory(spec, 1_000_000, args.burnin, args.seed)
        series = covariance.empirical_series(ref, u, 64)
    ens = ensemble_points(spec, args.replicas, args.n, args.burnin, args.seed)
    vals = u(ens.reshape(-1, ens.shape[-1])).reshape(args.replicas, args.n)
    y = vals - vals.mean(axis=1, keepdims=True)
    jt = spectral.sdf_uniform_grid(y, args.grid).mean(axis=0)
    omegas = 2.0 * np.pi * np.arange(args.grid + 1) / args.grid
    jlim = np.array([spectral.limit_spectral_distribution(series, w) for w in omegas])
    spectral.SpectralCurve(omegas, jt, "J_tilde").validate()
    spectral.SpectralCurve(omegas, jlim, "J_limit").validate()
    _write_csv(args.out, ["omega", "J_tilde", "J_limit"], list(zip(omegas, jt, jlim)))
    outputs = [args.out]
    _maybe_plot(args, args.out, outputs)
    return True, outputs


def _cmd_spectrum_rate(args) -> tuple[bool, list[str]]:
    spec = _map_from(args)
    u = _obs_from(args, spec)
    n_grid = [int(v) for v in args.n_grid.split(",")]
    res = spectral.sup_deviation_experiment(
        spec, u, n_grid, args.replicas, args.seed,
        grid_size=args.grid, D=args.D, burn_in=args.burnin,
    )
    rows = [(r.n, r.grid_size, r.e_sup2, r.e_sup2_upper, r.envelope) for r in res.rows]
    _write_csv(args.out, ["n", "grid_size", "e_sup2", "e_sup2_upper", "envelope"], rows)
    print(f"slope={res.slope:.4f} envelope_constant={res.envelope_constant:.6g}")
    outputs = [args.out]
    _maybe_plot(args, args.out, outputs)
    return True, outputs


def _cmd_corrdim(args) -> tuple[bool, list[str]]:
    spec = _map_from(args)
    traj = generate_trajectory(spec, args.n, args.burnin, args.seed)
    eps_grid = np.geomspace(args.eps_min, args.eps_max, args.eps_count)
    fit = dimension.estimate_correlation_dimension(traj.points, eps_grid, fit_flagged=True)
    rows = list(zip(fit.eps_grid, fit.k_heaviside, fit.k_phi0, fit.flagged))
    _write_csv(args.out, ["eps", "K_heaviside", "K_phi0", "flagged"], rows)
    print(f"slope={fit.slope:.4f} (kernel focus: {args.kernel})")
    outputs = [args.out]
    _maybe_plot(args, args.out, outputs)
    return True, outputs


def _cmd_kantorovich(args) -> tuple[bool, list[str]]:
    spec = _map_from(args)
    n_grid = [int(v) for v in args.n_grid.split(",")]
    rows, _ = measure.kantorovich_convergence(
        spec, n_grid, args.replicas, args.seed,
        reference_n=args.ref_n, D=args.D, burn_in=args.burnin,
    )
    ok = all(r.kappa_var - 3.0 * r.kappa_var_stderr <= r.var_bound for r in rows)
    _write_csv(
        args.out,
        ["n", "kappa_mean", "kappa_var", "var_bound", "mean_bound"],
        [(r.n, r.kappa_mean, r.kappa_var, r.var_bound, r.smoothed_mean_bound) for r in rows],
    )
    outputs = [args.out]
    _maybe_plot(args, args.out, outputs)
    return ok, outputs


def _cmd_kde(args) -> tuple[bool, list[str]]:
    spec = _map_from(args)
    if spec.dim != 1:
        raise ParameterError("kde is defined for 1-d maps only")
    traj = generate_trajectory(spec, args.n, args.burnin, args.seed)
    kernel = measure.make_kernel(args.kernel)
    if args.bandwidth is not None:
        alpha = args.bandwidth
    else:
        alpha = args.n ** (-1.0 / 3.0) if args.bandwidth_rule == "n13" else args.n ** (-0.25)
    pad = kernel.radius * alpha
    grid = np.linspace(-pad, 1.0 + pad, args.grid)
    h = measure.kde(traj.points[:, 0], kernel, alpha, grid)
    header = ["s", "h_n"]
    cols = [grid, h]
    if spec.analytic_density is not None:
        dens = measure.make_density(
            "analytic_uniform" if spec.analytic_density == "uniform" else "analytic_logistic4"
        )
        header.append("phi")
        cols.append(dens.pdf(grid))
        print(f"l1_error={measure.kde_l1_error(h, grid, dens):.6f} bandwidth={alpha:.6g}")
    _write_csv(args.out, header, list(zip(*cols)))
    outputs = [args.out]
    _maybe_plot(args, args.out, outputs)
    return True, outputs


def _cmd_besov(args) -> tuple[bool, list[str]]:
    dens = measure.make_density(args.density)
    deltas = np.geomspace(args.delta_min, args.delta_max, args.count)
    tau, mods = measure.fit_besov_exponent(dens, deltas)
    _write_csv(args.out, ["delta", "modulus"], list(zip(deltas, mods)))
    print(f"tau_hat={tau:.4f}")
    outputs = [args.out]
    _maybe_plot(args, args.out, outputs)
    return True, outputs


def _cmd_shadow(args) -> tuple[bool, list[str]]:
    spec = _map_from(args)
    pred = parse_predicate(args.predicate)
    n_grid = [int(v) for v in args.n.split(",")]
    t_grid = [float(v) for v in args.t_grid.split(",")]
    res = shadowing.shadow_experiment(
        spec, pred, n_grid, args.bank, args.queries, t_grid, args.seed, args.D, args.burnin,
        eps=args.eps,
    )
    tail_header = ["n", "t", "threshold", "empirical_p", "tail_bound", "mc_sigma", "passed"]
    _write_csv(
        args.out,
        tail_header,
        [(r.n, r.t, r.threshold, r.empirical_p, r.tail_bound, r.mc_sigma, r.passed)
         for r in res.tail_rows],
    )
    moments_path = args.out + ".moments.csv"
    _write_csv(
        moments_path,
        ["n", "mean_z2", "bound", "passed"],
        [(r.n, r.mean_z2, r.bound, r.passed) for r in res.moment_rows],
    )
    mismatch_path = args.out + ".mismatch.csv"
    _write_csv(
        mismatch_path,
        tail_header,
        [(r.n, r.t, r.threshold, r.empirical_p, r.tail_bound, r.mc_sigma, r.passed)
         for r in res.mismatch_rows],
    )
    curve_path = args.out + ".curve.csv"
    _write_csv(curve_path, ["n", "bank_prefix", "median_z"], res.bank_curve)
    ok = all(
        r.passed for r in res.tail_rows + res.moment_rows + res.mismatch_rows
    )
    outputs = [args.out, moments_path, mismatch_path, curve_path]
    _maybe_plot(args, args.out, outputs)
    return ok, outputs


def _cmd_asclt(args) -> tuple[bool, list[str]]:
    spec = _map_from(args)
    u = _obs_from(args, spec)
    u = u.centered(mean_of(u, spec))
    res = asclt.asclt_experiment(
        spec, u, args.n_max, args.rho, args.replicas, args.seed, burn_in=args.burnin
    )
    _write_csv(
        args.out,
        ["n_k", "D_n", "kappa_mean", "kappa_median", "kappa_var", "bound", "marginal_kappa"],
        [(r.n, r.D_n, r.kappa_mean, r.kappa_median, r.kappa_var, r.var_bound, r.marginal_kappa)
         for r in res.rows],
    )
    print(f"sigma2={res.sigma2:.6g} var_constant={res.var_constant:.6g}")
    outputs = [args.out]
    _maybe_plot(args, args.out, outputs)
    return True, outputs


def _cmd_devroye_check(args) -> tuple[bool, list[str]]:
    spec = _map_from(args)
    f = holder.make_functional(args.functional, spec, args.n, args.seed)
    rep = holder.estimate_variance_mc(f, spec, args.replicas, args.seed, D=args.D)
    chk = holder.check_devroye(rep)
    _write_json(
        args.out,
        {
            "functional": rep.functional_id,
            "n": rep.arity,
            "replicas": rep.replicas,
            "mc_variance": rep.mc_variance,
            "stderr": rep.mc_variance_stderr,
            "bound": rep.devroye_bound,
            "D": rep.D_used,
            "ratio": rep.ratio,
            "pass": chk.passed,
        },
    )
    print(f"{'PASS' if chk.passed else 'FAIL'} ratio={rep.ratio:.6g}")
    return chk.passed, [args.out]


def _cmd_trig_check(args) -> tuple[bool, list[str]]:
    res = spectral.trig_partial_sum_sup(args.m_max, args.grid)
    ok = res.value <= 1.86
    print(
        f"sup={res.value:.6f} at m={res.m_star} omega={res.omega_star:.6g} "
        f"{'PASS' if ok else 'FAIL'} (threshold 1.86)"
    )
    outputs = []
    if args.out:
        _write_json(
            args.out,
            {
                "m_max": args.m_max,
                "sup": res.value,
                "m_star": res.m_star,
                "omega_star": res.omega_star,
                "pass": ok,
            },
        )
        outputs.append(args.out)
    return ok, outputs


def _cmd_calibrate(args) -> tuple[bool, list[str]]:
    train_maps = [make_map(m) for m in args.maps.split(",")]
    kinds = args.functionals.split(",")
    n_list = [int(v) for v in args.n_grid.split(",")]
    val_maps = [make_map(m) for m in args.validate_maps.split(",")] if args.validate_maps else []
    val_kinds = args.validate_functionals.split(",") if args.validate_functionals else []
    res = holder.calibrate_devroye_constant(
        train_maps, kinds, n_list, args.replicas, args.seed, val_maps, val_kinds
    )
    ok = all(chk.passed for _, chk in res.validation)
    _write_json(
        args.out,
        {
            "D_fit": res.D_fit,
            "training": [
                {
                    "map": c.map_id,
                    "functional": c.functional_id,
                    "n": c.n,
                    "mc_variance": c.mc_variance,
                    "stderr": c.stderr,
                    "sum_lj_sq": c.sum_lj_sq,
                    "min_D": c.min_D,
                }
                for c in res.training
            ],
            "validation": [
                {
                    "functional": rep.functional_id,
                    "n": rep.arity,
                    "mc_variance": rep.mc_variance,
                    "ratio": rep.ratio,
                    "pass": chk.passed,
                }
                for rep, chk in res.validation
            ],
        },
    )
    print(f"D_fit={res.D_fit:.6g} validation={'PASS' if ok else 'FAIL'}")
    return ok, [args.out]


# ---------------------------------------------------------------------------
# parser


def _add_common(p, out_required=True, seed_default=0):
    p.add_argument("--seed", type=int, default=seed_default, help="master seed")
    p.add_argument("--burnin", type=int, default=1000)
    p.add_argument("--config", type=str, default=None, help="JSON/key=value config or manifest")
    p.add_argument("--plot", action="store_true", help="render a PNG next to the CSV output")
    if out_required:
        p.add_argument("--out", type=str, required=True)


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="devroye-lab", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="subcommand", required=True)
    created = {}

    def sub(name, fn, **kw):
        p = subs.add_parser(name, **kw)
        p.set_defaults(func=fn, subcommand=name)
        created[name] = p
        return p

    p = sub("simulate", _cmd_simulate, help="generate and cache one trajectory")
    p.add_argument("--map", required=True, choices=CATALOG_MAPS)
    p.add_argument("--params", type=str, default=None, help="comma-separated map parameters")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x0", type=str, default=None, help="forced initial point (comma floats)")
    _add_common(p)

    p = sub("covariance", _cmd_covariance, help="windowed autocovariance estimates")
    p.add_argument("--map", required=True, choices=CATALOG_MAPS)
    p.add_argument("--params", type=str, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--obs", default="cosine2pi")
    p.add_argument("--obs-params", type=str, default=None)
    p.add_argument("--k", type=int, required=True, help="estimator window")
    p.add_argument("--maxlag", type=int, required=True)
    p.add_argument("--D", type=float, default=1.0)
    _add_common(p)

    p = sub("spectrum", _cmd_spectrum, help="integrated periodogram against its limit")
    p.add_argument("--map", required=True, choices=CATALOG_MAPS)
    p.add_argument("--params", type=str, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--obs", default="cosine2pi")
    p.add_argument("--obs-params", type=str, default=None)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--replicas", type=int, default=8)
    _add_common(p)

    p = sub("spectrum-rate", _cmd_spectrum_rate, help="sup-deviation decay experiment")
    p.add_argument("--map", required=True, choices=CATALOG_MAPS)
    p.add_argument("--params", type=str, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--obs", default="cosine2pi")
    p.add_argument("--obs-params", type=str, default=None)
    p.add_argument("--n-grid", type=str, required=True, help="comma-separated sizes")
    p.add_argument("--grid", type=int, default=None, help="omega grid size (default n^(1/3))")
    p.add_argument("--replicas", type=int, default=200)
    p.add_argument("--D", type=float, default=1.0)
    _add_common(p)

    p = sub("corrdim", _cmd_corrdim, help="correlation sums and dimension fit")
    p.add_argument("--map", required=True, choices=CATALOG_MAPS)
    p.add_argument("--params", type=str, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps-min", type=float, required=True)
    p.add_argument("--eps-max", type=float, required=True)
    p.add_argument("--eps-count", type=int, default=8)
    p.add_argument("--kernel", choices=("heaviside", "phi0"), default="phi0")
    _add_common(p)

    p = sub("kantorovich", _cmd_kantorovich, help="empirical-measure convergence experiment")
    p.add_argument("--map", required=True, choices=CATALOG_MAPS)
    p.add_argument("--params", type=str, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--n-grid", type=str, required=True)
    p.add_argument("--replicas", type=int, default=200)
    p.add_argument("--ref-n", type=int, default=None)
    p.add_argument("--D", type=float, default=1.0)
    _add_common(p)

    p = sub("kde", _cmd_kde, help="kernel density estimate on a grid")
    p.add_argument("--map", required=True, choices=CATALOG_MAPS)
    p.add_argument("--params", type=str, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bandwidth", type=float, default=None)
    p.add_argument("--bandwidth-rule", choices=("n13", "n14"), default="n14",
                   help="preset n^(-1/3) or n^(-1/4), used when --bandwidth is absent")
    p.add_argument("--kernel", choices=("triangle", "epanechnikov"), default="triangle")
    p.add_argument("--grid", type=int, default=1001)
    _add_common(p)

    p = sub("besov", _cmd_besov, help="L1 shift modulus of a density")
    p.add_argument("--density", required=True,
                   choices=("analytic_uniform", "analytic_logistic4"))
    p.add_argument("--delta-min", type=float, required=True)
    p.add_argument("--delta-max", type=float, required=True)
    p.add_argument("--count", type=int, default=9)
    _add_common(p)

    p = sub("shadow", _cmd_shadow, help="shadowing tail experiment")
    p.add_argument("--map", required=True, choices=CATALOG_MAPS)
    p.add_argument("--params", type=str, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--predicate", type=str, required=True, help="e.g. 'x1<=0.5'")
    p.add_argument("--n", type=str, required=True, help="comma-separated lengths")
    p.add_argument("--bank", type=int, required=True)
    p.add_argument("--queries", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.1, help="mismatch tolerance (reports)")
    p.add_argument("--t-grid", type=str, default="0.5,1,2")
    p.add_argument("--D", type=float, default=1.0)
    _add_common(p)

    p = sub("asclt", _cmd_asclt, help="almost-sure CLT distance at checkpoints")
    p.add_argument("--map", required=True, choices=CATALOG_MAPS)
    p.add_argument("--params", type=str, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--obs", default="cosine2pi")
    p.add_argument("--obs-params", type=str, default=None)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--replicas", type=int, default=50)
    _add_common(p)

    p = sub("devroye-check", _cmd_devroye_check, help="variance bound for one functional")
    p.add_argument("--map", required=True, choices=CATALOG_MAPS)
    p.add_argument("--params", type=str, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--functional", required=True, choices=holder.FUNCTIONAL_KINDS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--replicas", type=int, required=True)
    p.add_argument("--D", type=float, required=True)
    _add_common(p)

    p = sub("trig-check", _cmd_trig_check, help="partial sine sum supremum check")
    p.add_argument("--m-max", type=int, required=True)
    p.add_argument("--grid", type=int, default=2049)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", type=str, default=None)
    p.add_argument("--out", type=str, default=None)

    p = sub("calibrate-D", _cmd_calibrate, help="fit the smallest passing constant D")
    p.add_argument("--maps", type=str, default="doubling,tent")
    p.add_argument("--functionals", type=str, default=",".join(holder.FUNCTIONAL_KINDS))
    p.add_argument("--n-grid", type=str, default="100,1000")
    p.add_argument("--replicas", type=int, default=1000)
    p.add_argument("--validate-maps", type=str, default=None)
    p.add_argument("--validate-functionals", type=str, default=None)
    _add_common(p)

    return parser, created


def run(argv) -> int:
    """Parse argv, run one experiment, write outputs and the manifest."""
    parser, subparsers = build_parser()
    cfg_path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            cfg_path = argv[i + 1]
        elif tok.startswith("--config="):
            cfg_path = tok.split("=", 1)[1]
    subcommand = next((t for t in argv if t and not t.startswith("-")), None)
    if cfg_path and subcommand in subparsers:
        cfg = load_config(cfg_path)
        sub = subparsers[subcommand]
        valid = {a.dest for a in sub._actions}
        sub.set_defaults(**{k: v for k, v in cfg.items() if k in valid})
        for action in sub._actions:  # config satisfies required flags
            if action.dest in cfg and action.required:
                action.required = False
    args = parser.parse_args(argv)  # explicit flags win over config values
    ok, outputs = args.func(args)
    if getattr(args, "out", None):
        _write_manifest(args, outputs)
    return 0 if ok else 1


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        return run(argv)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return 1
    except DevroyeLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
