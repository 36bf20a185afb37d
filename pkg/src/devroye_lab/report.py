"""Figure rendering for the CLI report path.

Each curve-emitting subcommand can render a PNG next to its CSV via
--plot.  Figures are read back from the CSV (not from in-memory state) so
a figure can always be re-rendered from the shipped artifact alone.
"""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    header, data = rows[0], rows[1:]
    cols = {name: [] for name in header}
    for row in data:
        for name, cell in zip(header, row):
            try:
                cols[name].append(float(cell))
            except ValueError:
                cols[name].append(cell)
    return cols


def render(subcommand: str, csv_path: str, png_path: str) -> str | None:
    """Render the standard figure for a subcommand's CSV; returns the path."""
    fn = _RENDERERS.get(subcommand)
    if fn is None:
        return None
    cols = _read_csv(csv_path)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    fn(ax, cols)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return png_path


def _covariance(ax, c):
    ax.plot(c["lag"], c["C_hat"], "o-", label="C_hat")
    ax.plot(c["lag"], c["bound_at_lag"], "--", label="mse bound")
    ax.set_xlabel("lag")
    ax.set_ylabel("autocovariance")
    ax.set_yscale("symlog", linthresh=1e-6)
    ax.legend()


def _spectrum(ax, c):
    ax.plot(c["omega"], c["J_tilde"], label="empirical")
    ax.plot(c["omega"], c["J_limit"], "--", label="limit")
    ax.set_xlabel("omega")
    ax.set_ylabel("integrated periodogram")
    ax.legend()


def _spectrum_rate(ax, c):
    ax.loglog(c["n"], c["e_sup2"], "o-", label="E sup^2 (grid)")
    ax.loglog(c["n"], c["e_sup2_upper"], "s-", label="E sup^2 (bracket)")
    ax.loglog(c["n"], c["envelope"], "--", label="envelope shape")
    ax.set_xlabel("n")
    ax.legend()


def _corrdim(ax, c):
    ax.loglog(c["eps"], c["K_phi0"], "o-", label="smoothed")
    ax.loglog(c["eps"], c["K_heaviside"], "s-", label="heaviside")
    flagged = [e for e, f in zip(c["eps"], c["flagged"]) if f]
    if flagged:
        for e in flagged:
            ax.axvline(e, color="r", alpha=0.15)
    ax.set_xlabel("eps")
    ax.set_ylabel("correlation sum")
    ax.legend()


def _kantorovich(ax, c):
    ax.loglog(c["n"], c["kappa_mean"], "o-", label="mean distance")
    ax.loglog(c["n"], c["kappa_var"], "s-", label="variance")
    ax.loglog(c["n"], c["var_bound"], "--", label="D/n")
    ax.set_xlabel("n")
    ax.legend()


def _kde(ax, c):
    ax.plot(c["s"], c["h_n"], label="estimate")
    if "phi" in c:
        ax.plot(c["s"], c["phi"], "--", label="density")
    ax.set_xlabel("s")
    ax.set_ylabel("density")
    ax.legend()


def _besov(ax, c):
    ax.loglog(c["delta"], c["modulus"], "o-")
    ax.set_xlabel("delta")
    ax.set_ylabel("L1 shift modulus")


def _shadow(ax, c):
    ns = sorted(set(c["n"]))
    for n in ns:
        sel = [i for i, v in enumerate(c["n"]) if v == n]
        ax.plot([c["t"][i] for i in sel], [c["empirical_p"][i] for i in sel], "o-",
                label=f"empirical n={int(n)}")
        ax.plot([c["t"][i] for i in sel], [c["tail_bound"][i] for i in sel], "--",
                label=f"bound n={int(n)}")
    ax.set_xlabel("t")
    ax.set_ylabel("P(Z >= threshold)")
    ax.set_yscale("symlog", linthresh=1e-4)
    ax.legend(fontsize=8)


def _asclt(ax, c):
    ax.semilogx(c["n_k"], c["kappa_mean"], "o-", label="mean")
    ax.semilogx(c["n_k"], c["kappa_median"], "s-", label="median")
    ax.semilogx(c["n_k"], c["marginal_kappa"], "^--", label="replica marginal")
    ax.set_xlabel("n_k")
    ax.set_ylabel("distance to Gaussian")
    ax.legend()


_RENDERERS = {
    "covariance": _covariance,
    "spectrum": _spectrum,
    "spectrum-rate": _spectrum_rate,
    "corrdim": _corrdim,
    "kantorovich": _kantorovich,
    "kde": _kde,
    "besov": _besov,
    "shadow": _shadow,
    "asclt": _asclt,
}
