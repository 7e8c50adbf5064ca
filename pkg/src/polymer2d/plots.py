"""Figure rendering for the report path.

Each report-producing experiment gets a companion PNG next to its CSV.
Figures are drawn from the already-computed rows, never from fresh
computation, so the CSV remains the canonical record.
"""

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _col(columns, rows, name):
    i = columns.index(name)
    return np.array([r[i] for r in rows], dtype=np.float64)


def render(experiment, columns, rows, path):
    """Render the figure for an experiment kind; returns path or None."""
    fn = _RENDERERS.get(experiment)
    if fn is None or not rows:
        return None
    fig = fn(columns, rows)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _fig_kernel_table(columns, rows):
    n = _col(columns, rows, "n")
    ps = _col(columns, rows, "pstar")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(n, ps, lw=1.2, label="sup-probability")
    ax.loglog(n, 2 / (math.pi * n), "--", lw=1.0, label="2/(pi n)")
    ax.set_xlabel("n")
    ax.set_ylabel("sup probability")
    ax.legend(frameon=False)
    fig.tight_layout()
    return fig


def _fig_un(columns, rows):
    n = _col(columns, rows, "n")
    u = _col(columns, rows, "u")
    rho = _col(columns, rows, "rho")
    good = n >= 1
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.loglog(n[good & (u > 0)], u[good & (u > 0)], lw=1.2)
    ax1.set_xlabel("n")
    ax1.set_ylabel("overlap weight")
    ax2.semilogx(n[good], rho[good], lw=1.2)
    ax2.axhline(1.0, color="k", lw=0.6, ls="--")
    ax2.set_xlabel("n")
    ax2.set_ylabel("shape ratio")
    fig.tight_layout()
    return fig


def _fig_erdos_taylor(columns, rows):
    s = _col(columns, rows, "stat")
    fig, ax = plt.subplots(figsize=(6, 4))
    xmax = max(6.0, np.quantile(s, 0.999))
    bins = np.linspace(0, xmax, 60)
    ax.hist(s, bins=bins, density=True, alpha=0.6, label="samples")
    x = np.linspace(0, xmax, 200)
    ax.plot(x, np.exp(-x), "k--", lw=1.2, label="rate-1 exponential")
    ax.set_xlabel("normalized collision count")
    ax.set_ylabel("density")
    ax.legend(frameon=False)
    fig.tight_layout()
    return fig


def _fig_gaussian_limit(columns, rows):
    lw = _col(columns, rows, "log_w")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(lw, bins=60, density=True, alpha=0.6, label="log W samples")
    mu, sig = lw.mean(), lw.std()
    x = np.linspace(lw.min(), lw.max(), 200)
    ax.plot(x, np.exp(-(x - mu) ** 2 / (2 * sig ** 2))
            / math.sqrt(2 * math.pi * sig * sig),
            "k--", lw=1.2, label="matched normal")
    ax.set_xlabel("log W")
    ax.set_ylabel("density")
    ax.legend(frameon=False)
    fig.tight_layout()
    return fig


def _fig_second_moment(columns, rows):
    n = _col(columns, rows, "n")
    m2 = _col(columns, rows, "second_moment")
    bound = _col(columns, rows, "geometric_bound")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(n, m2, lw=1.2, label="exact")
    ok = np.isfinite(bound)
    ax.plot(n[ok], bound[ok], "--", lw=1.0, label="geometric bound")
    ax.set_xlabel("n")
    ax.set_ylabel("pair moment")
    ax.legend(frameon=False)
    fig.tight_layout()
    return fig


def _fig_moment_mc(columns, rows):
    n = _col(columns, rows, "n")
    ratio = _col(columns, rows, "ratio_to_limit")
    err = _col(columns, rows, "ratio_stderr")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(n, ratio, yerr=3 * err, fmt="o-", capsize=3)
    ax.axhline(1.0, color="k", lw=0.6, ls="--")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("N")
    ax.set_ylabel("moment / limit value")
    fig.tight_layout()
    return fig


_RENDERERS = {
    "kernel-table": _fig_kernel_table,
    "un": _fig_un,
    "erdos-taylor": _fig_erdos_taylor,
    "gaussian-limit": _fig_gaussian_limit,
    "second-moment": _fig_second_moment,
    "moment-mc": _fig_moment_mc,
}
