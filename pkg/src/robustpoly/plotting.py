"""Figure rendering for the report-producing commands.

Every CSV the CLI emits gets a companion PNG next to it; plotting is
headless (Agg) so the tool stays batch-friendly.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLE = {
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 10,
    "legend.frameon": False,
}


def _styled():
    return plt.rc_context(_STYLE)


def save_figure(fig, path) -> str:
    path = str(path)
    if not path.endswith(".png"):
        path += ".png"
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_sweep(rows: list[dict], title: str, path) -> str:
    """rows: dicts with M, success_rate, mean_error, ci_low, ci_high."""
    ms = np.array([r["M"] for r in rows], dtype=float)
    rate = np.array([r["success_rate"] for r in rows])
    lo = np.array([r["ci_low"] for r in rows])
    hi = np.array([r["ci_high"] for r in rows])
    err = np.array([r["mean_error"] for r in rows])
    with _styled():
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.6, 3.8))
        ax1.fill_between(ms, lo, hi, alpha=0.25)
        ax1.plot(ms, rate, "o-")
        ax1.set_xlabel("samples M")
        ax1.set_ylabel("success rate")
        ax1.set_xscale("log")
        ax1.set_ylim(-0.02, 1.02)
        ax2.plot(ms, err, "s-", color="tab:red")
        ax2.set_xlabel("samples M")
        ax2.set_ylabel("mean sup error")
        ax2.set_xscale("log")
        fig.suptitle(title)
    return save_figure(fig, path)


def plot_sandwich(reports, path) -> str:
    ratios = np.array([r.ratio for r in reports])
    bounds = np.array([r.bound for r in reports])
    with _styled():
        fig, ax = plt.subplots()
        ax.scatter(bounds, ratios, s=14, alpha=0.6, label="observed ratio")
        lim = np.array([min(ratios.min(), 1e-2), bounds.max() * 2])
        ax.plot(lim, lim, "k--", lw=1, label="bound (equality)")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel(r"bound $(2d)^{2n}$")
        ax.set_ylabel(r"$\|p\|_\infty / \|p\|_1$")
        ax.legend()
        ax.set_title("sup vs l1 norm comparison")
    return save_figure(fig, path)


def plot_failure_rates(rows: list[tuple[int, object]], title: str, path) -> str:
    ms = np.array([m for m, _ in rows], dtype=float)
    rate = np.array([r.failure_rate for _, r in rows])
    lo = np.array([r.ci_low for _, r in rows])
    hi = np.array([r.ci_high for _, r in rows])
    with _styled():
        fig, ax = plt.subplots()
        ax.fill_between(ms, lo, hi, alpha=0.25)
        ax.plot(ms, rate, "o-")
        ax.set_xlabel("samples M")
        ax.set_ylabel("failure rate")
        ax.set_ylim(-0.02, 1.02)
        ax.set_title(title)
    return save_figure(fig, path)
