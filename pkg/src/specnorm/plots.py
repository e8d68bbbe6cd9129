"""SVG plots for the reports; deterministic output for fixed input."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("svg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "specnorm"
plt.rcParams["svg.fonttype"] = "none"


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": "specnorm"})
    plt.close(fig)


def fit_slope(xs, ys) -> tuple[float, float]:
    slope, icpt = np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)
    return float(slope), float(icpt)


def loglog_fit_plot(path, xs, series: dict, title: str, xlabel: str, ylabel: str, reference=None) -> dict:
    """One log-log panel; every series gets a least-squares slope in the legend.

    ``reference`` is an optional (label, slope) drawn through the first series' first point.
    Returns the fitted slopes by series name.
    """
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    slopes = {}
    for name, ys in series.items():
        slope, icpt = fit_slope(xs, ys)
        slopes[name] = slope
        ax.loglog(xs, ys, "o-", label=f"{name} (slope {slope:.3f})")
    if reference is not None and series:
        label, ref = reference
        first = next(iter(series.values()))
        x0, y0 = xs[0], first[0]
        xr = np.array([xs[0], xs[-1]], float)
        ax.loglog(xr, y0 * (xr / x0) ** ref, "k--", lw=0.8, label=f"{label} (slope {ref:.3f})")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)
    return slopes


def ratio_vs_size_plot(path, sizes, series: dict, title: str) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    order = np.argsort(sizes)
    xs = np.asarray(sizes, float)[order]
    for name, ys in series.items():
        ax.semilogx(xs, np.asarray(ys, float)[order], "o-", label=name)
    ax.set_title(title)
    ax.set_xlabel("|G|")
    ax.set_ylabel("max ratio")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def p_tag(p: float) -> str:
    return "inf" if math.isinf(p) else f"{p:g}"
