"""Figure rendering for report outputs.

Every report-style artifact (collapse tables, envelope fits, kernel tables)
is written as plot-ready CSV plus a rendered PNG alongside it.  Figures are
deliberately plain: log-scale axes, error bars where the data carry them,
one panel per figure.
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "write_collapse_csv",
    "render_collapse",
    "render_envelope",
    "render_kernel_table",
    "render_displacement",
]


def _atomic_save(fig, path: str, dpi: int = 150):
    tmp = path + ".tmp.png"
    fig.savefig(tmp, dpi=dpi, bbox_inches="tight")
    plt.close(fig)
    os.replace(tmp, path)


def write_collapse_csv(path: str, rows):
    """rows: iterable of (abscissa, rescaled_value, ci_lo, ci_hi)."""
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write("abscissa,rescaled_value,ci_lo,ci_hi\n")
        for a, v, lo, hi in rows:
            fh.write(f"{a:.17g},{v:.17g},{lo:.17g},{hi:.17g}\n")
    os.replace(tmp, path)


def render_collapse(png_path: str, rows, xlabel: str, title: str,
                    slope: float | None = None, intercept: float | None = None):
    """Scaling-collapse scatter with error bars and the fitted decay line."""
    rows = [r for r in rows if r[1] > 0]
    if not rows:
        return
    a = np.array([r[0] for r in rows])
    v = np.array([r[1] for r in rows])
    lo = np.array([max(r[2], 1e-300) for r in rows])
    hi = np.array([r[3] for r in rows])
    fig, ax = plt.subplots(figsize=(6, 4.2))
    ax.errorbar(a, v, yerr=[v - lo, np.maximum(hi - v, 0)], fmt="o", ms=3.5,
                lw=0.8, capsize=2, alpha=0.8)
    if slope is not None and intercept is not None:
        xs = np.linspace(a.min(), a.max(), 100)
        ax.plot(xs, np.exp(intercept + slope * xs), "k--", lw=1,
                label=f"slope {slope:.3f}")
        ax.legend()
    ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("rescaled value")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    _atomic_save(fig, png_path)


def render_envelope(png_path: str, fit, abscissa_of, title: str):
    """Per-point estimates with CI bars against the fitted envelopes."""
    ups = [(abscissa_of(inp), est, ci, env) for inp, est, ci, env, _ in fit.per_point
           if inp.get("side") == "upper"]
    los = [(abscissa_of(inp), est, ci, env) for inp, est, ci, env, _ in fit.per_point
           if inp.get("side") == "lower"]
    fig, ax = plt.subplots(figsize=(6, 4.2))
    for rows, color, label in ((ups, "C0", "estimates (upper side)"),
                               (los, "C1", "estimates (lower side)")):
        if not rows:
            continue
        a = np.array([r[0] for r in rows])
        v = np.array([r[1] for r in rows])
        lo = np.array([max(r[2][0], 1e-300) for r in rows])
        hi = np.array([r[3] for r in rows])
        order = np.argsort(a)
        ax.errorbar(a[order], np.maximum(v[order], 1e-300),
                    yerr=[np.maximum(v - lo, 0)[order], np.zeros(len(a))],
                    fmt="o", ms=3, color=color, alpha=0.7, label=label)
        ax.plot(a[order], hi[order], "-", lw=1, color=color, alpha=0.9,
                label=f"{label.split()[1]} envelope")
    ax.set_yscale("log")
    ax.set_xlabel("abscissa")
    ax.set_ylabel("probability")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    _atomic_save(fig, png_path)


def render_kernel_table(png_path: str, table):
    """Kernel rows against graph distance for a handful of times."""
    fig, ax = plt.subplots(figsize=(6, 4.2))
    v = table.values[0]
    m = np.arange(len(v))
    pos = v > 0
    ax.semilogy(m[pos], v[pos], "-", lw=1.2)
    ax.set_xlabel("graph distance m")
    ax.set_ylabel(f"q_t(0, m), t={table.t:g}")
    ax.set_title("half-line kernel row")
    ax.grid(alpha=0.3)
    _atomic_save(fig, png_path)


def render_displacement(png_path: str, rep):
    """Mean displacement against time with the fitted slope."""
    fig, ax = plt.subplots(figsize=(6, 4.2))
    t = np.array(rep.t_values)
    y = np.array(rep.mean_disp)
    se = np.array(rep.se)
    ax.errorbar(t, y, yerr=1.96 * se, fmt="o", ms=4, capsize=2)
    c = math.exp(
        float(np.mean(np.log(y) - rep.slope * np.log(t)))
    )
    ax.plot(t, c * t**rep.slope, "k--", lw=1,
            label=f"slope {rep.slope:.3f} [{rep.slope_ci[0]:.3f}, {rep.slope_ci[1]:.3f}]")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("time t")
    ax.set_ylabel("mean displacement")
    ax.set_title("extrinsic displacement scaling")
    ax.grid(alpha=0.3)
    ax.legend()
    _atomic_save(fig, png_path)
