"""Shared statistical plumbing: exact intervals, screens, small regressions."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats as sps

__all__ = [
    "clopper_pearson",
    "normal_mean_ci",
    "multinomial_simultaneous_ci",
    "chi_square_uniform_screen",
    "weighted_ols",
]


def clopper_pearson(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Exact binomial confidence interval for k successes out of n."""
    if not 0 <= k <= n or n <= 0:
        raise ValueError("need 0 <= k <= n, n > 0")
    alpha = 1.0 - level
    lo = 0.0 if k == 0 else float(sps.beta.ppf(alpha / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(sps.beta.ppf(1 - alpha / 2, k + 1, n - k))
    return lo, hi


def normal_mean_ci(values: np.ndarray, level: float = 0.95) -> tuple[float, float, float]:
    """(mean, lo, hi) via normal theory on the sample mean."""
    v = np.asarray(values, dtype=float)
    n = len(v)
    if n == 0:
        raise ValueError("empty sample")
    mean = float(v.mean())
    if n == 1:
        return mean, mean, mean
    se = float(v.std(ddof=1)) / math.sqrt(n)
    z = float(sps.norm.ppf(0.5 + level / 2))
    return mean, mean - z * se, mean + z * se


def multinomial_simultaneous_ci(
    counts: np.ndarray, level: float = 0.95
) -> list[tuple[float, float]]:
    """Simultaneous cell intervals via Bonferroni-corrected exact binomials.

    Conservative (Goodman-style): each of the K cells gets an exact binomial
    interval at level 1 - (1-level)/K, so all cells cover jointly with
    probability >= level.
    """
    counts = np.asarray(counts, dtype=np.int64)
    n = int(counts.sum())
    k_cells = len(counts)
    if n <= 0 or k_cells == 0:
        raise ValueError("need positive totals")
    cell_level = 1.0 - (1.0 - level) / k_cells
    return [clopper_pearson(int(c), n, cell_level) for c in counts]


def chi_square_uniform_screen(
    draws: np.ndarray, bins: int = 64, alpha: float = 0.001
) -> tuple[float, bool]:
    """(p_value, passes) of a chi-square uniformity test on [0,1) draws."""
    draws = np.asarray(draws, dtype=float)
    counts, _ = np.histogram(draws, bins=bins, range=(0.0, 1.0))
    expected = len(draws) / bins
    stat = float(((counts - expected) ** 2 / expected).sum())
    p = float(sps.chi2.sf(stat, bins - 1))
    return p, p >= alpha


def weighted_ols(x, y, sigma=None) -> dict:
    """Slope/intercept with standard errors; weights 1/sigma^2 when given.

    Returns dict(slope, intercept, slope_se, intercept_se, r2).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y) or len(x) < 3:
        raise ValueError("need >= 3 matched points")
    w = np.ones_like(x) if sigma is None else 1.0 / np.asarray(sigma, dtype=float) ** 2
    sw = w.sum()
    xbar = (w * x).sum() / sw
    ybar = (w * y).sum() / sw
    sxx = (w * (x - xbar) ** 2).sum()
    sxy = (w * (x - xbar) * (y - ybar)).sum()
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    resid = y - slope * x - intercept
    # residual-scaled parameter errors (accounts for over/under-dispersion)
    dof = len(x) - 2
    s2 = (w * resid**2).sum() / dof
    slope_se = math.sqrt(s2 / sxx)
    intercept_se = math.sqrt(s2 * (1.0 / sw + xbar**2 / sxx))
    ss_tot = (w * (y - ybar) ** 2).sum()
    r2 = 1.0 - (w * resid**2).sum() / ss_tot if ss_tot > 0 else 0.0
    return {
        "slope": float(slope),
        "intercept": float(intercept),
        "slope_se": float(slope_se),
        "intercept_se": float(intercept_se),
        "r2": float(r2),
    }
