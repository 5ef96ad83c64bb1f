"""Exact transition probabilities of the unit-rate walk on the half-line.

The trace graph of the erased walk is intrinsically the path graph on
Z_+ = {0, 1, 2, ...} with deg(0) = 1, deg(m) = 2 otherwise.  The
continuous-time walk holds for Exp(1) at every site and jumps to a uniform
neighbour, so its transition matrix is the uniformization (Poissonization)
of the jump chain

    p(0 -> 1) = 1,   p(m -> m +- 1) = 1/2   for m >= 1,

evaluated at a Poisson(t) number of steps:  q_t = sum_k e^{-t} t^k / k! p_k.
Truncating the Poisson series at k_max leaves a certified remainder (the
Poisson tail mass), which is how every table here carries its error bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "jump_matrix",
    "discrete_halfline_kernel",
    "poisson_weights",
    "q_t",
    "q_row",
    "HalfLineKernelTable",
    "build_kernel_table",
    "kernel_rows_for_times",
    "line_kernel_row",
    "EnvelopePoint",
    "QtEnvelopeFit",
    "qtlem_envelope_check",
]


def jump_matrix(size: int) -> np.ndarray:
    """Dense jump-chain matrix on states 0..size-1 (mass beyond is dropped)."""
    p = np.zeros((size, size))
    p[0, 1] = 1.0
    for m in range(1, size):
        p[m, m - 1] = 0.5
        if m + 1 < size:
            p[m, m + 1] = 0.5
    return p


def discrete_halfline_kernel(k_max: int, m_max: int) -> np.ndarray:
    """p_k(a, m) for all k <= k_max, a, m <= m_max, as a (k_max+1, M, M) DP.

    The state space is enlarged internally so that no probability can reach
    the truncation boundary within k_max steps: the returned table is exact
    up to float accumulation.
    """
    size = m_max + k_max + 2
    out = np.empty((k_max + 1, m_max + 1, m_max + 1))
    # evolve each starting row independently over the enlarged state space
    for a in range(m_max + 1):
        v = np.zeros(size)
        v[a] = 1.0
        out[0, a] = v[: m_max + 1]
        for k in range(1, k_max + 1):
            v = _jump_step(v)
            out[k, a] = v[: m_max + 1]
    return out


def _jump_step(v: np.ndarray) -> np.ndarray:
    """One jump-chain step of a distribution vector on {0..size-1}."""
    w = np.zeros_like(v)
    # from 0 all mass goes to 1; from m>=1 it splits evenly
    w[1:-1] += 0.5 * v[2:]
    w[0] += 0.5 * v[1]
    w[1] += v[0]
    w[2:] += 0.5 * v[1:-1]
    return w


def _chernoff_k_max(t: float, tol: float) -> int:
    """Initial truncation order with Poisson tail < tol (Chernoff bound)."""
    if t <= 0:
        return 0
    k = int(t) + 1
    log_tol = math.log(tol)
    while True:
        # P(Pois(t) >= k) <= exp(-t + k - k log(k/t)) for k > t
        if k > t and (-t + k - k * math.log(k / t)) < log_tol:
            return k
        k = max(k + 1, int(k * 1.05))


def poisson_weights(t: float, tol: float) -> np.ndarray:
    """Weights e^{-t} t^k / k! for k = 0..k_max with tail mass < tol.

    Computed in log space (no underflow).  The Chernoff-based initial order
    is refined downwards with the exact geometric domination of the tail,
    sum_{j>k} w_j <= w_{k+1} / (1 - t/(k+2)) for k+2 > t, which stays
    certifiable where naive float summation saturates.
    """
    if t == 0.0:
        return np.ones(1)
    k_hi = _chernoff_k_max(t, tol * 1e-3) + 1
    k = np.arange(k_hi + 1)
    logw = -t + k * math.log(t) - np.array([math.lgamma(x + 1.0) for x in k])

    def tail_bound(k_max: int) -> float:
        if k_max + 2 <= t or k_max + 1 > k_hi:
            return math.inf
        return math.exp(logw[k_max + 1]) / (1.0 - t / (k_max + 2))

    k_max = k_hi - 1
    if tail_bound(k_max) >= tol:
        raise RuntimeError(
            f"could not certify Poisson tail < {tol} at t={t}; increase the cap"
        )
    while k_max > 1 and tail_bound(k_max - 1) < tol:
        k_max -= 1
    return np.exp(logw[: k_max + 1])


def _kahan_weighted_rows(weights: np.ndarray, a: int, m_max: int) -> np.ndarray:
    """sum_k weights[k] * p_k(a, .) on states 0..m_max with compensated sums."""
    k_max = len(weights) - 1
    size = m_max + 1
    v = np.zeros(max(size, a + k_max + 2))
    v[a] = 1.0
    acc = np.zeros(size)
    comp = np.zeros(size)
    for k in range(k_max + 1):
        term = weights[k] * v[:size]
        y = term - comp
        t_new = acc + y
        comp = (t_new - acc) - y
        acc = t_new
        if k < k_max:
            v = _jump_step(v)
    return acc


def q_t(a: int, m: int, t: float, tol: float = 1e-12) -> float:
    """Exact q_t(a, m) with absolute error <= tol (uniformization)."""
    if a < 0 or m < 0:
        raise ValueError("states live on Z_+")
    if not 0 < tol <= 1e-6:
        raise ValueError("tol must lie in (0, 1e-6]")
    if t == 0.0:
        return 1.0 if a == m else 0.0
    w = poisson_weights(t, tol)
    if m > a + len(w) - 1:
        return 0.0  # unreachable within the certified order: mass < tol anyway
    row = _kahan_weighted_rows(w, a, max(a, m))
    return float(row[m])


def q_row(a: int, t: float, m_max: int, tol: float = 1e-12) -> np.ndarray:
    """q_t(a, m) for m = 0..m_max, each entry with absolute error <= tol."""
    if t == 0.0:
        out = np.zeros(m_max + 1)
        if a <= m_max:
            out[a] = 1.0
        return out
    w = poisson_weights(t, tol)
    return _kahan_weighted_rows(w, a, m_max)


@dataclass
class HalfLineKernelTable:
    """q_t(a, m) for a <= a_max, m <= m_max, with a certified truncation error.

    m_max >= a_max + k_max, so no stored row can lose mass past the column
    boundary: every row sums to 1 within truncation_error.
    """

    t: float
    a_max: int
    m_max: int
    values: np.ndarray
    truncation_error: float
    k_max: int

    def __post_init__(self):
        v = self.values
        if v.shape != (self.a_max + 1, self.m_max + 1):
            raise ValueError("values must be (a_max+1) x (m_max+1)")
        if self.m_max < self.a_max + self.k_max:
            raise ValueError("need m_max >= a_max + k_max (no-leak rule)")
        if ((v < -1e-15) | (v > 1.0 + 1e-12)).any():
            raise ValueError("entries must be probabilities")
        rows = v.sum(axis=1)
        if (np.abs(rows - 1.0) > self.truncation_error + 1e-12).any():
            raise ValueError("row sums violate the certified truncation error")
        # detailed balance w.r.t. the degree measure, on the square block
        sq = v[:, : self.a_max + 1]
        deg = np.full(self.a_max + 1, 2.0)
        deg[0] = 1.0
        defect = np.abs(deg[:, None] * sq - (deg[:, None] * sq).T).max()
        if defect > 10 * max(self.truncation_error, 1e-15):
            raise ValueError(f"detailed balance defect {defect} too large")

    def square(self) -> np.ndarray:
        """The (a_max+1) x (a_max+1) block q_t(a, b), a, b <= a_max."""
        return self.values[:, : self.a_max + 1]

    def to_csv(self, path, tol_label: float | None = None):
        """Export as CSV with header t,a,m,q,tol (atomic write)."""
        import os
        import tempfile

        tol = self.truncation_error if tol_label is None else tol_label
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)))
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write("t,a,m,q,tol\n")
                for a in range(self.a_max + 1):
                    for m in range(self.m_max + 1):
                        fh.write(
                            f"{self.t:.17g},{a},{m},{self.values[a, m]:.17g},{tol:.3g}\n"
                        )
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise


def build_kernel_table(t: float, a_max: int, tol: float = 1e-12) -> HalfLineKernelTable:
    """Table with rows a = 0..a_max, columns wide enough that nothing leaks."""
    if t == 0.0:
        return HalfLineKernelTable(
            t=0.0, a_max=a_max, m_max=a_max, values=np.eye(a_max + 1),
            truncation_error=0.0, k_max=0,
        )
    w = poisson_weights(t, tol)
    k_max = len(w) - 1
    m_max = a_max + k_max + 1
    vals = np.empty((a_max + 1, m_max + 1))
    for a in range(a_max + 1):
        vals[a] = _kahan_weighted_rows(w, a, m_max)
    return HalfLineKernelTable(
        t=t, a_max=a_max, m_max=m_max, values=vals, truncation_error=tol, k_max=k_max
    )


def kernel_rows_for_times(t_values, m_max: int, tol: float = 1e-12) -> np.ndarray:
    """(T, m_max+1) matrix of rows q_t(0, .), one per requested time."""
    rows = np.empty((len(t_values), m_max + 1))
    for i, t in enumerate(t_values):
        rows[i] = q_row(0, float(t), m_max, tol)
    return rows


def line_kernel_row(t: float, m_max: int, tol: float = 1e-12) -> np.ndarray:
    """q^Z_t(0, m) for the unit-rate walk on the full line, m = 0..m_max.

    Same uniformization, with the binomial jump chain of Z; used by tests to
    check the reflection identity q_t(0,m) = (2 - 1{m=0}) q^Z_t(0,m).
    """
    w = poisson_weights(t, tol)
    k_max = len(w) - 1
    out = np.zeros(m_max + 1)
    comp = np.zeros(m_max + 1)
    # p_k(0, m) on Z = C(k, (k+m)/2) / 2^k for |m| <= k, k = m mod 2
    for k in range(k_max + 1):
        if w[k] == 0.0:
            continue
        hi = min(m_max, k)
        for m in range(k % 2, hi + 1, 2):
            lc = math.lgamma(k + 1) - math.lgamma((k + m) / 2 + 1) - math.lgamma(
                (k - m) / 2 + 1
            ) - k * math.log(2.0)
            term = w[k] * math.exp(lc)
            y = term - comp[m]
            t_new = out[m] + y
            comp[m] = (t_new - out[m]) - y
            out[m] = t_new
    return out


# ---------------------------------------------------------------------------
# envelope checks against the two-branch kernel bounds
# ---------------------------------------------------------------------------


@dataclass
class EnvelopePoint:
    t: float
    m: int
    q: float
    envelope: float
    slack: float  # envelope/q for upper, q/envelope for lower
    passes: bool


@dataclass
class QtEnvelopeFit:
    """Fitted constants for the half-line kernel bounds at a given epsilon.

    Diffusive branch (t >= eps*m):
        upper: q_t(0,m) <= c1 (1 ^ t^-1/2) exp(-c2 m^2/(1 v t))
        lower: q_t(0,m) >= c3 (1 ^ t^-1/2) exp(-c4 m^2/(1 v t))
    Poisson branch (t < eps*m, m >= 1):
        upper: q_t(0,m) <= c5 exp(-c6 m (1 + log(m/t)))
    """

    eps: float
    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    c6: float
    feasible: bool
    collapse_slope: float
    collapse_r2: float
    per_point: list = field(default_factory=list)


def _rate_grid(lo: float, hi: float, per_decade: int = 32) -> np.ndarray:
    n = max(2, int(round(per_decade * math.log10(hi / lo))))
    return np.exp(np.linspace(math.log(lo), math.log(hi), n))


def qtlem_envelope_check(
    points,
    q_values,
    eps: float = 1.0,
    amp_cap: float = 1e6,
    pin_c2: float | None = None,
    pin_c4: float | None = None,
    pin_c6: float | None = None,
) -> QtEnvelopeFit:
    """Fit the kernel envelope constants on exact values q_t(0, m).

    points: iterable of (t, m); q_values: matching exact kernel values.
    Diffusive branch (t >= eps*m): the upper fit reports the steepest rate
    c2 whose implied amplitude c1 = max q/(pref exp(-c2 x)) stays under
    amp_cap; the lower fit takes per candidate rate the maximal amplitude
    c3 = min q/(pref exp(-c4 x)) and keeps the candidate that hugs the data
    tightest.  Rates may instead be pinned (a pinned rate steeper than the
    data supports drives the amplitude past amp_cap: reported infeasible).
    Everything is computed in log space, so deep-tail points cost nothing.

    The collapse regression of log((1 v sqrt t) q) on m^2/(1 v t) uses the
    diffusive window m <= sqrt(10 t) and m >= 1: the origin has degree 1
    rather than 2 and sits a fixed log 2 off the interior line.
    """
    pts = [(float(t), int(m)) for t, m in points]
    q = np.asarray(q_values, dtype=float)
    if len(pts) == 0 or len(pts) != len(q):
        raise ValueError("need matching, nonempty points and values")

    diff_idx = [i for i, (t, m) in enumerate(pts) if t >= eps * m]
    pois_idx = [i for i, (t, m) in enumerate(pts) if t < eps * m and m >= 1]

    c1 = c2 = c3 = c4 = c5 = c6 = float("nan")
    feasible = True
    per_point: list[EnvelopePoint] = []
    log_cap = math.log(amp_cap)

    slope, r2 = float("nan"), float("nan")
    if diff_idx:
        t_arr = np.array([pts[i][0] for i in diff_idx])
        m_arr = np.array([pts[i][1] for i in diff_idx], dtype=float)
        q_arr = q[diff_idx]
        log_pref = np.minimum(0.0, -0.5 * np.log(np.maximum(t_arr, 1e-300)))
        x = m_arr**2 / np.maximum(1.0, t_arr)
        pos = q_arr > 0.0
        logq = np.where(pos, np.log(np.where(pos, q_arr, 1.0)), -math.inf)

        # upper envelope
        c2_grid = [pin_c2] if pin_c2 is not None else list(_rate_grid(1e-3, 10.0))
        best = None
        for c2_cand in c2_grid:
            log_c1 = float(np.max(logq - log_pref + c2_cand * x))
            if log_c1 <= log_cap:
                best = (c2_cand, log_c1)
        if best is None:
            feasible = False
            c2 = c2_grid[-1]
            c1 = math.inf
        else:
            c2 = best[0]
            c1 = math.exp(best[1])
        for j, i in enumerate(diff_idx):
            log_env = (math.log(c1) if c1 < math.inf else math.inf) + log_pref[j] - c2 * x[j]
            ok = (logq[j] <= log_env + 1e-12) if c1 < math.inf else False
            feasible &= ok
            env = math.exp(log_env) if log_env < 700 else math.inf
            per_point.append(EnvelopePoint(
                t=pts[i][0], m=pts[i][1], q=float(q[i]), envelope=env,
                slack=math.exp(min(log_env - logq[j], 700)) if pos[j] else math.inf,
                passes=bool(ok),
            ))

        # lower envelope: only float-positive values are testable
        if pos.any():
            c4_grid = [pin_c4] if pin_c4 is not None else list(_rate_grid(1e-3, 10.0))
            best = None
            for c4_cand in c4_grid:
                log_c3 = float(np.min(logq[pos] - log_pref[pos] + c4_cand * x[pos]))
                tightness = float(np.max(logq[pos] - (log_c3 + log_pref[pos] - c4_cand * x[pos])))
                if best is None or tightness < best[2]:
                    best = (c4_cand, log_c3, tightness)
            c4, log_c3, _ = best
            c3 = math.exp(log_c3)
            if not (0.0 < c3 < math.inf):
                feasible = False

        # diffusive-window collapse, interior sites only
        win = (m_arr >= 1) & (m_arr <= np.sqrt(10.0 * np.maximum(1.0, t_arr))) & pos
        if win.sum() >= 3:
            yy = logq[win] - log_pref[win]
            xx = x[win]
            sl, ic = np.polyfit(xx, yy, 1)
            resid = yy - (sl * xx + ic)
            ss_tot = float(np.sum((yy - yy.mean()) ** 2))
            r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
            slope = float(sl)

    if pois_idx:
        t_arr = np.array([pts[i][0] for i in pois_idx])
        m_arr = np.array([pts[i][1] for i in pois_idx], dtype=float)
        q_arr = q[pois_idx]
        g = m_arr * (1.0 + np.log(m_arr / t_arr))
        pos = q_arr > 0.0
        logq = np.where(pos, np.log(np.where(pos, q_arr, 1.0)), -math.inf)
        c6_grid = [pin_c6] if pin_c6 is not None else list(_rate_grid(1e-3, 3.0))
        best = None
        for c6_cand in c6_grid:
            log_c5 = float(np.max(logq + c6_cand * g))
            if log_c5 <= log_cap:
                best = (c6_cand, log_c5)
        if best is None:
            feasible = False
        else:
            c6 = best[0]
            c5 = math.exp(best[1])
            for j, i in enumerate(pois_idx):
                log_env = math.log(c5) - c6 * g[j]
                ok = logq[j] <= log_env + 1e-12
                feasible &= ok
                per_point.append(EnvelopePoint(
                    t=pts[i][0], m=pts[i][1], q=float(q[i]),
                    envelope=math.exp(log_env) if log_env < 700 else math.inf,
                    slack=math.exp(min(log_env - logq[j], 700)) if pos[j] else math.inf,
                    passes=bool(ok),
                ))

    return QtEnvelopeFit(
        eps=eps, c1=c1, c2=c2, c3=c3, c4=c4, c5=c5, c6=c6,
        feasible=bool(feasible), collapse_slope=slope,
        collapse_r2=float(r2), per_point=per_point,
    )
