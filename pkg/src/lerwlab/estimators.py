"""Monte Carlo estimators over replica panels.

Every estimator here consumes the per-replica arrays of a PanelResult and
applies one shared accounting policy:

* engine-capped replicas (nonzero flags) are excluded and counted;
* a replica can only certify events inside its stabilized prefix, so
  estimators whose window or read position sticks out of a replica's prefix
  exclude that replica and count it as unresolved/overrun, never clipping
  silently;
* every estimate carries an explicit bias certificate: the configuration's
  truncation bound plus the unresolved fraction (total-variation style) plus
  any certified kernel tail.

Excluded-replica fractions above `rejection_cap` raise ConfigurationError:
that is a sign the run geometry is too small for the question asked.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .lattice import SimConfig, norm, norm1
from .stats import clopper_pearson, multinomial_simultaneous_ci, normal_mean_ci

__all__ = [
    "ConfigurationError",
    "HitWindowEstimate",
    "TauHistogram",
    "AnnealedEstimate",
    "GreenReport",
    "DisplacementReport",
    "estimate_window_hit",
    "estimate_tau_histogram",
    "estimate_annealed_rao_blackwell",
    "estimate_annealed_direct",
    "estimate_green",
    "estimate_displacement_exponent",
    "records_to_json_lines",
]

REJECTION_CAP = 2e-3


class ConfigurationError(ValueError):
    """The run geometry cannot resolve the requested quantity."""


def _certified_tau(panel: engine.PanelResult, target_idx: int) -> np.ndarray:
    """tau per replica, -1 unless the hit lies inside the stabilized prefix."""
    tau = panel.tau[:, target_idx].astype(np.int64)
    stable = panel.stable_len.astype(np.int64)
    return np.where((tau >= 0) & (tau <= stable), tau, -1)


@dataclass(frozen=True)
class HitWindowEstimate:
    """Estimate of (1/n) sum_{m in window} P(L_m = x) = P(tau_x in window)/n."""

    x: tuple
    n: int
    window: tuple[int, int]
    hits: int
    replicas: int           # resolved replicas (the denominator)
    estimate: float
    ci95: tuple[float, float]
    bias_bound: float
    unresolved: int
    seed: int

    def record(self) -> dict:
        return {
            "quantity": "window_hit",
            "x": list(self.x),
            "n": self.n,
            "window": list(self.window),
            "method": "mc",
            "value": self.estimate,
            "ci_lo": self.ci95[0],
            "ci_hi": self.ci95[1],
            "replicas": self.replicas,
            "bias_bound": self.bias_bound,
            "seed": self.seed,
        }


def estimate_window_hit(
    panel: engine.PanelResult,
    config: SimConfig,
    target: tuple,
    target_idx: int,
    n: int,
    window: tuple[int, int] | None = None,
    rejection_cap: float = REJECTION_CAP,
) -> HitWindowEstimate:
    """Window-hit estimate from a recorded panel.

    window defaults to [n, 2n-1].  Preconditions follow the window law:
    the target must be nonzero and the geometry large enough,
    r_in >= 2 (|x| v sqrt(2n)).
    """
    if all(c == 0 for c in target):
        raise ConfigurationError("target must differ from the origin")
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    window = (n, 2 * n - 1) if window is None else (int(window[0]), int(window[1]))
    if window[0] > window[1] or window[0] < 0:
        raise ConfigurationError(f"bad window {window}")
    need = 2.0 * max(norm(target), math.sqrt(2.0 * n))
    if config.r_in < need:
        raise ConfigurationError(
            f"r_in={config.r_in} < 2(|x| v sqrt(2n)) = {need:.1f}: "
            "window not resolved inside the stabilized prefix"
        )
    ok = panel.flags == 0
    resolved = ok & (panel.stable_len >= window[1])
    n_res = int(resolved.sum())
    n_tot = len(panel.flags)
    unresolved = n_tot - n_res
    if n_res == 0 or unresolved / n_tot > rejection_cap:
        raise ConfigurationError(
            f"{unresolved}/{n_tot} replicas cannot resolve window {window} "
            f"(cap {rejection_cap}); enlarge r_in"
        )
    tau = _certified_tau(panel, target_idx)
    hits = int(((tau >= window[0]) & (tau <= window[1]) & resolved).sum())
    lo, hi = clopper_pearson(hits, n_res)
    bias = config.bias_bound() + unresolved / n_tot
    return HitWindowEstimate(
        x=tuple(target), n=n, window=window, hits=hits, replicas=n_res,
        estimate=hits / n_res / n, ci95=(lo / n, hi / n),
        bias_bound=bias, unresolved=unresolved, seed=config.seed,
    )


@dataclass(frozen=True)
class TauHistogram:
    """Histogram of the certified hitting index, with explicit miss mass."""

    x: tuple
    bin_edges: tuple          # [e0, e1), [e1, e2), ...
    counts: tuple             # per bin
    miss: int                 # resolved replicas with no certified hit
    replicas: int
    cis: tuple                # simultaneous 95% multinomial intervals
    miss_ci: tuple
    bias_bound: float
    unresolved: int
    seed: int

    def window_count(self, lo: int, hi: int) -> int:
        """Exact count of tau in [lo, hi] if bin edges align; else error."""
        edges = self.bin_edges
        try:
            i = edges.index(lo)
            j = edges.index(hi + 1)
        except ValueError as exc:
            raise ValueError(f"window [{lo},{hi}] not aligned to bins") from exc
        return int(sum(self.counts[i:j]))


def estimate_tau_histogram(
    panel: engine.PanelResult,
    config: SimConfig,
    target: tuple,
    target_idx: int,
    bin_edges,
    rejection_cap: float = REJECTION_CAP,
) -> TauHistogram:
    """Bin the certified hitting indices; the horizon is the last edge - 1."""
    if all(c == 0 for c in target):
        raise ConfigurationError("target must differ from the origin")
    edges = [int(e) for e in bin_edges]
    if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
        raise ConfigurationError("bin edges must be strictly increasing")
    horizon = edges[-1] - 1
    if config.r_in < 2.0 * max(norm(target), math.sqrt(float(horizon))):
        raise ConfigurationError("bins exceed the resolvable horizon for r_in")
    ok = panel.flags == 0
    resolved = ok & (panel.stable_len >= horizon)
    n_res = int(resolved.sum())
    n_tot = len(panel.flags)
    if n_res == 0 or (n_tot - n_res) / n_tot > rejection_cap:
        raise ConfigurationError(
            f"{n_tot - n_res}/{n_tot} replicas cannot resolve horizon {horizon}"
        )
    tau = _certified_tau(panel, target_idx)[resolved]
    hit = tau >= 0
    counts, _ = np.histogram(tau[hit], bins=np.array(edges))
    # partition: in-bin hits + everything else (never-hit and out-of-range)
    miss = n_res - int(counts.sum())
    cells = list(counts) + [miss]
    cis = multinomial_simultaneous_ci(np.array(cells))
    return TauHistogram(
        x=tuple(target), bin_edges=tuple(edges), counts=tuple(int(c) for c in counts),
        miss=miss, replicas=n_res, cis=tuple(cis[:-1]), miss_ci=cis[-1],
        bias_bound=config.bias_bound() + (n_tot - n_res) / n_tot,
        unresolved=n_tot - n_res, seed=config.seed,
    )


@dataclass(frozen=True)
class AnnealedEstimate:
    """Estimate of the annealed occupation probability P(X_t = x)."""

    x: tuple
    t: float
    method: str               # "rao_blackwell" or "direct"
    value: float
    ci95: tuple[float, float]
    replicas: int
    bias_bound: float
    rejected: int
    seed: int

    def record(self) -> dict:
        return {
            "quantity": "annealed",
            "x": list(self.x),
            "t": self.t,
            "method": self.method,
            "value": self.value,
            "ci_lo": self.ci95[0],
            "ci_hi": self.ci95[1],
            "replicas": self.replicas,
            "bias_bound": self.bias_bound,
            "seed": self.seed,
        }


def estimate_annealed_rao_blackwell(
    panel: engine.PanelResult,
    config: SimConfig,
    target: tuple,
    target_idx: int | None,
    t: float,
    kernel_row: np.ndarray,
    replica_slice: slice = slice(None),
) -> AnnealedEstimate:
    """Mean of q_t(0, tau_x) over replicas: holding-time noise integrated out.

    The per-replica value is the quenched probability of sitting at graph
    distance tau_x at time t, zero when the target was not hit inside the
    stabilized prefix.  The certificate adds the kernel mass beyond each
    replica's stabilized prefix (where hits cannot be certified) to the
    configuration bias.
    """
    ok = panel.flags[replica_slice] == 0
    stable = panel.stable_len[replica_slice].astype(np.int64)[ok]
    n_rep = int(ok.sum())
    if n_rep == 0:
        raise ConfigurationError("no usable replicas")
    if target_idx is None:  # the origin: tau = 0 identically, zero variance
        q0 = float(kernel_row[0])
        return AnnealedEstimate(
            x=tuple(target), t=float(t), method="rao_blackwell", value=q0,
            ci95=(q0, q0), replicas=n_rep, bias_bound=config.bias_bound(),
            rejected=int((~ok).sum()), seed=config.seed,
        )
    tau = panel.tau[replica_slice, target_idx].astype(np.int64)[ok]
    certified = (tau >= 0) & (tau <= stable)
    vals = np.zeros(n_rep)
    idx = tau[certified]
    inside = idx < len(kernel_row)
    v = np.zeros(int(certified.sum()))
    v[inside] = kernel_row[idx[inside]]
    vals[certified] = v
    mean, lo, hi = normal_mean_ci(vals)
    # kernel mass beyond each replica's certified prefix
    csum = np.cumsum(kernel_row)
    pos = np.minimum(stable, len(kernel_row) - 1)
    tail_bias = float(np.mean(1.0 - csum[pos]))
    return AnnealedEstimate(
        x=tuple(target), t=float(t), method="rao_blackwell", value=mean,
        ci95=(max(lo, 0.0), hi), replicas=n_rep,
        bias_bound=config.bias_bound() + tail_bias,
        rejected=int((~ok).sum()), seed=config.seed,
    )


def estimate_annealed_direct(
    panel: engine.PanelResult,
    config: SimConfig,
    target: tuple,
    target_idx: int | None,
    t: float,
    jump_positions: np.ndarray,
    replica_slice: slice = slice(None),
    rejection_cap: float = REJECTION_CAP,
) -> AnnealedEstimate:
    """Empirical frequency of {L_{Y_t} = x} with Y_t an independent position
    draw of the half-line walk at time t, one per replica.

    A replica is rejected (counted, capped) when its position draw falls
    outside the stabilized prefix, where the trace is not certified.
    """
    flags = panel.flags[replica_slice]
    stable = panel.stable_len[replica_slice].astype(np.int64)
    m_star = np.asarray(jump_positions, dtype=np.int64)
    if len(m_star) != len(flags):
        raise ValueError("one jump draw per replica required")
    ok = (flags == 0) & (m_star <= stable)
    n_ok = int(ok.sum())
    n_tot = len(flags)
    rejected = n_tot - n_ok
    if n_ok == 0 or rejected / n_tot > rejection_cap:
        raise ConfigurationError(
            f"horizon overrun rate {rejected}/{n_tot} exceeds {rejection_cap}"
        )
    if target_idx is None:
        hits = int(((m_star == 0) & ok).sum())
    else:
        tau = panel.tau[replica_slice, target_idx].astype(np.int64)
        hits = int(((tau == m_star) & ok).sum())
    lo, hi = clopper_pearson(hits, n_ok)
    return AnnealedEstimate(
        x=tuple(target), t=float(t), method="direct", value=hits / n_ok,
        ci95=(lo, hi), replicas=n_ok,
        bias_bound=config.bias_bound() + rejected / n_tot,
        rejected=rejected, seed=config.seed,
    )


@dataclass(frozen=True)
class GreenReport:
    """Trace-membership probabilities for the raw walk and the erased prefix."""

    x: tuple
    p_lerw: float
    p_srw: float
    ci_lerw: tuple[float, float]
    ci_srw: tuple[float, float]
    ratio_lerw: float         # |x|^(d-2) p_lerw
    ratio_srw: float
    replicas: int
    domination_violations: int  # pathwise lerw-hit without srw-hit (must be 0)
    seed: int

    def record(self) -> dict:
        return {
            "quantity": "green",
            "x": list(self.x),
            "method": "mc",
            "value": self.p_lerw,
            "ci_lo": self.ci_lerw[0],
            "ci_hi": self.ci_lerw[1],
            "p_srw": self.p_srw,
            "replicas": self.replicas,
            "seed": self.seed,
        }


def estimate_green(
    panel: engine.PanelResult,
    config: SimConfig,
    target: tuple,
    target_idx: int,
) -> GreenReport:
    """Pathwise indicators {x in raw trace} and {x in stabilized prefix}."""
    if all(c == 0 for c in target):
        raise ConfigurationError("target must differ from the origin")
    if config.r_in < 2.0 * norm(target):
        raise ConfigurationError("need r_in >= 2|x|")
    ok = panel.flags == 0
    n_ok = int(ok.sum())
    tau = _certified_tau(panel, target_idx)
    lerw_hit = (tau >= 0) & ok
    srw_hit = (panel.srw_hit[:, target_idx] > 0) & ok
    viol = int((lerw_hit & ~srw_hit).sum())
    k_l, k_s = int(lerw_hit.sum()), int(srw_hit.sum())
    d = config.d
    scale = norm(target) ** (d - 2)
    return GreenReport(
        x=tuple(target), p_lerw=k_l / n_ok, p_srw=k_s / n_ok,
        ci_lerw=clopper_pearson(k_l, n_ok), ci_srw=clopper_pearson(k_s, n_ok),
        ratio_lerw=scale * k_l / n_ok, ratio_srw=scale * k_s / n_ok,
        replicas=n_ok, domination_violations=viol, seed=config.seed,
    )


@dataclass(frozen=True)
class DisplacementReport:
    """log-log regression of mean displacement against time."""

    t_values: tuple
    mean_disp: tuple          # E|X_t| estimates (kernel-weighted |L|)
    se: tuple
    slope: float
    slope_ci: tuple[float, float]
    r2: float
    control_slope: float      # same harness on the raw-walk radii |S_m|
    control_slope_ci: tuple[float, float]
    replicas: int
    rejected: int
    seed: int


def estimate_displacement_exponent(
    panel: engine.PanelResult,
    config: SimConfig,
    t_values,
    rejection_cap: float = REJECTION_CAP,
) -> DisplacementReport:
    """Slope of log E|X_t| vs log t from kernel-weighted radii.

    Uses the per-replica sums Z(t) = sum_m q_t(0, m) |L_m| recorded by the
    panel; replicas whose stabilized prefix missed the kernel horizon were
    flagged there and are excluded (and counted) here.  The control column
    runs the identical pipeline on the raw-walk radii |S_m|.
    """
    t_arr = np.asarray(t_values, dtype=float)
    span = math.log10(t_arr.max() / t_arr.min())
    if span < 2.5:
        raise ConfigurationError(f"t grid spans {span:.2f} decades; need >= 2.5")
    if panel.z_lerw is None:
        raise ConfigurationError("panel was built without kernel rows")
    ok = panel.flags == 0
    n_ok = int(ok.sum())
    n_tot = len(panel.flags)
    if n_ok == 0 or (n_tot - n_ok) / n_tot > rejection_cap:
        raise ConfigurationError(
            f"horizon overrun rate {(n_tot - n_ok)}/{n_tot} exceeds {rejection_cap}"
        )
    from .stats import weighted_ols

    means, ses = [], []
    cmeans, cses = [], []
    for col in range(len(t_arr)):
        m, lo, hi = normal_mean_ci(panel.z_lerw[ok, col])
        means.append(m)
        ses.append((hi - lo) / (2 * 1.959963984540054))
        m, lo, hi = normal_mean_ci(panel.z_srw[ok, col])
        cmeans.append(m)
        cses.append((hi - lo) / (2 * 1.959963984540054))
    means = np.array(means)
    ses = np.maximum(np.array(ses), 1e-300)
    cmeans = np.array(cmeans)
    cses = np.maximum(np.array(cses), 1e-300)
    fit = weighted_ols(np.log(t_arr), np.log(means), sigma=ses / means)
    cfit = weighted_ols(np.log(t_arr), np.log(cmeans), sigma=cses / cmeans)
    z = 1.959963984540054
    return DisplacementReport(
        t_values=tuple(float(t) for t in t_arr),
        mean_disp=tuple(float(m) for m in means),
        se=tuple(float(s) for s in ses),
        slope=fit["slope"],
        slope_ci=(fit["slope"] - z * fit["slope_se"], fit["slope"] + z * fit["slope_se"]),
        r2=fit["r2"],
        control_slope=cfit["slope"],
        control_slope_ci=(
            cfit["slope"] - z * cfit["slope_se"],
            cfit["slope"] + z * cfit["slope_se"],
        ),
        replicas=n_ok,
        rejected=n_tot - n_ok,
        seed=config.seed,
    )


def records_to_json_lines(records) -> str:
    """Stable machine-readable dump: one JSON object per line."""
    return "\n".join(json.dumps(r, sort_keys=True) for r in records) + "\n"
