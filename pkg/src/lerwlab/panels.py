"""Frozen desk-scale replica panels and their on-disk cache.

The verification experiments re-use a small number of big Monte Carlo
panels.  Each panel is a pure function of its configuration (seed included),
so results are cached on disk keyed by the exact configuration plus the
engine semantics version; a cache hit is bit-identical to a fresh run.
Delete the cache directory (LERWLAB_CACHE, default ./results/panels) to
force regeneration.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

from . import engine
from .lattice import SimConfig

# Bump only when engine output semantics change (stream layout, erasure
# logic, flag meanings): stale caches must never survive a semantic change.
ENGINE_SEMANTICS_VERSION = 1

__all__ = [
    "Panel",
    "panel_key",
    "load_or_run_panel",
    "MASTER",
    "RHO16",
    "GREEN",
    "DISPLACEMENT",
    "displacement_time_grid",
    "annealed_time_grid",
    "PanelSpec",
]


def _cache_dir() -> str:
    return os.environ.get(
        "LERWLAB_CACHE",
        os.path.join(os.getcwd(), "results", "panels"),
    )


@dataclass(frozen=True)
class PanelSpec:
    """A frozen named panel: config + recorded targets (+ kernel horizon)."""

    name: str
    config: SimConfig
    targets: tuple
    kernel_times: tuple = ()  # displacement panels carry kernel rows

    def describe(self) -> dict:
        return {
            "name": self.name,
            "d": self.config.d,
            "seed": self.config.seed,
            "replica_count": self.config.replica_count,
            "r_in": self.config.r_in,
            "rho": self.config.rho,
            "max_steps": self.config.max_steps,
            "targets": [list(t) for t in self.targets],
            "kernel_times": list(self.kernel_times),
            "engine_version": ENGINE_SEMANTICS_VERSION,
        }


def panel_key(spec: PanelSpec) -> str:
    blob = json.dumps(spec.describe(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _kernel_rows(spec: PanelSpec):
    if not spec.kernel_times:
        return None
    from .halfline import q_row

    rows = []
    horizon = 0
    for t in spec.kernel_times:
        # horizon where the kernel tail is below 1e-6: the omitted mass
        # contributes relative bias ~1e-6 to any bounded functional
        row = q_row(0, float(t), _position_horizon(float(t), 1e-6))
        horizon = max(horizon, len(row) - 1)
        rows.append(row)
    mat = np.zeros((len(rows), horizon + 1))
    for i, row in enumerate(rows):
        mat[i, : len(row)] = row
    return mat


def _position_horizon(t: float, tail: float) -> int:
    """Smallest H with sum_{m > H} q_t(0, m) < tail."""
    from .halfline import q_row

    h = max(8, int(5.0 * np.sqrt(max(t, 1.0))))
    while True:
        row = q_row(0, t, h)
        csum = np.cumsum(row)
        idx = np.searchsorted(csum, 1.0 - tail)
        if idx < h - 1:
            return int(idx) + 1
        h *= 2


def load_or_run_panel(spec: PanelSpec, verbose: bool = False) -> engine.PanelResult:
    key = panel_key(spec)
    path = os.path.join(_cache_dir(), f"{spec.name}-{key}.npz")
    if os.path.exists(path):
        with np.load(path) as z:
            return engine.PanelResult(
                stable_len=z["stable_len"],
                lerw_len=z["lerw_len"],
                steps=z["steps"],
                flags=z["flags"],
                tau=z["tau"],
                srw_hit=z["srw_hit"],
                z_lerw=z["z_lerw"] if "z_lerw" in z else None,
                z_srw=z["z_srw"] if "z_srw" in z else None,
            )
    if verbose:
        print(f"[panels] running {spec.name} ({spec.config.replica_count} replicas)")
    rows = _kernel_rows(spec)
    res = engine.run_lerw_panel(
        spec.config, 0, spec.config.replica_count, targets=spec.targets,
        kernel_rows=rows,
    )
    os.makedirs(_cache_dir(), exist_ok=True)
    payload = {
        "stable_len": res.stable_len,
        "lerw_len": res.lerw_len,
        "steps": res.steps,
        "flags": res.flags,
        "tau": res.tau,
        "srw_hit": res.srw_hit,
    }
    if res.z_lerw is not None:
        payload["z_lerw"] = res.z_lerw
        payload["z_srw"] = res.z_srw
    tmp = path + ".tmp.npz"
    with open(tmp, "wb") as fh:
        np.savez_compressed(fh, **payload)
    os.replace(tmp, path)
    with open(os.path.join(_cache_dir(), f"{spec.name}-{key}.json"), "w") as fh:
        json.dump(spec.describe(), fh, indent=1, sort_keys=True)
    return res


# ---------------------------------------------------------------------------
# the frozen desk-scale panels
# ---------------------------------------------------------------------------

_AXIS = lambda k: (k, 0, 0, 0, 0)  # noqa: E731

# Window/hitting panel: serves the time-window law, the annealed estimators
# and the rho-doubling reference.  r_in = 72 keeps the fraction of replicas
# whose stabilized prefix is shorter than the largest window (575) near 1e-4.
MASTER = PanelSpec(
    name="master",
    config=SimConfig(d=5, seed=20250810, replica_count=1_000_000, r_in=72.0, rho=8.0),
    targets=tuple(_AXIS(k) for k in range(2, 7)),
)

# Fresh streams (different seed), doubled truncation ratio, same geometry.
RHO16 = PanelSpec(
    name="rho16",
    config=SimConfig(d=5, seed=20250811, replica_count=60_000, r_in=72.0, rho=16.0),
    targets=tuple(_AXIS(k) for k in range(2, 7)),
)

# Trace-membership panel: pathwise SRW-trace vs stabilized-prefix hits.
GREEN = PanelSpec(
    name="green",
    config=SimConfig(d=5, seed=20250812, replica_count=10_000_000, r_in=12.0, rho=8.0),
    targets=tuple(_AXIS(k) for k in range(3, 7)),
)


def displacement_time_grid() -> tuple:
    return tuple(float(t) for t in np.exp(np.linspace(np.log(1e2), np.log(1e5), 8)))


# Mean-displacement panel: kernel-weighted |L_m| and |S_m| per replica.
# r_in = 112 keeps P(stabilized prefix < kernel horizon at t=1e5) well under
# the 1e-3 rejection budget (prefix mean ~ 8400 vs horizon ~ 1700).
DISPLACEMENT = PanelSpec(
    name="displacement",
    config=SimConfig(d=5, seed=20250813, replica_count=20_000, r_in=112.0, rho=8.0),
    targets=(),
    kernel_times=displacement_time_grid(),
)


def annealed_time_grid(x_norm: float, eps: float = 0.5) -> list[float]:
    """Times for one |x| so that w = (|x|^4/(1 v t))^(1/3) sweeps [0.5, 4],
    padded (where t >= eps |x| allows) so the pooled grid spans widely."""
    x4 = x_norm**4
    ws = list(np.exp(np.linspace(np.log(0.5), np.log(4.0), 6)))
    if x_norm <= 2.5:
        ws = [0.171, 0.25, 0.35] + ws  # long-time pad for the smallest x
    ts = []
    for w in ws:
        t = x4 / w**3
        t = max(t, eps * x_norm, 1.0)
        ts.append(float(t))
    return sorted(set(round(t, 6) for t in ts))
