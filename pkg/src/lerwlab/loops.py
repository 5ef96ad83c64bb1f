"""Chronological loop-erasure and derived path statistics.

Batch erasure follows the last-visit recursion: sigma_0 is the last visit
time of the first point, and sigma_{i+1} is the last visit time of the point
right after sigma_i; the erasure is the path read off at the sigma indices.
The incremental form keeps the erased path of every prefix by chopping back
to the held first-occurrence index whenever a site is revisited; the two are
provably identical and the test suite cross-checks them on random input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import engine
from .lattice import SimConfig, is_lattice_path, norm

__all__ = [
    "loop_erase",
    "IncrementalLoopErasure",
    "LerwSample",
    "TauSample",
    "first_hit_index",
    "local_cut_points",
    "sample_lerw_prefix",
]


def loop_erase(path) -> np.ndarray:
    """Chronological loop-erasure of a finite nearest-neighbour path.

    Returns the erased path as an (j+1, d) int64 array.  The output is a
    simple path contained in the input point set, with the same first and
    last points.
    """
    path = np.asarray(path, dtype=np.int64)
    if path.ndim != 2 or len(path) == 0:
        raise ValueError("loop_erase needs a nonempty path")
    m = len(path) - 1
    last = {}
    for k, row in enumerate(map(tuple, path)):
        last[row] = k
    out = []
    k = 0
    while True:
        sigma = last[tuple(path[k])]
        out.append(path[sigma])
        if sigma == m:
            break
        k = sigma + 1
    return np.array(out, dtype=np.int64)


class IncrementalLoopErasure:
    """Online loop-erasure: after feeding lambda[0..m] the held path equals
    loop_erase(lambda[0..m]), at amortized O(1) per step."""

    def __init__(self):
        self._pts: list[tuple[int, ...]] = []
        self._index: dict[tuple[int, ...], int] = {}

    def feed(self, point):
        p = tuple(int(c) for c in point)
        if self._pts:
            gap = sum(abs(a - b) for a, b in zip(p, self._pts[-1]))
            if gap != 1:
                raise ValueError(f"non-adjacent input point {p}")
        held = self._index.get(p)
        if held is None:
            self._index[p] = len(self._pts)
            self._pts.append(p)
        else:
            for q in self._pts[held + 1 :]:
                del self._index[q]
            del self._pts[held + 1 :]

    @property
    def path(self) -> np.ndarray:
        return np.array(self._pts, dtype=np.int64)

    def __len__(self) -> int:
        return len(self._pts)


@dataclass(frozen=True)
class LerwSample:
    """A truncated sample of the infinite loop-erased walk.

    path[0..stable_len] is certified to follow the law of the infinite-LERW
    prefix up to its first exit of B(0, r_in), up to total variation
    bias_bound.  The tail of path beyond stable_len is the erasure of the
    truncated trajectory only and carries no certificate.
    """

    path: np.ndarray
    stable_len: int
    bias_bound: float
    exited_radius: float

    def __post_init__(self):
        if not 0 <= self.stable_len < len(self.path):
            raise ValueError("stable_len out of range")
        if not 0.0 <= self.bias_bound < 1.0:
            raise ValueError("bias_bound must lie in [0, 1)")


@dataclass(frozen=True)
class TauSample:
    """First hitting index of a target site along a simple path."""

    target: tuple[int, ...]
    hit: bool
    tau: int | None = None

    def __post_init__(self):
        if self.hit != (self.tau is not None):
            raise ValueError("hit flag must match tau presence")


def first_hit_index(path, x) -> TauSample:
    """tau = min{j : path[j] = x}, or a miss; unique on a simple path."""
    path = np.asarray(path, dtype=np.int64)
    x = tuple(int(c) for c in x)
    hits = np.flatnonzero((path == np.array(x, dtype=np.int64)).all(axis=1))
    if len(hits) == 0:
        return TauSample(target=x, hit=False)
    return TauSample(target=x, hit=True, tau=int(hits[0]))


def local_cut_points(path, i: int, j: int) -> set[tuple[int, ...]]:
    """Sites path[k], i <= k <= j, with path[i..k] disjoint from path[k+1..j].

    Linear-time: k fails exactly when some site occurs at a <= k within
    [i, j] and again at b > k, so the failing k form the union of
    [a, b-1] over consecutive same-site occurrences.
    """
    path = np.asarray(path, dtype=np.int64)
    if not (0 <= i <= j <= len(path) - 1):
        raise IndexError(f"window [{i}, {j}] out of range for len {len(path) - 1}")
    bad = np.zeros(j - i + 2, dtype=np.int64)
    prev: dict[tuple[int, ...], int] = {}
    for k in range(i, j + 1):
        site = tuple(path[k])
        a = prev.get(site)
        if a is not None:
            bad[a - i] += 1
            bad[k - i] -= 1
        prev[site] = k
    bad = np.cumsum(bad[:-1])
    return {tuple(path[k]) for k in range(i, j + 1) if bad[k - i] == 0}


def sample_lerw_prefix(config: SimConfig, replica_id: int = 0) -> LerwSample:
    """One truncated infinite-LERW sample from the replica's own stream.

    Runs the walk to its first exit of B(0, r_out), erases it, and marks the
    prefix up to the first exit of B(0, r_in) as stabilized; the total
    variation between that prefix's law and the infinite-walk prefix law is
    at most config.bias_bound().
    """
    config.require_transient()
    res = engine.run_lerw_replica(config, replica_id)
    if res.flag != engine.FLAG_OK:
        raise _truncation_error(res.flag, config)
    return LerwSample(
        path=res.path,
        stable_len=res.stable_len,
        bias_bound=config.bias_bound(),
        exited_radius=config.r_out,
    )


def _truncation_error(flag: int, config: SimConfig):
    from .lattice import TruncationError

    what = {
        engine.FLAG_STEP_CAP: f"step cap {config.max_steps} exceeded",
        engine.FLAG_LEN_CAP: "erased-path workspace cap exceeded",
    }.get(flag, f"engine flag {flag}")
    return TruncationError(what)
