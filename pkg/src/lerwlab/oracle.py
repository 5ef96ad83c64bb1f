"""Brute-force ground truth at small scale.

enumerate_le_law walks every one of the (2d)^N length-N trajectories with an
odometer, loop-erases each, and tallies functionals in exact integer
arithmetic; the bundled Monte Carlo estimator runs the same truncated
functional (fixed length, no stabilization logic) so the two are directly
comparable.  matrix_exponential_kernel is the scaling-and-squaring oracle
for the uniformization route.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import engine
from .engine import ResourceGateError
from .halfline import jump_matrix
from .lattice import coord_bits, unpack_point

__all__ = [
    "EnumeratedLaw",
    "enumerate_le_law",
    "truncated_mc_law",
    "matrix_exponential_kernel",
    "ResourceGateError",
]

FUNCTIONALS = ("endpoint", "le_length", "tau_window")


@dataclass(frozen=True)
class EnumeratedLaw:
    """Exact law of a functional of LE(S[0, N]) as integer counts over (2d)^N."""

    horizon: int
    d: int
    functional: str
    support: dict  # outcome -> integer count
    total: int

    def __post_init__(self):
        if sum(self.support.values()) != self.total:
            raise ValueError("counts must sum to (2d)^N exactly")

    def probability(self, outcome) -> float:
        return self.support.get(outcome, 0) / self.total


def enumerate_le_law(
    n_steps: int,
    d: int,
    functional: str = "endpoint",
    target=None,
    window: tuple[int, int] = (1, 2),
) -> EnumeratedLaw:
    """Exact law of a functional of the erased length-N walk.

    functional: 'endpoint' (law of the erased path's last point),
    'le_length' (law of its length), or 'tau_window' (indicator that the
    target's hitting index lies in [window[0], window[1]]).
    """
    if functional not in FUNCTIONALS:
        raise ValueError(f"functional must be one of {FUNCTIONALS}")
    if target is None:
        target = (1,) + (0,) * (d - 1)
    keys, vals, len_counts, tau_count, total = engine.enumerate_le(
        d, n_steps, target, window[0], window[1]
    )
    if functional == "endpoint":
        bits = coord_bits(d)
        support = {
            unpack_point(int(k), d, bits): int(v) for k, v in zip(keys, vals)
        }
    elif functional == "le_length":
        support = {i: int(c) for i, c in enumerate(len_counts) if c > 0}
    else:
        support = {True: tau_count, False: total - tau_count}
        if support[True] == 0:
            del support[True]
        if support[False] == 0:
            del support[False]
    return EnumeratedLaw(
        horizon=n_steps, d=d, functional=functional, support=support, total=total
    )


def truncated_mc_law(
    n_steps: int,
    d: int,
    seed: int,
    replicas: int,
    target=None,
    window: tuple[int, int] = (1, 2),
):
    """Monte Carlo draws of the same truncated functionals.

    Returns (endpoint_points, le_lengths, tau_in_window) with one entry per
    replica; endpoint_points are coordinate tuples.
    """
    if target is None:
        target = (1,) + (0,) * (d - 1)
    codes, lengths, taus = engine.truncated_lerw_mc(
        seed, d, n_steps, 0, replicas, target
    )
    bits = coord_bits(d)
    endpoints = [unpack_point(int(c), d, bits) for c in codes]
    in_window = (taus >= window[0]) & (taus <= window[1])
    return endpoints, lengths, in_window


def matrix_exponential_kernel(t: float, size: int) -> np.ndarray:
    """exp(t (P - I)) for the half-line jump chain truncated to `size` states.

    Scaling-and-squaring oracle for the uniformization kernel.  The row-sum
    defect of the first row measures mass lost past the truncation; callers
    get an error if it exceeds 1e-9 (enlarge `size`).
    """
    if size > 2048:
        raise ResourceGateError("matrix exponential oracle capped at size 2048")
    q = jump_matrix(size) - np.eye(size)
    out = expm(t * q)
    defect = abs(out[0].sum() - 1.0)
    if defect > 1e-9:
        raise ValueError(
            f"row-sum defect {defect:.2e} at size {size}: boundary not negligible"
        )
    return out
