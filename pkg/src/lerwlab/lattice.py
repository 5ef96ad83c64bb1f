"""Z^d geometry: points, nearest-neighbour paths, norms, coordinate packing.

Conventions used across the whole package:

* a lattice point is an integer vector of length d (tuple or int64 ndarray);
* a path of length m is an (m+1, d) int64 array with consecutive rows at
  l1-distance exactly 1;
* the neighbour order is (+e1, -e1, +e2, -e2, ..., +ed, -ed), so direction
  code D maps to axis D >> 1 with sign +1 for even D and -1 for odd D.
  This order is fixed: trajectories must be bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import PhiloxStream

__all__ = [
    "SimConfig",
    "TruncationError",
    "neighbors",
    "norm",
    "norm1",
    "norm_inf",
    "is_lattice_path",
    "is_simple_path",
    "coord_bits",
    "pack_point",
    "unpack_point",
    "simulate_srw_until_exit",
]

# Coordinates stay far below 2**31; the packing guard below is the practical
# overflow check for runaway configurations.
COORD_LIMIT = 2**31 - 1

# Conservative prefactor of the truncation bias certificate: the stabilized
# prefix can only change if the walk re-enters B(0, R_in) after leaving
# B(0, R_out), an event of probability at most ~ (R_in/R_out)^(d-2).
C_BIAS = 2.0


class TruncationError(RuntimeError):
    """A step / workspace cap was hit; the result would be silently short."""


@dataclass(frozen=True)
class SimConfig:
    """Run geometry and reproducibility parameters.

    r_out = rho * r_in; the walk is run to its first exit of B(0, r_out) and
    the loop-erased prefix up to the first exit of B(0, r_in) is certified to
    follow the infinite-trajectory law up to total-variation bias_bound().
    """

    d: int
    seed: int
    replica_count: int
    r_in: float
    rho: float = 8.0
    max_steps: int = 10**9

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if self.rho < 2:
            raise ValueError("radius ratio rho must be >= 2")
        if self.replica_count < 1:
            raise ValueError("replica_count must be >= 1")
        if self.r_in < 1:
            raise ValueError("r_in must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def r_out(self) -> float:
        return self.rho * self.r_in

    def bias_bound(self) -> float:
        """TV bound on the law of the stabilized prefix, C_BIAS * rho^(2-d)."""
        return min(1.0, C_BIAS * self.rho ** (2 - self.d))

    def require_transient(self):
        if self.d < 5:
            raise ValueError(
                "experiment presets require d >= 5 (transient LERW regime); "
                f"got d={self.d}"
            )


def neighbors(p) -> list[tuple[int, ...]]:
    """The 2d nearest neighbours of p in the fixed direction order."""
    p = tuple(int(c) for c in p)
    out = []
    for axis in range(len(p)):
        for sign in (1, -1):
            q = list(p)
            q[axis] += sign
            out.append(tuple(q))
    return out


def norm(p) -> float:
    return float(np.sqrt(sum(int(c) * int(c) for c in p)))


def norm1(p) -> int:
    return int(sum(abs(int(c)) for c in p))


def norm_inf(p) -> int:
    return int(max(abs(int(c)) for c in p)) if len(p) else 0


def is_lattice_path(path: np.ndarray) -> bool:
    """Consecutive rows at l1-distance exactly 1."""
    path = np.asarray(path)
    if path.ndim != 2 or len(path) == 0:
        return False
    if len(path) == 1:
        return True
    return bool((np.abs(np.diff(path, axis=0)).sum(axis=1) == 1).all())

def is_simple_path(path: np.ndarray) -> bool:
    path = np.asarray(path)
    return is_lattice_path(path) and len({tuple(r) for r in path}) == len(path)


def coord_bits(d: int) -> int:
    """Bits per coordinate when packing a point into one int64."""
    return min(12, 63 // d) if d > 0 else 63


def pack_point(p, bits: int | None = None) -> int:
    """Pack signed coordinates into one int64 (offset-binary per coordinate)."""
    d = len(p)
    b = coord_bits(d) if bits is None else bits
    off = 1 << (b - 1)
    acc = 0
    for i, c in enumerate(p):
        c = int(c)
        if not -off < c < off:
            raise OverflowError(f"coordinate {c} exceeds packing range +-{off - 1}")
        acc |= (c + off) << (b * i)
    return acc


def unpack_point(code: int, d: int, bits: int | None = None) -> tuple[int, ...]:
    b = coord_bits(d) if bits is None else bits
    off = 1 << (b - 1)
    mask = (1 << b) - 1
    return tuple(((int(code) >> (b * i)) & mask) - off for i in range(d))


def simulate_srw_until_exit(
    start,
    radius: float,
    stream: PhiloxStream,
    max_steps: int = 10**9,
) -> np.ndarray:
    """Discrete-time SRW from `start` until its first exit of B(0, radius).

    Returns the full path as an (m+1, d) int64 array whose last point is the
    only one with |.| > radius.  Raises TruncationError if max_steps is hit,
    never a silently short path.

    This is the reference python implementation; bulk replica generation goes
    through lerwlab.engine.
    """
    start = tuple(int(c) for c in start)
    d = len(start)
    if norm(start) > radius:
        raise ValueError("start must lie inside the ball")
    if radius < 0.5:
        # every neighbour of an interior start is outside; still well defined
        pass
    r2_limit = radius * radius
    coords = list(start)
    r2 = sum(c * c for c in coords)
    path = [tuple(coords)]
    for _ in range(max_steps):
        direction = stream.randint_below(2 * d)
        axis, sign = direction >> 1, 1 - 2 * (direction & 1)
        r2 += 2 * sign * coords[axis] + 1
        coords[axis] += sign
        if abs(coords[axis]) > COORD_LIMIT:
            raise TruncationError("coordinate overflow guard tripped")
        path.append(tuple(coords))
        if r2 > r2_limit:
            return np.array(path, dtype=np.int64)
    raise TruncationError(f"walk did not exit B(0, {radius}) within {max_steps} steps")
