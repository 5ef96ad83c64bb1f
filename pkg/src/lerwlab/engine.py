"""Replica engine: numba kernels for bulk trajectory generation.

Every replica is a pure function of (seed, replica_id): directions come from
the replica's own counter-based stream, outputs land in per-replica slots of
preallocated arrays, and reductions happen afterwards in fixed order.  Runs
are therefore bit-identical for any worker count (LERWLAB_WORKERS).

The walk + chronological-erasure inner loop keeps the held path in a flat
buffer of packed coordinates and detects revisits with an open-addressing
table of packed (stamp, index) words.  A slot is live exactly when the held
path still shows its site at its index, so erased entries need no cleanup
and the table never stores keys; membership is verified against the path
buffer itself.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numba
import numpy as np
from numba import njit, prange

from .lattice import SimConfig, coord_bits
from .rng import stream_block

__all__ = [
    "FLAG_OK",
    "FLAG_STEP_CAP",
    "FLAG_LEN_CAP",
    "FLAG_HORIZON",
    "worker_count",
    "PanelResult",
    "run_lerw_panel",
    "run_lerw_replica",
    "direct_jump_positions",
    "gambler_1d",
    "gambler_projected",
    "annulus_exits",
    "origin_visits",
    "truncated_lerw_mc",
    "enumerate_le",
]

FLAG_OK = 0
FLAG_STEP_CAP = 1  # bit: max_steps hit before exiting B(0, r_out)
FLAG_LEN_CAP = 2   # bit: erased-path / site-table workspace exhausted
FLAG_HORIZON = 4   # bit: stabilized prefix shorter than a requested horizon

# Purpose salts folded into the stream key so that the walk and any
# auxiliary sampling on the same replica use disjoint streams.
_PURPOSE_WALK = 0
_PURPOSE_JUMP = 1

# Replicas per work unit; fixed so results never depend on the thread count.
# Must stay below 2**8: the site-table packs (stamp, path index) as 8+24 bits.
_BLOCK = 255
_VAL_BITS = 24
_VAL_MASK = np.uint32((1 << _VAL_BITS) - 1)


def worker_count() -> int:
    raw = os.environ.get("LERWLAB_WORKERS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        n = numba.config.NUMBA_DEFAULT_NUM_THREADS
    return max(1, min(n, numba.config.NUMBA_NUM_THREADS))


def _apply_workers():
    numba.set_num_threads(worker_count())


@njit(cache=True, inline="always")
def _hash64(x):
    z = np.uint64(x) * np.uint64(0x9E3779B97F4A7C15)
    z ^= z >> np.uint64(30)
    z *= np.uint64(0xBF58476D1CE4E5B9)
    z ^= z >> np.uint64(27)
    z *= np.uint64(0x94D049BB133111EB)
    z ^= z >> np.uint64(31)
    return z


@njit(cache=True, inline="always")
def _stream_key(replica_id, purpose):
    return np.uint64(replica_id) + (np.uint64(purpose) << np.uint64(56))


@njit(cache=True, inline="always")
def _uniform_at(seed, key1, idx):
    """idx-th uniform of the (seed, key1) stream; one block per draw."""
    w0, _, _, _ = stream_block(np.uint64(seed), key1, np.uint64(idx))
    return (w0 >> np.uint64(11)) * (1.0 / 9007199254740992.0)


# ---------------------------------------------------------------------------
# walk + erasure panel
# ---------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def _panel(
    seed,
    ids,
    d,
    bits,
    rej_thresh,
    two_d,
    r_in2,
    r_out2,
    max_steps,
    len_cap,
    table_bits,
    targets,
    kernel_rows,
    out_stable,
    out_len,
    out_steps,
    out_flags,
    out_tau,
    out_srw,
    out_zl,
    out_zs,
    out_path,
    out_path_len,
):
    n_rep = ids.shape[0]
    n_blocks = (n_rep + _BLOCK - 1) // _BLOCK
    nt = targets.shape[0]
    t_min = np.int64(0)
    t_max = np.int64(-1)
    for k in range(nt):
        if k == 0 or targets[k] < t_min:
            t_min = targets[k]
        if k == 0 or targets[k] > t_max:
            t_max = targets[k]
    n_tvals = kernel_rows.shape[0]
    horizon = kernel_rows.shape[1] - 1  # -1 when no displacement requested
    want_disp = n_tvals > 0
    slots = np.int64(1) << np.int64(table_bits)
    slot_mask = np.uint64(slots - 1)
    occ_cap = (slots * 7) // 10
    origin_code = np.int64(0)
    for i in range(d):
        origin_code |= np.int64(1) << np.int64(bits * i + bits - 1)
    collect_path = out_path.shape[0] > 0

    for blk_id in prange(n_blocks):
        lo = blk_id * _BLOCK
        hi = min(lo + _BLOCK, n_rep)
        table = np.zeros(slots, dtype=np.uint32)
        lerw_pts = np.empty(len_cap, dtype=np.int64)
        lerw_r2 = np.empty(len_cap if want_disp else 1, dtype=np.int64)
        srw_r2 = np.empty(horizon + 1 if want_disp else 1, dtype=np.int64)
        coords = np.zeros(d, dtype=np.int64)
        tau = np.empty(max(nt, 1), dtype=np.int64)

        for pos in range(lo, hi):
            rep = ids[pos]
            stamp = np.uint32(pos - lo + 1) << np.uint32(_VAL_BITS)
            key1 = _stream_key(rep, _PURPOSE_WALK)
            for i in range(d):
                coords[i] = 0
            srw_mask = np.int64(0)
            for k in range(nt):
                tau[k] = -1
            code = origin_code
            r2 = np.int64(0)
            firstexit = np.int64(-1)
            occupied = np.int64(0)
            flag = 0
            steps = np.int64(0)
            # held path starts as [origin]
            lerw_pts[0] = code
            if want_disp:
                lerw_r2[0] = 0
                srw_r2[0] = 0
            lerw_len = np.int64(1)
            h = _hash64(code) & slot_mask
            table[h] = stamp  # value bits 0 = index of origin
            occupied = 1
            if t_min <= code <= t_max:
                for k in range(nt):
                    if targets[k] == code:
                        tau[k] = 0
                        srw_mask |= np.int64(1) << np.int64(k)

            # rng byte supply
            blk_ctr = np.uint64(0)
            w0 = np.uint64(0)
            w1 = np.uint64(0)
            w2 = np.uint64(0)
            w3 = np.uint64(0)
            lane = 4
            word = np.uint64(0)
            nbytes = 0

            while True:
                if steps >= max_steps:
                    flag |= FLAG_STEP_CAP
                    break
                # draw a direction byte with rejection (exactly uniform)
                direction = -1
                while direction < 0:
                    if nbytes == 0:
                        if lane == 4:
                            w0, w1, w2, w3 = stream_block(seed, key1, blk_ctr)
                            blk_ctr += np.uint64(1)
                            lane = 0
                        if lane == 0:
                            word = w0
                        elif lane == 1:
                            word = w1
                        elif lane == 2:
                            word = w2
                        else:
                            word = w3
                        lane += 1
                        nbytes = 8
                    m = np.int64(word & np.uint64(0xFF)) * two_d
                    word >>= np.uint64(8)
                    nbytes -= 1
                    if (m & 255) >= rej_thresh:
                        direction = m >> 8
                axis = direction >> 1
                sign = np.int64(1 - 2 * (direction & 1))
                r2 += 2 * sign * coords[axis] + 1
                coords[axis] += sign
                code += sign << np.int64(bits * axis)
                steps += 1
                if want_disp and steps <= horizon:
                    srw_r2[steps] = r2

                # Probe the site table.  Only slots carrying this replica's
                # stamp belong to its chain; anything else (zero or a stale
                # slot of an earlier replica in the block) is claimable.  A
                # stamped slot is live exactly when the held path confirms
                # its site at its index.
                h = _hash64(code) & slot_mask
                revisit = np.int64(-1)
                while True:
                    s = table[h]
                    if (s & ~_VAL_MASK) != stamp:
                        break
                    v = np.int64(s & _VAL_MASK)
                    if v < lerw_len and lerw_pts[v] == code:
                        revisit = v
                        break
                    h = (h + np.uint64(1)) & slot_mask
                if revisit >= 0:
                    # chop the held path back to the revisited site
                    lerw_len = revisit + 1
                    for k in range(nt):
                        if tau[k] > revisit:
                            tau[k] = -1
                    if firstexit > revisit:
                        firstexit = -1
                else:
                    # append; h points at the first empty slot of the chain
                    if occupied >= occ_cap or lerw_len >= len_cap:
                        flag |= FLAG_LEN_CAP
                        break
                    table[h] = stamp | np.uint32(lerw_len)
                    occupied += 1
                    if t_min <= code <= t_max:
                        for k in range(nt):
                            if targets[k] == code:
                                srw_mask |= np.int64(1) << np.int64(k)
                                if tau[k] < 0:
                                    tau[k] = lerw_len
                    if want_disp:
                        lerw_r2[lerw_len] = r2
                    if firstexit < 0 and r2 > r_in2:
                        firstexit = lerw_len
                    lerw_pts[lerw_len] = code
                    lerw_len += 1
                if r2 > r_out2:
                    break

            idx = pos
            out_steps[idx] = steps
            out_len[idx] = np.int32(lerw_len)
            out_stable[idx] = np.int32(firstexit)
            for k in range(nt):
                out_tau[idx, k] = np.int32(tau[k])
                out_srw[idx, k] = np.uint8((srw_mask >> np.int64(k)) & np.int64(1))
            if want_disp and flag == 0:
                if firstexit < horizon or steps < horizon:
                    flag |= FLAG_HORIZON
                else:
                    for ti in range(n_tvals):
                        accl = 0.0
                        accs = 0.0
                        for m in range(horizon + 1):
                            accl += kernel_rows[ti, m] * math.sqrt(lerw_r2[m])
                            accs += kernel_rows[ti, m] * math.sqrt(srw_r2[m])
                        out_zl[idx, ti] = accl
                        out_zs[idx, ti] = accs
            out_flags[idx] = np.uint8(flag)
            if collect_path and flag == 0:
                for m in range(lerw_len):
                    out_path[m] = lerw_pts[m]
                out_path_len[0] = lerw_len


@dataclass
class PanelResult:
    """Per-replica outputs of a walk/erasure panel (index = replica_id - r0)."""

    stable_len: np.ndarray  # int32, first-exit index of B(0, r_in), -1 if capped
    lerw_len: np.ndarray    # int32, length+1 of the erased truncated path
    steps: np.ndarray       # int64, raw walk steps
    flags: np.ndarray       # uint8 bitmask (FLAG_*)
    tau: np.ndarray         # int32 (R, n_targets), -1 = miss
    srw_hit: np.ndarray     # uint8 (R, n_targets), raw-trace membership
    z_lerw: np.ndarray | None = None  # float64 (R, T) kernel-weighted |L_m|
    z_srw: np.ndarray | None = None   # float64 (R, T) kernel-weighted |S_m|
    path_codes: np.ndarray | None = None  # packed erased path (single-replica runs)


def _len_cap(config: SimConfig) -> int:
    cap = max(1 << 14, int(9.0 * config.r_out * config.r_out))
    if cap >= 1 << _VAL_BITS:
        raise ValueError(
            f"r_out={config.r_out} needs a path workspace beyond the engine's "
            f"{1 << _VAL_BITS} entry limit"
        )
    return cap


def _table_bits(len_cap: int) -> int:
    return max(14, int(math.ceil(math.log2(1.02 * len_cap))))


def run_lerw_panel(
    config: SimConfig,
    r0: int,
    r1: int,
    targets=(),
    kernel_rows: np.ndarray | None = None,
) -> PanelResult:
    """Run replicas [r0, r1) of the config's stream family.

    targets: lattice points whose erased-path hitting index tau and raw-trace
    membership are recorded per replica (at most 63).
    kernel_rows: optional (T, H+1) matrix of half-line kernel rows; when
    given, every replica also reports sum_m rows[t, m] * |L_m| and the same
    for the raw walk, for replicas whose stabilized prefix covers H.

    Two-pass execution: everything first runs against a small cache-friendly
    site table; the rare replicas whose walks outgrow it are deterministic in
    (seed, replica_id) and are replayed against the full-size table, so the
    merged result is exactly the single-big-table answer at a fraction of the
    memory traffic.
    """
    ids = np.arange(r0, r1, dtype=np.int64)
    res = _run_ids(config, ids, targets, kernel_rows, small_table=True)
    redo = np.flatnonzero(res.flags & FLAG_LEN_CAP)
    if len(redo):
        full = _run_ids(config, ids[redo], targets, kernel_rows, small_table=False)
        for name in ("stable_len", "lerw_len", "steps", "flags", "tau", "srw_hit"):
            getattr(res, name)[redo] = getattr(full, name)
        if res.z_lerw is not None:
            res.z_lerw[redo] = full.z_lerw
            res.z_srw[redo] = full.z_srw
    return res


_SMALL_TABLE_BITS = 20


def _run_ids(
    config: SimConfig,
    ids: np.ndarray,
    targets,
    kernel_rows,
    small_table: bool,
    collect_path: bool = False,
):
    from .lattice import pack_point

    bits = coord_bits(config.d)
    guard = 1 << (bits - 1)
    if config.r_out + 2 >= guard:
        raise ValueError(
            f"r_out={config.r_out} too large for {bits}-bit packed coordinates"
        )
    if len(targets) > 63:
        raise ValueError("at most 63 targets per panel")
    packed = np.array(
        [pack_point(t, bits) for t in targets], dtype=np.int64
    ) if len(targets) else np.empty(0, dtype=np.int64)
    n = len(ids)
    rows = (
        np.ascontiguousarray(kernel_rows, dtype=np.float64)
        if kernel_rows is not None
        else np.empty((0, 0), dtype=np.float64)
    )
    out_stable = np.empty(n, dtype=np.int32)
    out_len = np.empty(n, dtype=np.int32)
    out_steps = np.empty(n, dtype=np.int64)
    out_flags = np.empty(n, dtype=np.uint8)
    out_tau = np.empty((n, len(packed)), dtype=np.int32)
    out_srw = np.empty((n, len(packed)), dtype=np.uint8)
    out_zl = np.zeros((n, rows.shape[0]), dtype=np.float64)
    out_zs = np.zeros((n, rows.shape[0]), dtype=np.float64)
    len_cap = _len_cap(config)
    table_bits = _table_bits(len_cap)
    if small_table:
        table_bits = min(table_bits, _SMALL_TABLE_BITS)
    out_path = (
        np.empty(len_cap, dtype=np.int64) if collect_path
        else np.empty(0, dtype=np.int64)
    )
    out_path_len = np.zeros(1, dtype=np.int64)
    _apply_workers()
    _panel(
        np.uint64(config.seed),
        ids,
        config.d,
        bits,
        256 % (2 * config.d),
        2 * config.d,
        np.int64(math.floor(float(config.r_in) ** 2)),
        np.int64(math.floor(float(config.r_out) ** 2)),
        config.max_steps,
        len_cap,
        table_bits,
        packed,
        rows,
        out_stable,
        out_len,
        out_steps,
        out_flags,
        out_tau,
        out_srw,
        out_zl,
        out_zs,
        out_path,
        out_path_len,
    )
    res = PanelResult(
        stable_len=out_stable,
        lerw_len=out_len,
        steps=out_steps,
        flags=out_flags,
        tau=out_tau,
        srw_hit=out_srw,
        z_lerw=out_zl if rows.shape[0] else None,
        z_srw=out_zs if rows.shape[0] else None,
    )
    if collect_path:
        res.path_codes = out_path[: int(out_path_len[0])]
    return res


@dataclass
class ReplicaResult:
    path: np.ndarray
    stable_len: int
    steps: int
    flag: int


def run_lerw_replica(config: SimConfig, replica_id: int) -> ReplicaResult:
    """Full erased path of one replica (unpacked coordinates)."""
    from .lattice import unpack_point

    ids = np.array([replica_id], dtype=np.int64)
    res = _run_ids(config, ids, (), None, small_table=True, collect_path=True)
    if res.flags[0] & FLAG_LEN_CAP:
        res = _run_ids(config, ids, (), None, small_table=False, collect_path=True)
    bits = coord_bits(config.d)
    codes = res.path_codes
    pts = np.empty((len(codes), config.d), dtype=np.int64)
    for i in range(len(codes)):
        pts[i] = unpack_point(int(codes[i]), config.d, bits)
    return ReplicaResult(
        path=pts,
        stable_len=int(res.stable_len[0]),
        steps=int(res.steps[0]),
        flag=int(res.flags[0]),
    )


# ---------------------------------------------------------------------------
# Poisson jump draws for the direct annealed estimator
# ---------------------------------------------------------------------------


@njit(cache=True)
def _poisson_at(seed, key1, idx0, lam):
    """Exact Poisson(lam) variate from uniforms idx0, idx0+1, ... of a stream.

    Knuth's product method below lam=10, Hormann's PTRS transformed
    rejection above.  Returns (value, uniforms_consumed).
    """
    if lam <= 0.0:
        return 0, 0
    used = 0
    if lam < 10.0:
        ell = math.exp(-lam)
        k = 0
        p = 1.0
        while True:
            p *= _uniform_at(seed, key1, idx0 + used)
            used += 1
            if p <= ell:
                return k, used
            k += 1
    b = 0.931 + 2.53 * math.sqrt(lam)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        u = _uniform_at(seed, key1, idx0 + used) - 0.5
        v = _uniform_at(seed, key1, idx0 + used + 1)
        used += 2
        us = 0.5 - abs(u)
        k = int(math.floor((2.0 * a / us + b) * u + lam + 0.43))
        if us >= 0.07 and v <= v_r:
            return k, used
        if k < 0 or (us < 0.013 and v > us):
            continue
        if math.log(v * inv_alpha / (a / (us * us) + b)) <= (
            -lam + k * math.log(lam) - math.lgamma(k + 1.0)
        ):
            return k, used


@njit(cache=True, parallel=True)
def _jump_panel(seed, r0, r1, t_values, out_m):
    n_rep = r1 - r0
    n_blocks = (n_rep + _BLOCK - 1) // _BLOCK
    for blk_id in prange(n_blocks):
        lo = r0 + blk_id * _BLOCK
        hi = min(lo + _BLOCK, r1)
        for rep in range(lo, hi):
            key1 = _stream_key(rep, _PURPOSE_JUMP)
            for ti in range(t_values.shape[0]):
                idx0 = np.int64(ti) << np.int64(32)
                half = t_values[ti] / 2.0
                n_plus, used = _poisson_at(seed, key1, idx0, half)
                n_minus, _ = _poisson_at(seed, key1, idx0 + used, half)
                out_m[rep - r0, ti] = np.int32(abs(n_plus - n_minus))


def direct_jump_positions(config: SimConfig, r0: int, r1: int, t_values) -> np.ndarray:
    """Position of the half-line walk at each time t, one draw per replica.

    Uses the identity that the unit-rate walk on Z (difference of two
    Poisson(t/2) clocks) reflected at the origin is, as a process, the
    half-line walk, so |N+ - N-| has exactly the position law at time t.
    Draws come from the replica's jump stream, disjoint from its walk stream.
    """
    t_arr = np.asarray(t_values, dtype=np.float64)
    out = np.empty((r1 - r0, len(t_arr)), dtype=np.int32)
    _apply_workers()
    _jump_panel(np.uint64(config.seed), r0, r1, t_arr, out)
    return out


# ---------------------------------------------------------------------------
# classical SRW kernels
# ---------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def _gambler_1d(seed, start, n, reps):
    wins = np.int64(0)
    for rep in prange(reps):
        key1 = _stream_key(rep, _PURPOSE_WALK)
        pos = start
        blk = np.uint64(0)
        w = np.uint64(0)
        nbits = 0
        while 0 < pos < n:
            if nbits == 0:
                w, _, _, _ = stream_block(seed, key1, blk)
                blk += np.uint64(1)
                nbits = 64
            pos += 1 if (w & np.uint64(1)) else -1
            w >>= np.uint64(1)
            nbits -= 1
        if pos >= n:
            wins += 1
    return wins


def gambler_1d(seed: int, start: int, n: int, reps: int) -> int:
    """Count of 1-D SRW replicas absorbed at n before 0, from `start`."""
    _apply_workers()
    return int(_gambler_1d(np.uint64(seed), start, n, reps))


@njit(cache=True, parallel=True)
def _gambler_proj(seed, d, rej_thresh, two_d, start, n, reps):
    wins = np.int64(0)
    for rep in prange(reps):
        key1 = _stream_key(rep, _PURPOSE_WALK)
        pos = start
        blk = np.uint64(0)
        w0 = np.uint64(0)
        w1 = np.uint64(0)
        w2 = np.uint64(0)
        w3 = np.uint64(0)
        lane = 4
        word = np.uint64(0)
        nbytes = 0
        while 0 < pos < n:
            direction = -1
            while direction < 0:
                if nbytes == 0:
                    if lane == 4:
                        w0, w1, w2, w3 = stream_block(seed, key1, blk)
                        blk += np.uint64(1)
                        lane = 0
                    if lane == 0:
                        word = w0
                    elif lane == 1:
                        word = w1
                    elif lane == 2:
                        word = w2
                    else:
                        word = w3
                    lane += 1
                    nbytes = 8
                m = np.int64(word & np.uint64(0xFF)) * two_d
                word >>= np.uint64(8)
                nbytes -= 1
                if (m & 255) >= rej_thresh:
                    direction = m >> 8
            if direction == 0:
                pos += 1
            elif direction == 1:
                pos -= 1
        if pos >= n:
            wins += 1
    return wins


def gambler_projected(seed: int, d: int, start: int, n: int, reps: int) -> int:
    """d-dim SRW, first coordinate absorbed at {<=0, >=n}: count of >=n exits."""
    _apply_workers()
    return int(
        _gambler_proj(np.uint64(seed), d, 256 % (2 * d), 2 * d, start, n, reps)
    )


@njit(cache=True, parallel=True)
def _annulus(seed, d, rej_thresh, two_d, start_coords, m2, n2, reps, out_counts):
    # out_counts: [exited_inner, exited_at_zero]
    inner = np.int64(0)
    zero = np.int64(0)
    for rep in prange(reps):
        key1 = _stream_key(rep, _PURPOSE_WALK)
        coords = start_coords.copy()
        r2 = np.int64(0)
        for i in range(d):
            r2 += coords[i] * coords[i]
        blk = np.uint64(0)
        w0 = np.uint64(0)
        w1 = np.uint64(0)
        w2 = np.uint64(0)
        w3 = np.uint64(0)
        lane = 4
        word = np.uint64(0)
        nbytes = 0
        while m2 <= r2 <= n2:
            direction = -1
            while direction < 0:
                if nbytes == 0:
                    if lane == 4:
                        w0, w1, w2, w3 = stream_block(seed, key1, blk)
                        blk += np.uint64(1)
                        lane = 0
                    if lane == 0:
                        word = w0
                    elif lane == 1:
                        word = w1
                    elif lane == 2:
                        word = w2
                    else:
                        word = w3
                    lane += 1
                    nbytes = 8
                m = np.int64(word & np.uint64(0xFF)) * two_d
                word >>= np.uint64(8)
                nbytes -= 1
                if (m & 255) >= rej_thresh:
                    direction = m >> 8
            axis = direction >> 1
            sign = np.int64(1 - 2 * (direction & 1))
            r2 += 2 * sign * coords[axis] + 1
            coords[axis] += sign
        if r2 < m2:
            inner += 1
            if r2 == 0:
                zero += 1
    out_counts[0] = inner
    out_counts[1] = zero


def annulus_exits(seed: int, d: int, start, m: float, n: float, reps: int):
    """(inner_exits, exits_at_origin) for the SRW leaving {m <= |y| <= n}."""
    start_arr = np.array([int(c) for c in start], dtype=np.int64)
    out = np.zeros(2, dtype=np.int64)
    _apply_workers()
    _annulus(
        np.uint64(seed),
        d,
        256 % (2 * d),
        2 * d,
        start_arr,
        np.int64(math.floor(float(m) ** 2)),
        np.int64(math.floor(float(n) ** 2)),
        reps,
        out,
    )
    return int(out[0]), int(out[1])


@njit(cache=True, parallel=True)
def _green0(seed, d, rej_thresh, two_d, horizon, reps, out_visits):
    for rep in prange(reps):
        key1 = _stream_key(rep, _PURPOSE_WALK)
        coords = np.zeros(d, dtype=np.int64)
        r2 = np.int64(0)
        visits = np.int32(1)  # time 0 counts
        blk = np.uint64(0)
        w0 = np.uint64(0)
        w1 = np.uint64(0)
        w2 = np.uint64(0)
        w3 = np.uint64(0)
        lane = 4
        word = np.uint64(0)
        nbytes = 0
        for _ in range(horizon):
            direction = -1
            while direction < 0:
                if nbytes == 0:
                    if lane == 4:
                        w0, w1, w2, w3 = stream_block(seed, key1, blk)
                        blk += np.uint64(1)
                        lane = 0
                    if lane == 0:
                        word = w0
                    elif lane == 1:
                        word = w1
                    elif lane == 2:
                        word = w2
                    else:
                        word = w3
                    lane += 1
                    nbytes = 8
                m = np.int64(word & np.uint64(0xFF)) * two_d
                word >>= np.uint64(8)
                nbytes -= 1
                if (m & 255) >= rej_thresh:
                    direction = m >> 8
            axis = direction >> 1
            sign = np.int64(1 - 2 * (direction & 1))
            r2 += 2 * sign * coords[axis] + 1
            coords[axis] += sign
            if r2 == 0:
                visits += 1
        out_visits[rep] = visits


def origin_visits(seed: int, d: int, horizon: int, reps: int) -> np.ndarray:
    """Visit counts to the origin within `horizon` steps, one per replica."""
    out = np.empty(reps, dtype=np.int32)
    _apply_workers()
    _green0(np.uint64(seed), d, 256 % (2 * d), 2 * d, horizon, reps, out)
    return out


# ---------------------------------------------------------------------------
# fixed-length walks: enumeration oracle + matched Monte Carlo
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _le_fixed(pos_codes, n_pts, le_buf):
    """Batch loop-erasure of a short path of packed codes; returns length."""
    m = n_pts - 1
    j = 0
    k = 0
    while True:
        # last visit time of pos_codes[k]
        sigma = k
        for t in range(k + 1, n_pts):
            if pos_codes[t] == pos_codes[k]:
                sigma = t
        le_buf[j] = pos_codes[sigma]
        j += 1
        if sigma == m:
            return j
        k = sigma + 1


@njit(cache=True)
def _enum_kernel(d, bits, n_steps, tab_keys, tab_vals, table_bits,
                 len_counts, tau_counts, target, win_lo, win_hi):
    two_d = 2 * d
    total = np.int64(1)
    for _ in range(n_steps):
        total *= two_d
    origin_code = np.int64(0)
    for i in range(d):
        origin_code |= np.int64(1) << np.int64(bits * i + bits - 1)
    slot_mask = np.uint64((np.int64(1) << np.int64(table_bits)) - 1)
    digits = np.zeros(n_steps, dtype=np.int64)
    codes = np.empty(n_steps + 1, dtype=np.int64)
    le_buf = np.empty(n_steps + 1, dtype=np.int64)
    codes[0] = origin_code
    for _ in range(total):
        for s in range(n_steps):
            direction = digits[s]
            axis = direction >> 1
            sign = np.int64(1 - 2 * (direction & 1))
            codes[s + 1] = codes[s] + (sign << np.int64(bits * axis))
        le_len = _le_fixed(codes, n_steps + 1, le_buf)
        # tallies (integer exact)
        len_counts[le_len - 1] += 1
        endpoint = le_buf[le_len - 1]
        h = _hash64(endpoint) & slot_mask
        while True:
            if tab_vals[h] == 0:
                tab_keys[h] = endpoint
                tab_vals[h] = 1
                break
            if tab_keys[h] == endpoint:
                tab_vals[h] += 1
                break
            h = (h + np.uint64(1)) & slot_mask
        t = -1
        for i in range(le_len):
            if le_buf[i] == target:
                t = i
                break
        if win_lo <= t <= win_hi:
            tau_counts[0] += 1
        # odometer increment
        s = n_steps - 1
        while s >= 0:
            digits[s] += 1
            if digits[s] < two_d:
                break
            digits[s] = 0
            s -= 1


class ResourceGateError(RuntimeError):
    """An exhaustive computation would exceed its declared resource budget."""


def enumerate_le(d: int, n_steps: int, target, win_lo: int, win_hi: int):
    """Exhaustive tallies over all (2d)^n_steps walks of the erasure law.

    Returns (endpoint_codes, endpoint_counts, le_len_counts, tau_window_count,
    total).  Integer-exact: counts always sum to (2d)^n_steps.
    """
    from .lattice import pack_point

    total = (2 * d) ** n_steps
    if total > 10**8:
        raise ResourceGateError(
            f"enumeration of {total} walks exceeds the 1e8 resource gate "
            f"(need (2d)^N <= 1e8; got d={d}, N={n_steps})"
        )
    bits = coord_bits(d)
    # endpoints live in the l1-ball of radius n_steps
    n_endpoints = min(total, (2 * n_steps + 1) ** d)
    table_bits = max(8, int(math.ceil(math.log2(4 * n_endpoints))))
    keys = np.zeros(1 << table_bits, dtype=np.int64)
    vals = np.zeros(1 << table_bits, dtype=np.int64)
    len_counts = np.zeros(n_steps + 1, dtype=np.int64)
    tau_counts = np.zeros(1, dtype=np.int64)
    _enum_kernel(
        d,
        bits,
        n_steps,
        keys,
        vals,
        table_bits,
        len_counts,
        tau_counts,
        pack_point(target, bits),
        win_lo,
        win_hi,
    )
    live = vals > 0
    return keys[live], vals[live], len_counts, int(tau_counts[0]), total


def truncated_lerw_mc(seed: int, d: int, n_steps: int, r0: int, r1: int, target):
    """Monte Carlo of the same truncated functionals as enumerate_le.

    Returns per-replica (endpoint_code, le_length, tau_of_target) so any of
    the three laws can be tallied downstream on the same draws.
    """
    from .lattice import pack_point

    bits = coord_bits(d)
    n = r1 - r0
    out_endpoint = np.empty(n, dtype=np.int64)
    out_le_len = np.empty(n, dtype=np.int32)
    out_tau = np.empty(n, dtype=np.int32)
    _apply_workers()
    _mc_fixed_tau(
        np.uint64(seed),
        d,
        bits,
        256 % (2 * d),
        2 * d,
        n_steps,
        r0,
        r1,
        out_endpoint,
        out_le_len,
        out_tau,
        pack_point(target, bits),
    )
    return out_endpoint, out_le_len, out_tau


@njit(cache=True, parallel=True)
def _mc_fixed_tau(seed, d, bits, rej_thresh, two_d, n_steps, r0, r1,
                  out_endpoint, out_le_len, out_tau, target):
    origin_code = np.int64(0)
    for i in range(d):
        origin_code |= np.int64(1) << np.int64(bits * i + bits - 1)
    n_rep = r1 - r0
    n_blocks = (n_rep + _BLOCK - 1) // _BLOCK
    for blk_id in prange(n_blocks):
        lo = r0 + blk_id * _BLOCK
        hi = min(lo + _BLOCK, r1)
        codes = np.empty(n_steps + 1, dtype=np.int64)
        le_buf = np.empty(n_steps + 1, dtype=np.int64)
        for rep in range(lo, hi):
            key1 = _stream_key(rep, _PURPOSE_WALK)
            codes[0] = origin_code
            blk = np.uint64(0)
            w0 = np.uint64(0)
            w1 = np.uint64(0)
            w2 = np.uint64(0)
            w3 = np.uint64(0)
            lane = 4
            word = np.uint64(0)
            nbytes = 0
            for s in range(n_steps):
                direction = -1
                while direction < 0:
                    if nbytes == 0:
                        if lane == 4:
                            w0, w1, w2, w3 = stream_block(seed, key1, blk)
                            blk += np.uint64(1)
                            lane = 0
                        if lane == 0:
                            word = w0
                        elif lane == 1:
                            word = w1
                        elif lane == 2:
                            word = w2
                        else:
                            word = w3
                        lane += 1
                        nbytes = 8
                    m = np.int64(word & np.uint64(0xFF)) * two_d
                    word >>= np.uint64(8)
                    nbytes -= 1
                    if (m & 255) >= rej_thresh:
                        direction = m >> 8
                axis = direction >> 1
                sign = np.int64(1 - 2 * (direction & 1))
                codes[s + 1] = codes[s] + (sign << np.int64(bits * axis))
            le_len = _le_fixed(codes, n_steps + 1, le_buf)
            idx = rep - r0
            out_endpoint[idx] = le_buf[le_len - 1]
            out_le_len[idx] = np.int32(le_len - 1)
            t = -1
            for i in range(le_len):
                if le_buf[i] == target:
                    t = i
                    break
            out_tau[idx] = np.int32(t)
