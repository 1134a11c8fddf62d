"""Compiled kernels for the hot loops: DP layer sweeps, season simulation,
the two-urn coupling, and batched chains.

Seeding contract: every randomized kernel derives one splitmix64 state per
replica from (seed, stream_id, replica_index).  Replicas therefore reproduce
exactly regardless of thread count or scheduling, and distinct indices give
independent streams.  Bounded integers use the classic rejection method
(accept u >= 2^64 mod n, return u mod n), which is bias-free.
"""

from __future__ import annotations

import os

# Prefer a threading layer that never warns; TBB builds older than 2021.6
# make numba complain at import.  A user's explicit choice still wins.
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")

import numpy as np
from numba import njit, prange

U64 = np.uint64
MASK64 = 0xFFFFFFFFFFFFFFFF


def as_u64(value) -> np.uint64:
    """Coerce a Python int to a numpy uint64 scalar for kernel arguments.

    Kernel entry points must receive states and seeds as numpy uint64: a
    plain Python int types as int64 (overflowing above 2^63), and numba
    promotes mixed int64/uint64 arithmetic to float64, which would corrupt
    the bit mixing silently.
    """
    return np.uint64(int(value) & MASK64)


_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX_A = U64(0xBF58476D1CE4E5B9)
_MIX_B = U64(0x94D049BB133111EB)
_DOMAIN_SEASON = U64(0x53454153)
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * _MIX_A
    z = (z ^ (z >> U64(27))) * _MIX_B
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def _next_u64(state):
    state = state + _GOLDEN
    return _mix64(state), state


@njit(cache=True)
def _replica_state(seed, stream_id, replica):
    s = _mix64(U64(seed) + _GOLDEN)
    s = _mix64(s ^ _mix64(U64(stream_id) + _DOMAIN_SEASON))
    s = _mix64(s ^ _mix64(U64(replica) + _GOLDEN))
    return s


@njit(cache=True, inline="always")
def _next_below(state, n):
    # Uniform integer in [0, n).  Accept u >= 2^64 mod n, return u mod n.
    n64 = U64(n)
    threshold = (U64(0) - n64) % n64
    while True:
        u, state = _next_u64(state)
        if u >= threshold:
            return u % n64, state


@njit(cache=True, inline="always")
def _next_unit(state):
    # Uniform double in [0, 1) with 53 random bits.
    u, state = _next_u64(state)
    return (u >> U64(11)) * _INV_2_53, state


# ---------------------------------------------------------------------------
# DP layer advance
# ---------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def dp_advance_layer(prev, out, tags):
    """Advance one draw layer of the avoidance DP.

    prev/out are (max_w + 2, max_b + 1) slabs whose row 0 is the guard row
    for w = -1; real white counts start at row 1.  Each cell mixes the
    white-drawn term and the black-drawn term, dividing after the multiply.
    """
    n_rows, n_cols = prev.shape
    for wi in prange(1, n_rows):
        w = wi - 1
        for bi in range(n_cols):
            denom = w + bi + tags
            out[wi, bi] = (w * prev[wi - 1, bi]) / denom + (bi * prev[wi, bi]) / denom
    for bi in range(n_cols):
        out[0, bi] = 0.0


# ---------------------------------------------------------------------------
# Season simulation
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _season_core(w, b, f, state):
    """Run one season: f draws from a (w, b) urn, whites removed when drawn,
    blacks returned, marks tracked.

    Tracks one designated white (initially slot 0) and one designated black
    by position through the swap bookkeeping, so per-ball reproduction
    indicators come out of the same pass.  Draws from an empty urn do
    nothing.  Returns (X, Y, designated white marked, designated black
    marked, advanced rng state).
    """
    state = U64(state)
    wr = w
    m = 0  # marked blacks occupy black slots [0, m)
    dw = 0 if w > 0 else -1
    db = 0 if b > 0 else -1
    fw = False
    fb = False
    for _ in range(f):
        size = wr + b
        if size == 0:
            break
        u, state = _next_below(state, size)
        i = np.int64(u)
        if i < wr:
            # white drawn: mark, swap-remove its slot
            if i == dw:
                fw = True
                dw = -2
            last = wr - 1
            if dw == last:
                dw = i
            wr = last
        else:
            j = i - wr
            if j >= m:
                # unmarked black drawn: mark it, swap it into slot m
                if j == db:
                    fb = True
                if db == m and db != j:
                    db = j
                elif db == j:
                    db = m
                m += 1
            # marked black drawn again: nothing changes
    return w - wr, m, fw, fb, state


@njit(cache=True, parallel=True)
def season_batch(w, b, f, seed, stream_id, reps, xs, ys, fws, fbs):
    """Independent seasons at fixed (w, b, f); one stream per replica."""
    for r in prange(reps):
        st = _replica_state(seed, stream_id, r)
        x, y, fw, fb, st = _season_core(w, b, f, st)
        xs[r] = x
        ys[r] = y
        fws[r] = U64(1) if fw else U64(0)
        fbs[r] = U64(1) if fb else U64(0)


@njit(cache=True, parallel=True)
def season_batch_inplace(ws, n, f, states, xs, ys):
    """Seasons at per-replica white counts ws[r] (black count n - ws[r]),
    advancing the persistent per-replica states in place."""
    for r in prange(ws.shape[0]):
        x, y, fw, fb, st = _season_core(ws[r], n - ws[r], f, states[r])
        states[r] = st
        xs[r] = x
        ys[r] = y


# ---------------------------------------------------------------------------
# Two-urn coupling
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _coupled_core(w, b, f, state, present1, present2):
    """One coupled run of the two urns sharing a uniform number stream.

    Balls are numbered 0..w+b-1.  Urn 1: 0..w-1 white, w..w+b-2 black, and
    w+b-1 is the tagged ball; urn 2 is identical except ball w-1 is black.
    Each step both active urns choose a ball: numbers absent from both urns
    are skipped, a number present in only one urn serves that urn while the
    other keeps scanning the shared stream.  A chosen white leaves its urn; a
    chosen tagged ball stops its urn.  Returns (tag drawn in urn 1, tag drawn
    in urn 2, advanced rng state).
    """
    state = U64(state)
    total = w + b  # shared number range; only whites can ever be absent
    tag = total - 1
    for k in range(w):
        present1[k] = True
        present2[k] = True
    d1 = 0
    d2 = 0
    red1 = False
    red2 = False
    while True:
        active1 = (not red1) and d1 < f
        active2 = (not red2) and d2 < f
        if not (active1 or active2):
            break
        if active1 and active2:
            while True:
                u, state = _next_below(state, total)
                k = np.int64(u)
                in1 = (k >= w) or present1[k]
                in2 = (k >= w - 1) or present2[k]
                if in1 or in2:
                    break
            if in1 and in2:
                k1 = k
                k2 = k
            elif in1:
                # choose k in urn 1; keep scanning the shared stream for urn 2
                k1 = k
                while True:
                    u, state = _next_below(state, total)
                    k2 = np.int64(u)
                    if (k2 >= w - 1) or present2[k2]:
                        break
            else:
                k2 = k
                while True:
                    u, state = _next_below(state, total)
                    k1 = np.int64(u)
                    if (k1 >= w) or present1[k1]:
                        break
            if k1 == tag:
                red1 = True
            elif k1 < w:
                present1[k1] = False
            if k2 == tag:
                red2 = True
            elif k2 < w - 1:
                present2[k2] = False
            d1 += 1
            d2 += 1
        elif active1:
            while True:
                u, state = _next_below(state, total)
                k = np.int64(u)
                if (k >= w) or present1[k]:
                    break
            if k == tag:
                red1 = True
            elif k < w:
                present1[k] = False
            d1 += 1
        else:
            while True:
                u, state = _next_below(state, total)
                k = np.int64(u)
                if (k >= w - 1) or present2[k]:
                    break
            if k == tag:
                red2 = True
            elif k < w - 1:
                present2[k] = False
            d2 += 1
    return red1, red2, state


@njit(cache=True, parallel=True)
def coupled_batch(w, b, f, seed, stream_id, reps, red1_out, red2_out):
    """Independent coupled runs; one stream per replica."""
    for r in prange(reps):
        st = _replica_state(seed, stream_id, r)
        present1 = np.empty(w, dtype=np.bool_)
        present2 = np.empty(w, dtype=np.bool_)
        red1, red2, st = _coupled_core(w, b, f, st, present1, present2)
        red1_out[r] = U64(1) if red1 else U64(0)
        red2_out[r] = U64(1) if red2 else U64(0)


# ---------------------------------------------------------------------------
# Chain helpers
# ---------------------------------------------------------------------------


@njit(cache=True)
def seed_states(seed, stream_id, reps, out):
    """Fill out[r] with the replica-r stream state."""
    for r in range(reps):
        out[r] = _replica_state(seed, stream_id, r)


@njit(cache=True)
def binomial_from_state(n, p, state):
    """Exact Binomial(n, p) as a sum of n Bernoulli draws."""
    state = U64(state)
    k = 0
    for _ in range(n):
        unit, state = _next_unit(state)
        if unit < p:
            k += 1
    return k, state


@njit(cache=True)
def chain_traj(n, f, beta_eff, gens, w0, seed, stream_id, replica, ws):
    """One trajectory of white counts, written into ws[0..gens].

    Draw-for-draw identical to the replica-th lane of chain_batch.  Returns
    True on the impossible no-ball-marked season, which callers escalate.
    """
    st = _replica_state(seed, stream_id, replica)
    wcur = w0
    ws[0] = wcur
    for g in range(gens):
        if wcur != 0 and wcur != n:
            x, y, fw, fb, st = _season_core(wcur, n - wcur, f, st)
            if x + y == 0:
                return True
            zb = ((1.0 + beta_eff) * x) / ((1.0 + beta_eff) * x + y)
            wcur, st = binomial_from_state(n, zb, st)
        ws[g + 1] = wcur
    return False


@njit(cache=True, parallel=True)
def chain_batch(n, f, beta_eff, gens, w0, seed, stream_id, reps, finals, errs):
    """Full multi-generation chains, one per replica, entirely in-kernel.

    Each generation runs a season at the current white count, forms the
    selection-weighted egg ratio, and resamples the next white count as a
    sum of n Bernoulli draws (an exact Binomial(n, z) sample).  Boundary
    counts 0 and n are absorbing through the dynamics themselves.  errs[r]
    is set if a season ever marks no ball at all, which the dynamics make
    impossible for f >= 1; callers treat it as a hard failure.
    """
    for r in prange(reps):
        st = _replica_state(seed, stream_id, r)
        wcur = w0
        err = False
        for _ in range(gens):
            if wcur == 0 or wcur == n:
                break
            x, y, fw, fb, st = _season_core(wcur, n - wcur, f, st)
            if x + y == 0:
                err = True
                break
            zb = ((1.0 + beta_eff) * x) / ((1.0 + beta_eff) * x + y)
            wcur, st = binomial_from_state(n, zb, st)
        finals[r] = wcur
        errs[r] = U64(1) if err else U64(0)


def warmup() -> None:
    """Trigger compilation of every kernel at trivial sizes."""
    prev = np.ones((3, 3))
    out = np.empty_like(prev)
    dp_advance_layer(prev, out, 1)
    one = np.zeros(1, dtype=np.int64)
    flag = np.zeros(1, dtype=np.uint64)
    season_batch(2, 2, 2, 1, 0, 1, one.copy(), one.copy(), flag.copy(), flag.copy())
    states = np.zeros(1, dtype=np.uint64)
    seed_states(1, 0, 1, states)
    season_batch_inplace(np.ones(1, dtype=np.int64), 2, 1, states, one.copy(), one.copy())
    coupled_batch(1, 1, 1, 1, 0, 1, flag.copy(), flag.copy())
    chain_batch(2, 1, 0.0, 1, 1, 1, 0, 1, one.copy(), flag.copy())
    chain_traj(2, 1, 0.0, 1, 1, 1, 0, 0, np.zeros(2, dtype=np.int64))
    binomial_from_state(2, 0.5, U64(1))
