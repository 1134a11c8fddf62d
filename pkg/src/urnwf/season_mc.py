"""Seeded Monte-Carlo simulation of one season, the two-urn coupling, and
empirical checks of the concentration bounds.

RNG design, fixed here for the whole package: replica r of stream
(seed, stream_id) draws from a dedicated splitmix64 state derived from
(seed, stream_id, r) inside the compiled kernels, so results never depend
on thread count or scheduling.  Code that wants bulk numpy sampling instead
(binomials, normals) uses ``RngStream.generator()``, a Philox counter-based
generator keyed by the same (seed, stream_id) pair.  Both layers are
deterministic given the stream and independent across stream_ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateUrnError, DomainError
from .season_exact import UrnState, season_moments_exact


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream handle: a 64-bit seed plus a stream index.

    Identical (seed, stream_id) reproduce identical draw sequences; distinct
    stream_ids give independent streams.  Both values are reduced modulo
    2^64 on construction.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & _kernels.MASK64)
        object.__setattr__(self, "stream_id", int(self.stream_id) & _kernels.MASK64)

    @property
    def _key(self) -> tuple[np.uint64, np.uint64]:
        # kernel arguments must be uint64 scalars, see _kernels.as_u64
        return _kernels.as_u64(self.seed), _kernels.as_u64(self.stream_id)

    def generator(self) -> np.random.Generator:
        """Philox generator keyed by (seed, stream_id) for numpy sampling."""
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class SeasonOutcome:
    """Realized season counts: marked whites (X) and marked blacks (Y)."""

    x_count: int
    y_count: int


@dataclass(frozen=True)
class EstimateWithError:
    """Monte-Carlo estimate with its standard error (sample sd / sqrt(n))."""

    value: float
    std_error: float
    n_samples: int


@dataclass(frozen=True)
class TailCheckRow:
    """Empirical exceedance of one deviation threshold against its bound."""

    which: str  # "x" or "y"
    threshold: float
    empirical: float
    bound: float
    std_error: float
    violation: bool


@dataclass(frozen=True)
class ThirdMomentRow:
    """Empirical centered third absolute moment against its bound."""

    which: str  # "x" or "y"
    empirical: float
    bound: float
    std_error: float
    violation: bool


def _check_simulable(state: UrnState) -> None:
    if state.w == 0 and state.b == 0 and state.f > 0:
        raise DegenerateUrnError("cannot draw from an urn with no balls")


def simulate_season(state: UrnState, rng: RngStream, replica: int = 0) -> SeasonOutcome:
    """Run one season: f draws, whites marked and removed, blacks marked and
    returned, marked blacks returned unchanged.

    Equals replica ``replica`` of ``simulate_seasons`` on the same stream.
    """
    _check_simulable(state)
    xs, ys, _, _ = _season_arrays(state, rng, 1, replica)
    out = SeasonOutcome(int(xs[0]), int(ys[0]))
    if not (0 <= out.x_count <= min(state.w, state.f)):
        raise RuntimeError(f"season produced impossible X = {out.x_count}")
    if not (0 <= out.y_count <= min(state.b, state.f)):
        raise RuntimeError(f"season produced impossible Y = {out.y_count}")
    if out.x_count + out.y_count > state.f:
        raise RuntimeError("season produced more marks than draws")
    return out


def _season_arrays(state: UrnState, rng: RngStream, reps: int, base_replica: int = 0):
    if reps < 1:
        raise DomainError(f"reps must be >= 1, got {reps}")
    xs = np.empty(reps, dtype=np.int64)
    ys = np.empty(reps, dtype=np.int64)
    fws = np.empty(reps, dtype=np.uint64)
    fbs = np.empty(reps, dtype=np.uint64)
    if base_replica:
        # single-replica path reusing the batch kernel at an offset index
        st = _kernels.as_u64(
            _kernels._replica_state(*rng._key, base_replica)
        )
        x, y, fw, fb, _ = _kernels._season_core(state.w, state.b, state.f, st)
        xs[0], ys[0], fws[0], fbs[0] = x, y, int(fw), int(fb)
    else:
        _kernels.season_batch(
            state.w, state.b, state.f, *rng._key, reps, xs, ys, fws, fbs
        )
    return xs, ys, fws, fbs


def simulate_seasons(
    state: UrnState, rng: RngStream, reps: int
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized seasons: arrays of (X, Y) over reps independent replicas."""
    _check_simulable(state)
    xs, ys, _, _ = _season_arrays(state, rng, reps)
    return xs, ys


def simulate_coupled_urns(
    state: UrnState, rng: RngStream, replica: int = 0
) -> tuple[bool, bool]:
    """One coupled run of the two urns that differ in the color of a single
    ball, driven by a shared uniform number stream.

    Urn 1 holds w whites, b-1 blacks, and the tagged ball; urn 2 recolors
    one white to black.  Returns (tag drawn in urn 1, tag drawn in urn 2).
    The construction makes (False, True) impossible.
    """
    if state.w < 1 or state.b < 1:
        raise DomainError("coupling needs w >= 1 and b >= 1")
    st = _kernels.as_u64(_kernels._replica_state(*rng._key, replica))
    present1 = np.empty(state.w, dtype=np.bool_)
    present2 = np.empty(state.w, dtype=np.bool_)
    red1, red2, _ = _kernels._coupled_core(
        state.w, state.b, state.f, st, present1, present2
    )
    return bool(red1), bool(red2)


def simulate_coupled_batch(
    state: UrnState, rng: RngStream, reps: int
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized coupled runs; replica 0 equals simulate_coupled_urns."""
    if state.w < 1 or state.b < 1:
        raise DomainError("coupling needs w >= 1 and b >= 1")
    if reps < 1:
        raise DomainError(f"reps must be >= 1, got {reps}")
    red1 = np.empty(reps, dtype=np.uint64)
    red2 = np.empty(reps, dtype=np.uint64)
    _kernels.coupled_batch(
        state.w, state.b, state.f, *rng._key, reps, red1, red2
    )
    return red1.astype(bool), red2.astype(bool)


def _frequency_estimate(flags: np.ndarray) -> EstimateWithError:
    n = flags.size
    value = float(flags.mean())
    sd = float(flags.std(ddof=1)) if n > 1 else 0.0
    return EstimateWithError(value=value, std_error=sd / math.sqrt(n), n_samples=n)


def estimate_probs(
    state: UrnState, reps: int, seed: int, stream_id: int = 0
) -> tuple[EstimateWithError, EstimateWithError]:
    """Unbiased frequency estimates of the per-ball marking probabilities.

    One designated white and one designated black are tracked through each
    of reps independent seasons; the estimates are the fraction of seasons
    in which the designated ball got marked.
    """
    if state.w < 1 or state.b < 1:
        raise DomainError("estimate_probs needs w >= 1 and b >= 1")
    _, _, fws, fbs = _season_arrays(state, RngStream(seed, stream_id), reps)
    return _frequency_estimate(fws.astype(np.float64)), _frequency_estimate(
        fbs.astype(np.float64)
    )


def _tail_rows(
    which: str, devs: np.ndarray, n: int, thresholds: list[float], reps: int
) -> list[TailCheckRow]:
    rows = []
    for d in thresholds:
        if d < 0:
            raise DomainError(f"threshold must be >= 0, got {d}")
        empirical = float(np.mean(devs >= d))
        if d == 0:
            bound = 1.0
        elif n == 0:
            bound = 0.0  # the count is identically 0, no deviation possible
        else:
            bound = math.exp(-d * d / (4.0 * n))
        se = math.sqrt(empirical * (1.0 - empirical) / reps)
        rows.append(
            TailCheckRow(
                which=which,
                threshold=float(d),
                empirical=empirical,
                bound=bound,
                std_error=se,
                violation=empirical > bound + 3.0 * se,
            )
        )
    return rows


def tail_check(
    state: UrnState, reps: int, thresholds: list[float], seed: int
) -> list[TailCheckRow]:
    """Empirical deviation tails of X and Y against exp(-D^2 / (4n)).

    The centering uses the exact means, n = w for X and n = b for Y.  A row
    is flagged only when the empirical tail exceeds the bound by more than 3
    binomial standard errors; the check is one-sided by design.
    """
    _check_simulable(state)
    if reps < 1:
        raise DomainError(f"reps must be >= 1, got {reps}")
    xs, ys = simulate_seasons(state, RngStream(seed), reps)
    m = season_moments_exact(state)
    devs_x = np.abs(xs - m.mean_X)
    devs_y = np.abs(ys - m.mean_Y)
    return _tail_rows("x", devs_x, state.w, thresholds, reps) + _tail_rows(
        "y", devs_y, state.b, thresholds, reps
    )


THIRD_MOMENT_COEFF = 12.0 * math.e


def third_moment_check(state: UrnState, reps: int, seed: int) -> list[ThirdMomentRow]:
    """Empirical E|count - mean|^3 against 12 e n^{3/2}, n = w resp. b."""
    _check_simulable(state)
    if reps < 1:
        raise DomainError(f"reps must be >= 1, got {reps}")
    xs, ys = simulate_seasons(state, RngStream(seed), reps)
    m = season_moments_exact(state)
    rows = []
    for which, counts, mean, n in (
        ("x", xs, m.mean_X, state.w),
        ("y", ys, m.mean_Y, state.b),
    ):
        cubes = np.abs(counts - mean) ** 3
        empirical = float(cubes.mean())
        se = float(cubes.std(ddof=1)) / math.sqrt(reps) if reps > 1 else 0.0
        bound = THIRD_MOMENT_COEFF * n**1.5
        rows.append(
            ThirdMomentRow(
                which=which,
                empirical=empirical,
                bound=bound,
                std_error=se,
                violation=empirical > bound + 3.0 * se,
            )
        )
    return rows
