"""Multi-generation chains on the frequency grid {0, 1/n, ..., 1}.

Two dynamics share the module.  The indirect chain runs a full mating
season each generation, weights the marked-white share by a small
per-generation advantage, and resamples the male count binomially from
that egg ratio.  The classical chain skips the season and feeds the
weighted frequency itself to the binomial, which makes it the standard
neutral-or-selected Wright-Fisher baseline.

The per-generation advantage is ``beta / n`` by default.  The alternative
convention divides by the total population ``(1 + s) n`` instead; the two
differ by the constant factor ``1 + s``, and ``beta_denominator`` selects
between them.

Randomness follows the package-wide two-layer scheme: whole trajectories
(run_chain, chain_final_batch, chain_step) live entirely on the counter
stream of the compiled kernels, so the replica-r lane of a batch equals a
scalar run at replica r draw for draw.  The vectorized one-step samplers
run seasons on the kernel stream and the closing binomial on the numpy
layer, which keeps them fast without touching the trajectory streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ._kernels import (
    as_u64,
    binomial_from_state,
    chain_batch,
    chain_traj,
    _replica_state,
    _season_core,
)
from .errors import DegenerateUrnError, DomainError
from .season_mc import RngStream

_GRID_TOL = 1e-9

__all__ = [
    "ChainConfig",
    "Trajectory",
    "chain_step",
    "run_chain",
    "chain_final_batch",
    "one_step_samples",
    "ztilde_prob",
    "classical_success_prob",
    "classical_wf_step",
    "classical_one_step_samples",
]


def _snap_floor(value: float) -> int:
    """floor() with a snap for products like 0.3 * 10 that land just
    under an integer."""
    f = math.floor(value)
    if value - f > 1.0 - _GRID_TOL:
        f += 1
    return f


@dataclass(frozen=True)
class ChainConfig:
    """Parameters of the indirect chain.

    n males carry the tracked trait frequency; each generation draws
    floor(s * n) females.  beta is the advantage of the focal type per
    generation, divided by n (beta_denominator "n") or by (1 + s) * n
    (beta_denominator "N").  x0 must sit on the grid {0, 1/n, ..., 1}.
    """

    n: int
    s: float
    beta: float
    x0: float
    generations: int
    seed: int
    stream_id: int = 0
    beta_denominator: str = "n"

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if not (isinstance(self.s, (int, float)) and math.isfinite(self.s) and self.s > 0):
            raise DomainError(f"s must be a positive finite number, got {self.s!r}")
        if not (isinstance(self.beta, (int, float)) and math.isfinite(self.beta)):
            raise DomainError(f"beta must be finite, got {self.beta!r}")
        if not isinstance(self.generations, (int, np.integer)) or self.generations < 0:
            raise DomainError(
                f"generations must be a nonnegative integer, got {self.generations!r}"
            )
        if self.beta_denominator not in ("n", "N"):
            raise DomainError(
                f"beta_denominator must be 'n' or 'N', got {self.beta_denominator!r}"
            )
        if not (isinstance(self.x0, (int, float)) and 0.0 <= self.x0 <= 1.0):
            raise DomainError(f"x0 must lie in [0, 1], got {self.x0!r}")
        if abs(self.x0 * self.n - round(self.x0 * self.n)) > _GRID_TOL:
            raise DomainError(f"x0 = {self.x0!r} is not a multiple of 1/{self.n}")
        if self.f == 0:
            raise DegenerateUrnError(
                f"floor(s * n) = 0 for s = {self.s}, n = {self.n}; no draws happen"
            )

    @property
    def f(self) -> int:
        """Draws per season."""
        return _snap_floor(self.s * self.n)

    @property
    def beta_eff(self) -> float:
        denom = self.n if self.beta_denominator == "n" else (1.0 + self.s) * self.n
        return self.beta / denom

    @property
    def w0(self) -> int:
        return round(self.x0 * self.n)

    def rng(self) -> RngStream:
        return RngStream(self.seed, self.stream_id)


@dataclass(frozen=True)
class Trajectory:
    """states[k] is the frequency after k generations; absorbed_at records
    the first boundary hit as (generation, boundary frequency)."""

    states: np.ndarray
    absorbed_at: Optional[Tuple[int, float]]

    @property
    def final(self) -> float:
        return float(self.states[-1])


def ztilde_prob(x_count: int, y_count: int, beta_eff: float) -> float:
    """Selection-weighted egg share of the focal type.

    Both counts zero is impossible after a season with at least one draw
    from a nonempty urn, so it is escalated rather than defined away.
    """
    if x_count < 0 or y_count < 0:
        raise DomainError("marked counts must be nonnegative")
    if x_count + y_count == 0:
        raise RuntimeError("season marked no ball at all; dynamics violated")
    wx = (1.0 + beta_eff) * x_count
    return wx / (wx + y_count)


def _check_runnable(n: int, f: int) -> None:
    if n < 1:
        raise DegenerateUrnError("chain needs at least one male")
    if f < 1:
        raise DegenerateUrnError("chain needs at least one draw per season")


def _grid_index(x: float, n: int) -> int:
    w = round(x * n)
    if not 0 <= w <= n or abs(x * n - w) > _GRID_TOL:
        raise DomainError(f"x = {x!r} is not on the grid with n = {n}")
    return w


def chain_step(x: float, cfg: ChainConfig, rng: RngStream, replica: int = 0) -> float:
    """One generation of the indirect chain, deterministic per (rng, replica).

    The season always runs, even at the boundaries: there the dynamics
    force the egg share to 0 or 1 and the binomial collapses, which is
    asserted instead of short-circuited.
    """
    _check_runnable(cfg.n, cfg.f)
    w = _grid_index(x, cfg.n)
    st = as_u64(_replica_state(as_u64(rng.seed), as_u64(rng.stream_id), replica))
    x_count, y_count, _, _, st = _season_core(w, cfg.n - w, cfg.f, st)
    z = ztilde_prob(int(x_count), int(y_count), cfg.beta_eff)
    k, _ = binomial_from_state(cfg.n, z, as_u64(st))
    if w == 0:
        assert k == 0, "boundary 0 failed to absorb"
    if w == cfg.n:
        assert k == cfg.n, "boundary 1 failed to absorb"
    return k / cfg.n


def run_chain(cfg: ChainConfig, replica: int = 0) -> Trajectory:
    """Iterate the indirect chain for cfg.generations steps."""
    _check_runnable(cfg.n, cfg.f)
    ws = np.empty(cfg.generations + 1, dtype=np.int64)
    bad = chain_traj(
        cfg.n,
        cfg.f,
        cfg.beta_eff,
        cfg.generations,
        cfg.w0,
        as_u64(cfg.seed),
        as_u64(cfg.stream_id),
        replica,
        ws,
    )
    if bad:
        raise RuntimeError("season marked no ball at all; dynamics violated")
    states = ws / cfg.n
    states.setflags(write=False)
    absorbed_at = None
    hits = np.flatnonzero((ws == 0) | (ws == cfg.n))
    if hits.size:
        g = int(hits[0])
        absorbed_at = (g, float(states[g]))
    return Trajectory(states=states, absorbed_at=absorbed_at)


def chain_final_batch(cfg: ChainConfig, reps: int) -> np.ndarray:
    """Final frequencies of reps independent trajectories.

    Lane r reproduces run_chain(cfg, replica=r) draw for draw.
    """
    _check_runnable(cfg.n, cfg.f)
    if reps < 1:
        raise DomainError("reps must be positive")
    finals = np.empty(reps, dtype=np.int64)
    errs = np.zeros(reps, dtype=np.uint64)
    chain_batch(
        cfg.n,
        cfg.f,
        cfg.beta_eff,
        cfg.generations,
        cfg.w0,
        as_u64(cfg.seed),
        as_u64(cfg.stream_id),
        reps,
        finals,
        errs,
    )
    if errs.any():
        raise RuntimeError("season marked no ball at all; dynamics violated")
    return finals / cfg.n


def one_step_samples(x: float, cfg: ChainConfig, reps: int, rng: RngStream) -> np.ndarray:
    """reps independent one-generation updates from the same x, vectorized.

    Seasons run on per-replica kernel streams; the closing binomial draws
    come from the numpy layer of rng.
    """
    from .season_exact import UrnState
    from .season_mc import _season_arrays

    _check_runnable(cfg.n, cfg.f)
    if reps < 1:
        raise DomainError("reps must be positive")
    w = _grid_index(x, cfg.n)
    xs, ys, _, _ = _season_arrays(UrnState(w, cfg.n - w, cfg.f), rng, reps)
    if np.any(xs + ys == 0):
        raise RuntimeError("season marked no ball at all; dynamics violated")
    wx = (1.0 + cfg.beta_eff) * xs
    z = wx / (wx + ys)
    ks = rng.generator().binomial(cfg.n, z)
    return ks / cfg.n


def classical_success_prob(x: float, n: int, beta: float) -> float:
    """Binomial success probability of the classical selected chain."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x!r}")
    wx = (1.0 + beta / n) * x
    return wx / ((1.0 - x) + wx)


def classical_wf_step(x: float, n: int, beta: float, rng: np.random.Generator) -> float:
    """One generation of the classical chain: Binomial(n, weighted x) / n."""
    p = classical_success_prob(x, n, beta)
    return int(rng.binomial(n, p)) / n


def classical_one_step_samples(
    x: float, n: int, beta: float, reps: int, rng: RngStream
) -> np.ndarray:
    """reps independent classical one-step updates, vectorized."""
    if reps < 1:
        raise DomainError("reps must be positive")
    p = classical_success_prob(x, n, beta)
    return rng.generator().binomial(n, p, size=reps) / n
