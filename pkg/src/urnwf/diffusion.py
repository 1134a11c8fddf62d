"""Euler-Maruyama integration of the limiting frequency diffusions.

The indirect model uses the season-derived coefficients
a(x) = x(1-x)/v_s(x) and b(x) = x(1-x)(beta - v_s'/v_s^2), pulled from
limit_analytic so the formulas live in exactly one place.  The classical
model is the standard weak-selection baseline a(x) = x(1-x),
b(x) = beta x(1-x).

Discretization: X_{k+1} = clamp(X_k + b dt + sqrt(a dt) G_k, 0, 1), with
an exact hit of 0 or 1 treated as absorbing (both coefficients vanish
there).  Clamping happens before the next coefficient evaluation, so the
square root never sees a negative argument.  The scheme is first-order
biased near the boundaries, which is acceptable for the comparisons the
package makes.

Each path replica owns a counter-based numpy generator derived from
(seed, stream_id, replica), so ensembles reproduce scalar runs path for
path and parallelize trivially.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError
from .limit_analytic import diffusion_coeffs_grid

_MASK64 = 0xFFFFFFFFFFFFFFFF
_CHUNK = 2048

__all__ = [
    "SdeConfig",
    "SdePath",
    "PathMoments",
    "em_simulate",
    "path_moments",
]


@dataclass(frozen=True)
class SdeConfig:
    """Integration setup for one diffusion model.

    s and beta parameterize the coefficients; x0 is the starting
    frequency; the grid runs from 0 to t_end in steps of dt (plus one
    shorter final step when dt does not divide t_end).
    """

    s: float
    beta: float
    x0: float
    dt: float = 1e-3
    t_end: float = 1.0
    seed: int = 0
    stream_id: int = 0
    model: str = "indirect"

    def __post_init__(self) -> None:
        if self.model not in ("indirect", "classical"):
            raise DomainError(f"model must be 'indirect' or 'classical', got {self.model!r}")
        if not (isinstance(self.s, (int, float)) and math.isfinite(self.s) and self.s > 0):
            raise DomainError(f"s must be a positive finite number, got {self.s!r}")
        if not (isinstance(self.beta, (int, float)) and math.isfinite(self.beta)):
            raise DomainError(f"beta must be finite, got {self.beta!r}")
        if not (isinstance(self.x0, (int, float)) and 0.0 <= self.x0 <= 1.0):
            raise DomainError(f"x0 must lie in [0, 1], got {self.x0!r}")
        if not (isinstance(self.dt, (int, float)) and 0.0 < self.dt):
            raise DomainError(f"dt must be positive, got {self.dt!r}")
        if not (isinstance(self.t_end, (int, float)) and self.dt <= self.t_end):
            raise DomainError("t_end must be at least dt")

    @property
    def boundary_validated(self) -> bool:
        """Boundary behavior of the indirect model at s >= 1 is an open
        problem; statistics from such runs are flagged, not blocked."""
        return self.model == "classical" or self.s < 1.0

    def step_widths(self) -> np.ndarray:
        full = int(math.floor(self.t_end / self.dt + 1e-12))
        rem = self.t_end - full * self.dt
        widths = [self.dt] * full
        if rem > 1e-12 * max(1.0, self.t_end):
            widths.append(rem)
        return np.asarray(widths)

    def times(self) -> np.ndarray:
        return np.concatenate(([0.0], np.cumsum(self.step_widths())))


@dataclass(frozen=True)
class SdePath:
    """One trajectory on the time grid; absorbed_at is the first exact
    boundary hit as (time, boundary)."""

    times: np.ndarray
    values: np.ndarray
    absorbed_at: Optional[Tuple[float, float]]


@dataclass(frozen=True)
class PathMoments:
    """Snapshot statistics of an ensemble at requested times (snapped to
    the step grid).  boundary_validated mirrors the config flag."""

    times: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    mean_se: np.ndarray
    variance_se: np.ndarray
    reps: int
    boundary_validated: bool


def _path_generator(cfg: SdeConfig, replica: int) -> np.random.Generator:
    seq = np.random.SeedSequence(
        entropy=cfg.seed & _MASK64, spawn_key=(cfg.stream_id & _MASK64, replica)
    )
    return np.random.Generator(np.random.Philox(seq))


def _coeffs_scalar(cfg: SdeConfig, x: float) -> Tuple[float, float]:
    # singleton grid call, not the scalar solver: its Newton schedule is
    # what the ensemble uses, keeping scalar runs bitwise-equal to lanes
    if cfg.model == "indirect":
        a, b = diffusion_coeffs_grid(cfg.s, np.array([x]), cfg.beta)
        return float(a[0]), float(b[0])
    xq = x * (1.0 - x)
    return xq, cfg.beta * xq


def em_simulate(cfg: SdeConfig, replica: int = 0) -> SdePath:
    """Integrate one path; deterministic per (cfg, replica)."""
    widths = cfg.step_widths()
    times = cfg.times()
    values = np.empty(times.size)
    values[0] = x = float(cfg.x0)
    absorbed_at: Optional[Tuple[float, float]] = None
    if x in (0.0, 1.0):
        absorbed_at = (0.0, x)
    gen = _path_generator(cfg, replica)
    for k, h in enumerate(widths):
        if absorbed_at is None:
            a, b = _coeffs_scalar(cfg, x)
            g = gen.standard_normal()
            x = min(1.0, max(0.0, x + b * h + math.sqrt(a * h) * g))
            if x in (0.0, 1.0):
                absorbed_at = (float(times[k + 1]), x)
        values[k + 1] = x
    values.setflags(write=False)
    times.setflags(write=False)
    return SdePath(times=times, values=values, absorbed_at=absorbed_at)


def _ensemble_snapshots(
    cfg: SdeConfig, reps: int, record: np.ndarray
) -> np.ndarray:
    """States of reps paths at the recorded step indices.

    Path r consumes the same normal stream as em_simulate(cfg, replica=r)
    (unused post-absorption draws differ, the trajectories do not).
    """
    widths = cfg.step_widths()
    n_steps = widths.size
    out = np.empty((reps, record.size))
    for lo in range(0, reps, _CHUNK):
        hi = min(lo + _CHUNK, reps)
        block = hi - lo
        normals = np.empty((block, n_steps))
        for r in range(block):
            normals[r] = _path_generator(cfg, lo + r).standard_normal(n_steps)
        xs = np.full(block, float(cfg.x0))
        rec_pos = 0
        if record[rec_pos] == 0:
            out[lo:hi, rec_pos] = xs
            rec_pos += 1
        for k, h in enumerate(widths):
            alive = (xs > 0.0) & (xs < 1.0)
            if alive.any():
                xa = xs[alive]
                if cfg.model == "indirect":
                    a, b = diffusion_coeffs_grid(cfg.s, xa, cfg.beta)
                else:
                    xq = xa * (1.0 - xa)
                    a, b = xq, cfg.beta * xq
                xs[alive] = np.clip(
                    xa + b * h + np.sqrt(a * h) * normals[alive, k], 0.0, 1.0
                )
            if rec_pos < record.size and record[rec_pos] == k + 1:
                out[lo:hi, rec_pos] = xs
                rec_pos += 1
    return out


def path_moments(cfg: SdeConfig, reps: int, t_grid: Sequence[float]) -> PathMoments:
    """Mean and variance of the ensemble at each requested time.

    Times are snapped to the nearest step boundary.  Standard errors:
    sd/sqrt(reps) for the mean, sqrt((m4 - var^2)/reps) for the variance.
    """
    if reps < 2:
        raise DomainError("reps must be at least 2 for variance estimates")
    t_req = np.asarray(list(t_grid), float)
    if t_req.size == 0:
        raise DomainError("t_grid must not be empty")
    if np.any(t_req < 0.0) or np.any(t_req > cfg.t_end + 1e-12):
        raise DomainError("requested times must lie in [0, t_end]")
    times = cfg.times()
    idx = np.abs(times[None, :] - t_req[:, None]).argmin(axis=1)
    record = np.unique(idx)
    snaps = _ensemble_snapshots(cfg, reps, record)
    col = {step: j for j, step in enumerate(record)}
    sel = np.array([col[i] for i in idx])
    vals = snaps[:, sel]
    mean = vals.mean(axis=0)
    var = vals.var(axis=0, ddof=1)
    centered = vals - mean
    m4 = np.mean(centered**4, axis=0)
    return PathMoments(
        times=times[idx],
        mean=mean,
        variance=var,
        mean_se=vals.std(axis=0, ddof=1) / math.sqrt(reps),
        variance_se=np.sqrt(np.maximum(m4 - var**2, 0.0) / reps),
        reps=reps,
        boundary_validated=cfg.boundary_validated,
    )
