"""Empirical verification tying the discrete model to its limits.

Three instruments:

* rate_sweep_q measures, for growing N, the worst-case gap over a region
  of the lattice between exact table quantities and their analytic
  limits, then fits the log-log decay slope.  Five targets cover the
  avoidance probability itself, its two scaled forward differences, the
  two-tag variant, and the scaled reproduction-probability gap between
  black and white.
* infinitesimal_check compares Monte-Carlo one-step drift and variance
  of the chain, n (E[X1] - x) and n Var(X1), against the diffusion
  coefficients b(x) and a(x).
* chain_vs_diffusion runs the chain for about t * n generations and the
  SDE to time t and compares terminal moments.

Everything is deterministic given seeds; Monte-Carlo cells use the
stream id as a job index so fan-out cannot reorder results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .diffusion import SdeConfig, path_moments
from .errors import DomainError, EmptyRegionError, InfeasibleSizeError
from .limit_analytic import diffusion_coeffs, solve_T_grid
from .season_exact import QTable, UrnState
from .season_mc import RngStream, _season_arrays
from .wf_chain import ChainConfig, chain_final_batch, classical_success_prob, one_step_samples

RATE_TARGETS = ("q_vs_u", "dxq_vs_ux", "dyq_vs_uy", "qtilde_vs_u2", "fitness_gap")
_FULL_ENUM_LIMIT = 400
_MAX_SWEEP_N = 4000

__all__ = [
    "RATE_TARGETS",
    "Region",
    "RateTable",
    "rate_sweep_q",
    "InfinitesimalRow",
    "InfinitesimalReport",
    "infinitesimal_check",
    "BetaShiftResult",
    "beta_shift_check",
    "ComparisonReport",
    "chain_vs_diffusion",
]


@dataclass(frozen=True)
class Region:
    """Subset of the limit simplex on which uniform rate bounds hold.

    kind "y_floor": black share at least the parameter (parameter > 0).
    kind "s_capped": draws per ball at most s, plus the nondegeneracy
    margin x - z >= (1-s)/(2+2s), for 0 < s < 1.
    """

    kind: str
    value: float

    def __post_init__(self) -> None:
        if self.kind == "y_floor":
            if not (isinstance(self.value, (int, float)) and self.value > 0.0):
                raise DomainError("y_floor region needs a positive floor")
        elif self.kind == "s_capped":
            if not (isinstance(self.value, (int, float)) and 0.0 < self.value < 1.0):
                raise DomainError("s_capped region needs 0 < s < 1")
        else:
            raise DomainError(f"unknown region kind {self.kind!r}")

    @classmethod
    def y_floor(cls, y0: float) -> "Region":
        return cls("y_floor", y0)

    @classmethod
    def s_capped(cls, s: float) -> "Region":
        return cls("s_capped", s)

    def contains(self, x: float, y: float, z: float) -> bool:
        if min(x, y, z) < 0.0 or x + y + z > 1.0 + 1e-12:
            return False
        if self.kind == "y_floor":
            return y >= self.value
        s = self.value
        return z <= s * (x + y) and x - z >= (1.0 - s) / (2.0 + 2.0 * s)

    def lattice_mask(self, xg: np.ndarray, yg: np.ndarray, z: float) -> np.ndarray:
        """Vectorized membership for one draw layer (z fixed)."""
        simplex = xg + yg + z <= 1.0 + 1e-12
        if self.kind == "y_floor":
            return simplex & (yg >= self.value)
        s = self.value
        return (
            simplex
            & (z <= s * (xg + yg))
            & (xg - z >= (1.0 - s) / (2.0 + 2.0 * s))
        )


@dataclass(frozen=True)
class RateTable:
    """Sup-error rows per N with a least-squares log-log fit.

    coverage is the fraction of region lattice points evaluated (1.0 up
    to the full-enumeration limit, below 1.0 for strided large N).
    fitted_constant is exp(intercept), the C in sup_error ~ C * N^slope.
    """

    target: str
    region: Region
    ns: Tuple[int, ...]
    sup_errors: Tuple[float, ...]
    coverages: Tuple[float, ...]
    fitted_slope: float
    fitted_constant: float
    fit_r2: float

    def __post_init__(self) -> None:
        if len(self.ns) != len(self.sup_errors) or len(self.ns) != len(self.coverages):
            raise DomainError("rows must align")
        if any(b <= a for a, b in zip(self.ns, self.ns[1:])):
            raise DomainError("ns must be strictly increasing")
        if any(e < 0.0 for e in self.sup_errors):
            raise DomainError("sup errors must be nonnegative")


def _u_and_T(xs: np.ndarray, ys: np.ndarray, zs: np.ndarray):
    """Limit avoidance probability and its time change on lattice points.

    The y = 0 face (reachable only in s_capped regions, where z < x is
    guaranteed) has the elementary closed form u = 1 - z/x.
    """
    T = np.empty_like(xs)
    u = np.empty_like(xs)
    pos = ys > 0.0
    if pos.any():
        T[pos] = solve_T_grid(xs[pos], ys[pos], zs[pos])
        u[pos] = np.exp(-T[pos])
    face = ~pos
    if face.any():
        u[face] = 1.0 - zs[face] / xs[face]
        T[face] = -np.log(u[face])
    return u, T


def _layer_sup(
    target: str,
    layer: np.ndarray,
    m: np.ndarray,
    W: np.ndarray,
    B: np.ndarray,
    N: int,
    z: float,
) -> float:
    xs = W[m] / N
    ys = B[m] / N
    zs = np.full(xs.size, z)
    u, T = _u_and_T(xs, ys, zs)
    if target == "q_vs_u":
        err = np.abs(layer[m] - u)
    elif target == "qtilde_vs_u2":
        err = np.abs(layer[m] - u * u)
    else:
        denom = xs * u + ys
        dxu = u * (1.0 - u) / denom
        if target == "dxq_vs_ux":
            dq = layer[W[m] + 1, B[m]] - layer[m]
            err = np.abs(N * dq - dxu)
        elif target == "dyq_vs_uy":
            dyu = u * T / denom
            dq = layer[W[m], B[m] + 1] - layer[m]
            err = np.abs(N * dq - dyu)
        else:  # fitness_gap
            dyu = u * T / denom
            pd = layer[W[m] - 1, B[m]] - layer[W[m], B[m] - 1]
            err = np.abs(N * pd - (dyu - dxu))
    return float(err.max())


def _sup_error_one_n(
    region: Region, N: int, target: str, full_enum_limit: int
) -> Tuple[float, float]:
    stride = 1 if N <= full_enum_limit else math.ceil(N / full_enum_limit)
    kind = "qtilde" if target == "qtilde_vs_u2" else "q"
    table = QTable(kind, N, N)
    idx = np.arange(N + 1)
    W, B = np.meshgrid(idx, idx, indexing="ij")
    sum_wb = W + B
    xg = W / N
    yg = B / N
    needs_shift = target in ("dxq_vs_ux", "dyq_vs_uy")
    sup = 0.0
    visited = 0
    total = 0
    for f in range(N + 1):
        if f:
            table.advance(f)
        z = f / N
        m = (sum_wb <= (N - f - 1 if needs_shift else N - f)) & region.lattice_mask(
            xg, yg, z
        )
        if target == "fitness_gap":
            m = m & (W >= 1) & (B >= 1)
        n_pts = int(m.sum())
        if n_pts == 0:
            continue
        total += n_pts
        if stride > 1:
            if f % stride:
                continue
            m = m & (W % stride == 0) & (B % stride == 0)
            if not m.any():
                continue
        visited += int(m.sum())
        sup = max(sup, _layer_sup(target, table.current_layer, m, W, B, N, z))
    if total == 0:
        raise EmptyRegionError(
            f"region {region.kind}({region.value}) holds no lattice points at N={N}"
        )
    return sup, visited / total


def rate_sweep_q(
    region: Region,
    ns: Sequence[int],
    target: str,
    *,
    max_n: int = _MAX_SWEEP_N,
    full_enum_limit: int = _FULL_ENUM_LIMIT,
) -> RateTable:
    """Sup error of one discrete-vs-limit target for each N, plus the
    fitted log-log decay slope.

    Up to full_enum_limit every region lattice point is visited; above it
    the sweep strides indices by ceil(N / full_enum_limit) and records
    the achieved coverage fraction.
    """
    if target not in RATE_TARGETS:
        raise DomainError(f"target must be one of {RATE_TARGETS}, got {target!r}")
    ns = tuple(int(n) for n in ns)
    if len(ns) < 2 or any(b <= a for a, b in zip(ns, ns[1:])) or ns[0] < 1:
        raise DomainError("ns must be a strictly increasing list of two or more sizes")
    for n in ns:
        if n > max_n:
            raise InfeasibleSizeError(f"N={n} exceeds the sweep cap {max_n}")
    rows = [_sup_error_one_n(region, n, target, full_enum_limit) for n in ns]
    sups = tuple(r[0] for r in rows)
    covs = tuple(r[1] for r in rows)
    if any(s <= 0.0 for s in sups):
        raise DomainError("a zero supremum leaves the log-log fit undefined")
    log_n = np.log(np.asarray(ns, float))
    log_e = np.log(np.asarray(sups))
    slope, intercept = np.polyfit(log_n, log_e, 1)
    pred = slope * log_n + intercept
    ss_res = float(np.sum((log_e - pred) ** 2))
    ss_tot = float(np.sum((log_e - log_e.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateTable(
        target=target,
        region=region,
        ns=ns,
        sup_errors=sups,
        coverages=covs,
        fitted_slope=float(slope),
        fitted_constant=float(math.exp(intercept)),
        fit_r2=r2,
    )


@dataclass(frozen=True)
class InfinitesimalRow:
    """One (n, x) cell: hatted Monte-Carlo estimates vs coefficient
    formulas, with the envelope verdicts filled in by the report."""

    n: int
    x: float
    a_hat: float
    a_se: float
    a_ref: float
    b_hat: float
    b_se: float
    b_ref: float
    a_within: bool
    b_within: bool


@dataclass(frozen=True)
class InfinitesimalReport:
    """Rows plus per-x fitted envelope constants (c_a, c_b); a row passes
    when |hat - ref| <= 4 SE + c / sqrt(n), with c fitted at the smallest
    n of its x column."""

    rows: Tuple[InfinitesimalRow, ...]
    envelopes: Tuple[Tuple[float, float, float], ...]  # (x, c_a, c_b)

    @property
    def all_within(self) -> bool:
        return all(r.a_within and r.b_within for r in self.rows)


def infinitesimal_check(
    n_list: Sequence[int],
    x_grid: Sequence[float],
    s: float,
    beta: float,
    reps: int,
    seed: int,
    *,
    x_cap: Optional[float] = None,
) -> InfinitesimalReport:
    """Monte-Carlo one-step drift/variance against the diffusion
    coefficients, per (n, x).

    For s >= 1 the coefficient claims are only uniform away from x = 1,
    so such runs must declare the x_cap they stay under.
    """
    n_list = sorted(int(n) for n in n_list)
    if not n_list or n_list[0] < 1:
        raise DomainError("n_list must hold positive sizes")
    if s >= 1.0:
        for x in x_grid:
            if x_cap is None or x > x_cap:
                raise DomainError(
                    "s >= 1 needs an explicit x_cap covering every grid point"
                )
    cells = []
    job = 0
    for n in n_list:
        for x in x_grid:
            w = round(x * n)
            if abs(x * n - w) > 1e-9:
                raise DomainError(f"x={x} is not on the grid of n={n}")
            cfg = ChainConfig(
                n=n, s=s, beta=beta, x0=x, generations=1, seed=seed, stream_id=job
            )
            samples = one_step_samples(x, cfg, reps, RngStream(seed, stream_id=job))
            job += 1
            mean = samples.mean()
            var = samples.var(ddof=1)
            centered = samples - mean
            b_hat = n * (mean - x)
            b_se = n * samples.std(ddof=1) / math.sqrt(reps)
            a_hat = n * var
            a_se = n * math.sqrt(max(np.mean(centered**4) - var**2, 0.0) / reps)
            c = diffusion_coeffs(s, x, beta)
            cells.append((n, x, a_hat, a_se, c.a, b_hat, b_se, c.b))
    envelopes = []
    by_x = {}
    for cell in cells:
        by_x.setdefault(cell[1], []).append(cell)
    env_for = {}
    for x, group in by_x.items():
        n0, _, a_hat, a_se, a_ref, b_hat, b_se, b_ref = min(group, key=lambda c: c[0])
        c_a = math.sqrt(n0) * max(0.0, abs(a_hat - a_ref) - 4.0 * a_se)
        c_b = math.sqrt(n0) * max(0.0, abs(b_hat - b_ref) - 4.0 * b_se)
        envelopes.append((x, c_a, c_b))
        env_for[x] = (c_a, c_b)
    rows = []
    for n, x, a_hat, a_se, a_ref, b_hat, b_se, b_ref in cells:
        c_a, c_b = env_for[x]
        rows.append(
            InfinitesimalRow(
                n=n,
                x=x,
                a_hat=a_hat,
                a_se=a_se,
                a_ref=a_ref,
                b_hat=b_hat,
                b_se=b_se,
                b_ref=b_ref,
                a_within=abs(a_hat - a_ref) <= 4.0 * a_se + c_a / math.sqrt(n) + 1e-12,
                b_within=abs(b_hat - b_ref) <= 4.0 * b_se + c_b / math.sqrt(n) + 1e-12,
            )
        )
    return InfinitesimalReport(rows=tuple(rows), envelopes=tuple(envelopes))


@dataclass(frozen=True)
class BetaShiftResult:
    """Drift shift between an advantaged and a neutral chain sharing the
    same seasons, versus the first-order reference beta * x * (1-x)."""

    shift_hat: float
    std_error: float
    reference: float

    @property
    def within(self) -> bool:
        return abs(self.shift_hat - self.reference) <= 4.0 * self.std_error


def beta_shift_check(
    n: int, x: float, s: float, beta: float, reps: int, seed: int
) -> BetaShiftResult:
    """Paired estimate of b_n(beta) - b_n(0) at one (n, x).

    Both arms reuse the same season samples; only the egg-share weighting
    and the closing binomial differ, which cancels most season noise.
    """
    cfg = ChainConfig(n=n, s=s, beta=beta, x0=x, generations=1, seed=seed)
    w = round(x * n)
    if abs(x * n - w) > 1e-9:
        raise DomainError(f"x={x} is not on the grid of n={n}")
    rng = RngStream(seed, stream_id=0)
    xs, ys, _, _ = _season_arrays(UrnState(w, n - w, cfg.f), rng, reps)
    if np.any(xs + ys == 0):
        raise RuntimeError("season marked no ball at all; dynamics violated")
    wx = (1.0 + cfg.beta_eff) * xs
    z_beta = wx / (wx + ys)
    z_zero = xs / (xs + ys)
    gen = rng.generator()
    k_beta = gen.binomial(n, z_beta)
    k_zero = gen.binomial(n, z_zero)
    diff = k_beta - k_zero  # = n * (X1_beta - X1_zero) per replica
    return BetaShiftResult(
        shift_hat=float(diff.mean()),
        std_error=float(diff.std(ddof=1) / math.sqrt(reps)),
        reference=beta * x * (1.0 - x),
    )


@dataclass(frozen=True)
class ComparisonReport:
    """Terminal-moment agreement between chain and SDE at matched time."""

    model: str
    n: int
    generations: int
    t: float
    chain_mean: float
    chain_var: float
    chain_mean_se: float
    chain_var_se: float
    sde_mean: float
    sde_var: float
    sde_mean_se: float
    sde_var_se: float
    mean_tol: float
    var_tol: float

    @property
    def mean_ok(self) -> bool:
        return abs(self.chain_mean - self.sde_mean) <= self.mean_tol

    @property
    def var_ok(self) -> bool:
        return abs(self.chain_var - self.sde_var) <= self.var_tol

    @property
    def passed(self) -> bool:
        return self.mean_ok and self.var_ok


def _classical_finals(
    n: int, beta: float, x0: float, gens: int, reps: int, rng: RngStream
) -> np.ndarray:
    gen = rng.generator()
    xs = np.full(reps, float(x0))
    for _ in range(gens):
        wx = (1.0 + beta / n) * xs
        p = wx / ((1.0 - xs) + wx)
        xs = gen.binomial(n, p) / n
    return xs


def chain_vs_diffusion(
    n: int,
    s: float,
    beta: float,
    x0: float,
    t: float,
    reps: int,
    seed: int,
    *,
    dt: float = 1e-3,
    model: str = "indirect",
) -> ComparisonReport:
    """Run the chain ceil(t n) generations and the SDE to time t; compare
    terminal mean and variance within max(0.02, 5 pooled SE).

    Generation k sits at diffusion time k/n.  The s < 1 regime is where
    the comparison is backed; s >= 1 runs are allowed but their boundary
    behavior is flagged by the SDE side.
    """
    if model not in ("indirect", "classical"):
        raise DomainError(f"model must be 'indirect' or 'classical', got {model!r}")
    if not 0.0 <= t:
        raise DomainError("t must be nonnegative")
    if reps < 2:
        raise DomainError("reps must be at least 2")
    gens = int(math.ceil(t * n - 1e-9))
    if gens == 0:
        return ComparisonReport(
            model=model, n=n, generations=0, t=t,
            chain_mean=x0, chain_var=0.0, chain_mean_se=0.0, chain_var_se=0.0,
            sde_mean=x0, sde_var=0.0, sde_mean_se=0.0, sde_var_se=0.0,
            mean_tol=0.02, var_tol=0.02,
        )
    if model == "indirect":
        cfg = ChainConfig(
            n=n, s=s, beta=beta, x0=x0, generations=gens, seed=seed, stream_id=0
        )
        finals = chain_final_batch(cfg, reps)
    else:
        classical_success_prob(x0, n, beta)  # validates x0
        finals = _classical_finals(n, beta, x0, gens, reps, RngStream(seed, 1))
    c_mean = float(finals.mean())
    c_var = float(finals.var(ddof=1))
    centered = finals - c_mean
    c_mean_se = float(finals.std(ddof=1) / math.sqrt(reps))
    c_var_se = float(math.sqrt(max(np.mean(centered**4) - c_var**2, 0.0) / reps))
    sde_cfg = SdeConfig(
        s=s, beta=beta, x0=x0, dt=dt, t_end=t, seed=seed, stream_id=2, model=model
    )
    pm = path_moments(sde_cfg, reps, [t])
    mean_tol = max(0.02, 5.0 * math.hypot(c_mean_se, float(pm.mean_se[0])))
    var_tol = max(0.02, 5.0 * math.hypot(c_var_se, float(pm.variance_se[0])))
    return ComparisonReport(
        model=model,
        n=n,
        generations=gens,
        t=t,
        chain_mean=c_mean,
        chain_var=c_var,
        chain_mean_se=c_mean_se,
        chain_var_se=c_var_se,
        sde_mean=float(pm.mean[0]),
        sde_var=float(pm.variance[0]),
        sde_mean_se=float(pm.mean_se[0]),
        sde_var_se=float(pm.variance_se[0]),
        mean_tol=mean_tol,
        var_tol=var_tol,
    )
