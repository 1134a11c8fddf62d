"""Large-population limit quantities: the time-change equation solver, the
avoidance limit u with its gradient, the season mass v_s with two
derivatives, and the diffusion coefficients they induce.

Everything here is deterministic scalar/array math; no randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

DEFAULT_TOL = 1e-13
OMEGA_SLACK = 1e-12
_MAX_NEWTON = 200
# closed-form v_s' is 0/0 at x = 1; switch to one-sided differences beyond this
EDGE_X = 1.0 - 1e-6
_FD_H = 1e-7


@dataclass(frozen=True)
class LimitPoint:
    """A point of the limit simplex: x, y, z >= 0 with x + y + z <= 1."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        x, y, z = float(self.x), float(self.y), float(self.z)
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
            raise DomainError("coordinates must be finite")
        if x < 0 or y < 0 or z < 0:
            raise DomainError(f"coordinates must be nonnegative, got {(x, y, z)}")
        if x + y + z > 1.0 + OMEGA_SLACK:
            raise DomainError(f"x + y + z = {x + y + z} exceeds 1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)

    def in_region_y(self, y0: float) -> bool:
        """Membership in the truncated region requiring y >= y0."""
        return self.y >= y0

    def in_region_s(self, s: float) -> bool:
        """Membership in the sex-ratio region: z <= s(x+y), x-z >= (1-s)/(2+2s)."""
        return self.z <= s * (self.x + self.y) and self.x - self.z >= (1.0 - s) / (
            2.0 + 2.0 * s
        )


@dataclass(frozen=True)
class LimitEval:
    """u = exp(-T), v = 1 - u, and the three partial derivatives of each."""

    T: float
    u: float
    v: float
    grad_T: tuple[float, float, float]
    grad_u: tuple[float, float, float]
    grad_v: tuple[float, float, float]


@dataclass(frozen=True)
class VsEval:
    """v_s(x) with its first two derivatives in x."""

    s: float
    x: float
    v_s: float
    v_s_prime: float
    v_s_second: float


@dataclass(frozen=True)
class DiffusionCoeffs:
    """Infinitesimal variance a and drift b of the limiting diffusion."""

    a: float
    b: float


def _check_solvable(point: LimitPoint) -> None:
    if point.y <= 0.0:
        raise DomainError("the time-change equation needs y > 0")


def solve_T(point: LimitPoint, tol: float = DEFAULT_TOL) -> float:
    """Unique root of phi(t) = x(1 - e^{-t}) + y t - z, to residual <= tol.

    phi is increasing and concave with phi(0) = -z <= 0 and phi(z/y) >= 0,
    so Newton from inside [0, z/y] converges from below; a bisection step
    replaces any iterate that leaves the bracket or stalls.
    """
    _check_solvable(point)
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    x, y, z = point.x, point.y, point.z
    if z == 0.0:
        return 0.0
    lo, hi = 0.0, z / y
    t = z / (x + y)  # first Newton step from t = 0
    for _ in range(_MAX_NEWTON):
        e = math.exp(-t)
        phi = x * (1.0 - e) + y * t - z
        if abs(phi) <= tol:
            return t
        if phi < 0.0:
            lo = t
        else:
            hi = t
        step = t - phi / (x * e + y)
        if not lo < step < hi:
            step = 0.5 * (lo + hi)
        if step == t:  # no representable progress left
            break
        t = step
    e = math.exp(-t)
    residual = x * (1.0 - e) + y * t - z
    raise ArithmeticError(
        f"root refinement stalled at t={t} with residual {residual:.3e} > tol={tol:.3e}"
    )


def solve_T_grid(
    xs: np.ndarray, ys: np.ndarray, zs: np.ndarray, tol: float = DEFAULT_TOL
) -> np.ndarray:
    """Vectorized solve_T over same-shape coordinate arrays.

    Newton from below is monotone here, so the whole batch iterates until
    every residual is within tol; stragglers (never seen in practice) fall
    back to the scalar safeguarded solver.
    """
    xs, ys, zs = np.broadcast_arrays(
        np.asarray(xs, float), np.asarray(ys, float), np.asarray(zs, float)
    )
    if np.any(ys <= 0.0):
        raise DomainError("the time-change equation needs y > 0")
    if np.any(xs < 0.0) or np.any(zs < 0.0) or np.any(xs + ys + zs > 1.0 + OMEGA_SLACK):
        raise DomainError("points must lie in the limit simplex")
    t = zs / (xs + ys)
    hi = zs / ys
    for _ in range(60):
        e = np.exp(-t)
        phi = xs * (1.0 - e) + ys * t - zs
        act = np.abs(phi) > tol
        if not act.any():
            return t
        # converged elements stay frozen so each result is independent of
        # what else shares the batch
        step = np.zeros_like(t)
        step[act] = phi[act] / (xs[act] * e[act] + ys[act])
        t = np.clip(t - step, 0.0, hi)
    e = np.exp(-t)
    phi = xs * (1.0 - e) + ys * t - zs
    bad = np.abs(phi) > tol
    flat_t = t.reshape(-1)
    flat_bad = bad.reshape(-1)
    fx, fy, fz = xs.reshape(-1), ys.reshape(-1), zs.reshape(-1)
    for i in np.nonzero(flat_bad)[0]:
        flat_t[i] = solve_T(LimitPoint(fx[i], fy[i], fz[i]), tol)
    return t


def eval_limit(point: LimitPoint, tol: float = DEFAULT_TOL) -> LimitEval:
    """T, u = e^{-T}, v = 1 - u, and their gradients at one point.

    The gradient of T comes from implicit differentiation:
    dT = (e^{-T} - 1, -T, 1) / (x e^{-T} + y); grad_u = -u grad_T;
    grad_v = -grad_u.
    """
    T = solve_T(point, tol)
    u = math.exp(-T)
    denom = point.x * u + point.y
    grad_T = ((u - 1.0) / denom, -T / denom, 1.0 / denom)
    grad_u = (-u * grad_T[0], -u * grad_T[1], -u * grad_T[2])
    grad_v = (-grad_u[0], -grad_u[1], -grad_u[2])
    return LimitEval(T=T, u=u, v=1.0 - u, grad_T=grad_T, grad_u=grad_u, grad_v=grad_v)


def eval_u_tilde(point: LimitPoint, tol: float = DEFAULT_TOL) -> float:
    """Two-tag avoidance limit: u squared (the doubled-rate time change)."""
    u = math.exp(-solve_T(point, tol))
    return u * u


def _vs_point(s: float, x: float) -> LimitPoint:
    return LimitPoint(x / (1.0 + s), (1.0 - x) / (1.0 + s), s / (1.0 + s))


def _vs_value(s: float, x: float, tol: float) -> float:
    if x >= 1.0:
        return min(s, 1.0)  # continuity extension, the mapped point has y = 0
    return 1.0 - math.exp(-solve_T(_vs_point(s, x), tol))


def _check_vs_domain(s: float, x: float) -> None:
    if not (s > 0.0 and math.isfinite(s)):
        raise DomainError(f"s must be a positive real, got {s}")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")


def _prime_formula(s, x, v):
    """Closed slope [(1-v)/(1-xv)] [(s-v)/(1-x)]; elementwise-safe."""
    return ((1.0 - v) / (1.0 - x * v)) * ((s - v) / (1.0 - x))


def eval_vs(s: float, x: float, tol: float = DEFAULT_TOL) -> VsEval:
    """v_s(x) with derivatives.

    v_s solves x v - (1-x) log(1-v) = s.  The closed forms
    v' = [(1-v)/(1-xv)] [(s-v)/(1-x)] and v'' = v' (-2xv^2+3v-s)/(1-xv)^2
    apply away from x = 1; past EDGE_X the 0/0 factor in v' switches to a
    one-sided difference, and v'' falls back to a second difference only
    when 1 - xv itself vanishes (s >= 1 at the right edge).
    """
    _check_vs_domain(s, x)
    v = _vs_value(s, x, tol)
    if x <= EDGE_X:
        prime = _prime_formula(s, x, v)
    else:
        prime = (v - _vs_value(s, x - _FD_H, tol)) / _FD_H
    one_minus_xv = 1.0 - x * v
    if one_minus_xv > 1e-8:
        second = prime * (-2.0 * x * v * v + 3.0 * v - s) / one_minus_xv**2
    else:
        v1 = _vs_value(s, x - _FD_H, tol)
        v2 = _vs_value(s, x - 2.0 * _FD_H, tol)
        second = (v - 2.0 * v1 + v2) / _FD_H**2
    return VsEval(s=s, x=x, v_s=v, v_s_prime=prime, v_s_second=second)


def vs_grid(s: float, xs: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Vectorized v_s over an array of x values in [0, 1]."""
    xs = np.asarray(xs, float)
    _check_vs_domain(s, 1.0 if xs.size == 0 else float(xs.max()))
    _check_vs_domain(s, 0.0 if xs.size == 0 else float(xs.min()))
    out = np.empty_like(xs)
    interior = xs < 1.0
    xi = xs[interior]
    T = solve_T_grid(xi / (1.0 + s), (1.0 - xi) / (1.0 + s), np.full_like(xi, s / (1.0 + s)), tol)
    out[interior] = 1.0 - np.exp(-T)
    out[~interior] = min(s, 1.0)
    return out


def diffusion_coeffs(s: float, x: float, beta: float) -> DiffusionCoeffs:
    """Diffusion coefficients a = x(1-x)/v_s, b = x(1-x)(beta - v_s'/v_s^2).

    Both vanish at x in {0, 1}; a exceeds the classical x(1-x) in the
    interior because v_s < 1 there.
    """
    _check_vs_domain(s, x)
    if not math.isfinite(beta):
        raise DomainError(f"beta must be finite, got {beta}")
    xq = x * (1.0 - x)
    if xq == 0.0:
        return DiffusionCoeffs(a=0.0, b=0.0)
    ve = eval_vs(s, x)
    return DiffusionCoeffs(
        a=xq / ve.v_s, b=xq * (beta - ve.v_s_prime / ve.v_s**2)
    )


def diffusion_coeffs_grid(
    s: float, xs: np.ndarray, beta: float, tol: float = DEFAULT_TOL
):
    """Vectorized diffusion coefficients over x values in [0, 1].

    Same formulas as the scalar version; both coefficients are pinned to
    zero at the endpoints, so the slope factor is only evaluated strictly
    inside, where 1 - x v_s stays positive in floating point.
    """
    xs = np.asarray(xs, float)
    if not math.isfinite(beta):
        raise DomainError(f"beta must be finite, got {beta}")
    v = vs_grid(s, xs, tol)
    a = np.zeros_like(xs)
    b = np.zeros_like(xs)
    interior = (xs > 0.0) & (xs < 1.0)
    xi, vi = xs[interior], v[interior]
    xq = xi * (1.0 - xi)
    prime = _prime_formula(s, xi, vi)
    a[interior] = xq / vi
    b[interior] = xq * (beta - prime / vi**2)
    return a, b
