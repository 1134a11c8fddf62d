"""Tests for the limit quantities.

Frozen constants come from bisection oracles: T at (0.25, 0.25, 0.5) from
bisecting the increasing root function on [0, z/y], and v_s at (0.5, 0.5)
from bisecting x v - (1-x) log(1-v) - s on its bracketing interval.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from urnwf.errors import DomainError
from urnwf.limit_analytic import (
    DiffusionCoeffs,
    LimitPoint,
    diffusion_coeffs,
    eval_limit,
    eval_u_tilde,
    eval_vs,
    solve_T,
    solve_T_grid,
    vs_grid,
)

T_FROZEN = 1.278464542761074  # bisection to full double precision
VS_FROZEN = 0.43285670959021605
VSP_FROZEN = 0.0971956218298003  # matches the central-difference oracle to 1e-11
VSS_FROZEN = 0.09675564614018842

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


omega_points = st.tuples(
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=1e-3, max_value=1.0),
    st.floats(min_value=0.0, max_value=1.0),
).filter(lambda p: p[0] + p[1] + p[2] <= 1.0)


class TestSolveT:
    def test_frozen_value(self):
        assert solve_T(LimitPoint(0.25, 0.25, 0.5)) == pytest.approx(T_FROZEN, abs=1e-12)

    def test_zero_z(self):
        assert solve_T(LimitPoint(0.3, 0.3, 0.0)) == 0.0

    def test_zero_x_closed_form(self):
        assert solve_T(LimitPoint(0.0, 0.5, 0.25)) == pytest.approx(0.5, abs=1e-13)
        assert solve_T(LimitPoint(0.0, 0.2, 0.6)) == pytest.approx(3.0, abs=1e-12)

    @settings(deadline=None, max_examples=150)
    @given(p=omega_points)
    def test_residual_and_bracket(self, p):
        x, y, z = p
        T = solve_T(LimitPoint(x, y, z), tol=1e-13)
        assert abs(x * (1 - math.exp(-T)) + y * T - z) <= 1e-13
        assert 0.0 <= T <= z / y + 1e-12

    def test_rejects_zero_y(self):
        with pytest.raises(DomainError):
            solve_T(LimitPoint(0.5, 0.0, 0.3))

    def test_rejects_points_outside_simplex(self):
        with pytest.raises(DomainError):
            LimitPoint(0.5, 0.5, 0.5)
        with pytest.raises(DomainError):
            LimitPoint(-0.1, 0.5, 0.2)
        with pytest.raises(DomainError):
            LimitPoint(0.1, 0.5, float("nan"))

    def test_rejects_bad_tol(self):
        with pytest.raises(DomainError):
            solve_T(LimitPoint(0.2, 0.3, 0.3), tol=0.0)


class TestSolveTGrid:
    def test_residual_on_simplex_grid(self):
        # 50 x 50 x 50 grid restricted to the simplex with y >= 1e-3
        g = np.linspace(0.0, 1.0, 50)
        X, Y, Z = np.meshgrid(g, np.linspace(1e-3, 1.0, 50), g, indexing="ij")
        mask = X + Y + Z <= 1.0
        xs, ys, zs = X[mask], Y[mask], Z[mask]
        T = solve_T_grid(xs, ys, zs, tol=1e-13)
        residual = np.abs(xs * (1 - np.exp(-T)) + ys * T - zs)
        assert residual.max() <= 1e-12

    def test_matches_scalar(self):
        rng = np.random.default_rng(1)
        xs = rng.uniform(0, 0.4, 100)
        ys = rng.uniform(1e-3, 0.3, 100)
        zs = rng.uniform(0, 0.29, 100)
        T = solve_T_grid(xs, ys, zs)
        for i in range(100):
            assert T[i] == pytest.approx(
                solve_T(LimitPoint(xs[i], ys[i], zs[i])), abs=1e-11
            )

    def test_rejects_zero_y(self):
        with pytest.raises(DomainError):
            solve_T_grid(np.array([0.1]), np.array([0.0]), np.array([0.1]))


class TestEvalLimit:
    def test_closed_form_at_zero_x(self):
        ev = eval_limit(LimitPoint(0.0, 0.5, 0.25))
        assert ev.T == pytest.approx(0.5, abs=1e-13)
        assert ev.u == pytest.approx(math.exp(-0.5), abs=1e-13)
        assert ev.grad_T[2] == pytest.approx(2.0, abs=1e-12)

    def test_zero_z(self):
        ev = eval_limit(LimitPoint(0.3, 0.4, 0.0))
        assert ev.u == 1.0
        assert ev.v == 0.0
        assert ev.grad_T[0] == 0.0
        assert ev.grad_T[2] == pytest.approx(1.0 / 0.7, abs=1e-13)

    def test_u_v_relations(self):
        ev = eval_limit(LimitPoint(0.2, 0.3, 0.3))
        assert ev.u == math.exp(-ev.T)
        assert ev.v == 1.0 - ev.u
        for i in range(3):
            assert ev.grad_u[i] == -ev.u * ev.grad_T[i]
            assert ev.grad_v[i] == -ev.grad_u[i]

    def test_gradient_matches_central_differences(self):
        h = 1e-6
        p = (0.2, 0.3, 0.3)
        ev = eval_limit(LimitPoint(*p))
        for i in range(3):
            up, dn = list(p), list(p)
            up[i] += h
            dn[i] -= h
            fd = (solve_T(LimitPoint(*up)) - solve_T(LimitPoint(*dn))) / (2 * h)
            assert abs(fd - ev.grad_T[i]) <= 1e-6 * abs(ev.grad_T[i])

    @settings(deadline=None, max_examples=60)
    @given(p=omega_points)
    def test_gradient_fd_property(self, p):
        x, y, z = p
        h = 1e-6
        if y <= 2 * h or x + y + z > 1 - 2 * h:
            return
        ev = eval_limit(LimitPoint(x, y, z))
        coords = (x, y, z)
        for i in range(3):
            if coords[i] < 2 * h:
                continue
            up, dn = list(coords), list(coords)
            up[i] += h
            dn[i] -= h
            fd_T = (solve_T(LimitPoint(*up)) - solve_T(LimitPoint(*dn))) / (2 * h)
            scale = max(abs(ev.grad_T[i]), 1e-3)
            assert abs(fd_T - ev.grad_T[i]) <= 1e-5 * scale


class TestUTilde:
    def test_equals_u_squared(self):
        for p in [(0.2, 0.3, 0.3), (0.1, 0.8, 0.05), (0.0, 0.5, 0.25)]:
            pt = LimitPoint(*p)
            assert eval_u_tilde(pt) == eval_limit(pt).u ** 2

    def test_zero_z(self):
        assert eval_u_tilde(LimitPoint(0.4, 0.4, 0.0)) == 1.0

    def test_zero_x_closed_form(self):
        assert eval_u_tilde(LimitPoint(0.0, 0.5, 0.2)) == pytest.approx(
            math.exp(-2 * 0.2 / 0.5), abs=1e-12
        )


class TestRegions:
    def test_region_predicates(self):
        p = LimitPoint(0.4, 0.3, 0.1)
        assert p.in_region_y(0.25)
        assert not p.in_region_y(0.35)
        # z <= s(x+y) and x-z >= (1-s)/(2+2s) at s = 0.5: 0.1 <= 0.35, 0.3 >= 1/6
        assert p.in_region_s(0.5)
        assert not LimitPoint(0.1, 0.3, 0.3).in_region_s(0.5)

    def test_t_bound_on_y_region(self):
        y0 = 0.2
        g = np.linspace(0, 1, 30)
        for x in g:
            for y in np.linspace(y0, 1, 30):
                for z in g:
                    if x + y + z > 1:
                        continue
                    T = solve_T(LimitPoint(x, y, z))
                    assert T <= 1 / y0 + 1e-9

    def test_t_and_denominator_bounds_on_s_region(self):
        s = 0.5
        cap = math.log(1 / (1 - s))
        denom_floor = (1 - s) ** 2 / (2 + 2 * s)
        g = np.linspace(0, 1, 40)
        checked = 0
        for x in g:
            for y in np.linspace(1e-3, 1, 40):
                for z in g:
                    p0 = (x, y, z)
                    if x + y + z > 1 or not LimitPoint(*p0).in_region_s(s):
                        continue
                    T = solve_T(LimitPoint(*p0))
                    assert T <= cap + 1e-9, p0
                    assert x * math.exp(-T) + y >= denom_floor - 1e-9, p0
                    checked += 1
        assert checked > 500


class TestVs:
    def test_frozen_values(self):
        ve = eval_vs(0.5, 0.5)
        assert ve.v_s == pytest.approx(VS_FROZEN, abs=1e-12)
        assert ve.v_s_prime == pytest.approx(VSP_FROZEN, abs=1e-9)
        assert ve.v_s_second == pytest.approx(VSS_FROZEN, abs=1e-9)

    def test_left_endpoint(self):
        for s in (0.1, 0.5, 1.0, 2.0):
            assert eval_vs(s, 0.0).v_s == pytest.approx(1 - math.exp(-s), abs=1e-13)

    def test_right_endpoint_continuity(self):
        assert eval_vs(0.5, 1.0).v_s == 0.5
        assert eval_vs(2.0, 1.0).v_s == 1.0
        near = eval_vs(0.5, 1 - 1e-9).v_s
        assert abs(near - 0.5) < 1e-6

    def test_implicit_relation_on_grid(self):
        # the log term amplifies eps-level errors in v by (1-x)/(1-v), so
        # check only where the relation is conditioned well enough to resolve
        xs = np.linspace(0.0, 0.995, 400)
        for s in np.arange(0.1, 2.01, 0.1):
            v = vs_grid(float(s), xs, tol=1e-13)
            ok = 1.0 - v >= 1e-7
            if s <= 0.9:
                assert ok.all()
            residual = np.abs(xs[ok] * v[ok] - (1 - xs[ok]) * np.log1p(-v[ok]) - s)
            assert residual.max() <= 1e-10, s

    def test_prime_positive_on_half_open_interval(self):
        # for s > 1 the value saturates to 1.0 once 1 - v < eps, killing the
        # slope, so keep x where the gap is still representable
        for s, x_hi in ((0.3, 0.9999), (0.9, 0.9999), (1.5, 0.98)):
            for x in np.linspace(0, x_hi, 200):
                assert eval_vs(s, float(x)).v_s_prime > 0.0, (s, x)

    def test_prime_matches_central_differences(self):
        h = 1e-6
        for s in (0.2, 0.7, 1.3):
            for x in (0.1, 0.5, 0.9):
                ve = eval_vs(s, x)
                fd = (eval_vs(s, x + h).v_s - eval_vs(s, x - h).v_s) / (2 * h)
                assert abs(fd - ve.v_s_prime) <= 1e-5 * abs(ve.v_s_prime)

    def test_second_matches_central_differences(self):
        h = 1e-4  # second difference loses eps/h^2, keep h moderate
        for s in (0.2, 0.7):
            for x in (0.2, 0.5, 0.8):
                ve = eval_vs(s, x)
                fd = (
                    eval_vs(s, x + h).v_s - 2 * eval_vs(s, x).v_s + eval_vs(s, x - h).v_s
                ) / h**2
                assert abs(fd - ve.v_s_second) <= 1e-4 * max(abs(ve.v_s_second), 1.0)

    def test_edge_prime_identity(self):
        # differentiate the implicit relation at x = 1 (s < 1): v'(1) = -s - log(1-s)
        for s in (0.3, 0.5, 0.8):
            assert eval_vs(s, 1.0).v_s_prime == pytest.approx(
                -s - math.log(1 - s), rel=1e-5
            )

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            eval_vs(0.0, 0.5)
        with pytest.raises(DomainError):
            eval_vs(-1.0, 0.5)
        with pytest.raises(DomainError):
            eval_vs(0.5, 1.2)
        with pytest.raises(DomainError):
            eval_vs(0.5, -0.1)


class TestPropVsBounds:
    S_GRID = np.arange(0.1, 0.91, 0.1)

    def _curve(self, s, xs):
        v = vs_grid(s, xs)
        prime = ((1 - v) / (1 - xs * v)) * ((s - v) / (1 - xs))
        second = prime * (-2 * xs * v * v + 3 * v - s) / (1 - xs * v) ** 2
        return v, prime, second

    def test_value_bounds_all_s(self):
        xs = np.linspace(0, 1, 1000)
        xs_strict = np.linspace(0, 0.97, 500)
        for s in (0.1, 0.5, 0.9, 1.0, 1.7):
            v = vs_grid(s, xs)
            assert np.all(v >= 1 - math.exp(-s) - 1e-12)
            assert np.all(v <= min(s, 1.0) + 1e-12)
            # strict away from x = 1 (the gap underflows there for s > 1)
            assert np.all(vs_grid(s, xs_strict) < min(s, 1.0))

    def test_prime_bounds_small_s(self):
        xs = np.linspace(0, 1 - 1e-4, 10_000)
        for s in self.S_GRID:
            s = float(s)
            _, prime, _ = self._curve(s, xs)
            lo = (1 - s) * (math.exp(-s) + s - 1)
            hi = math.exp(-s) * (-s - math.log(1 - s)) / (1 - s)
            assert prime.min() >= lo - 1e-9, s
            assert prime.max() <= hi + 1e-9, s
            edge = eval_vs(s, 1.0).v_s_prime
            assert lo - 1e-6 <= edge <= hi + 1e-6, s

    def test_second_bounds_small_s(self):
        xs = np.linspace(0, 1 - 1e-4, 10_000)
        for s in self.S_GRID:
            s = float(s)
            _, _, second = self._curve(s, xs)
            lo = s * (1 - s) ** 2 * (math.exp(-s) + s - 1)
            hi = 2 * s * math.exp(-s) * (-s - math.log(1 - s)) / (1 - s) ** 3
            assert second.min() >= lo - 1e-9, s
            assert second.max() <= hi + 1e-9, s
            edge = eval_vs(s, 1.0).v_s_second
            assert lo - 1e-5 <= edge <= hi + 1e-5, s


class TestDiffusionCoeffs:
    def test_boundary_zeros(self):
        assert diffusion_coeffs(0.5, 0.0, 2.0) == DiffusionCoeffs(0.0, 0.0)
        assert diffusion_coeffs(0.5, 1.0, -3.0) == DiffusionCoeffs(0.0, 0.0)

    def test_neutral_drift_is_negative_inside(self):
        for x in np.linspace(0.05, 0.95, 19):
            c = diffusion_coeffs(0.5, float(x), 0.0)
            assert c.b < 0.0

    def test_variance_exceeds_classical(self):
        for x in np.linspace(0.05, 0.95, 19):
            c = diffusion_coeffs(0.5, float(x), 1.0)
            assert c.a > x * (1 - x)

    def test_formulas(self):
        s, x, beta = 0.7, 0.3, 1.5
        ve = eval_vs(s, x)
        c = diffusion_coeffs(s, x, beta)
        assert c.a == pytest.approx(x * (1 - x) / ve.v_s, rel=1e-12)
        assert c.b == pytest.approx(
            x * (1 - x) * (beta - ve.v_s_prime / ve.v_s**2), rel=1e-12
        )

    def test_rejects_bad_beta(self):
        with pytest.raises(DomainError):
            diffusion_coeffs(0.5, 0.5, float("nan"))
