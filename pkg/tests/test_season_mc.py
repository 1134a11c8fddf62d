"""Tests for the seeded season simulator and the two-urn coupling.

Statistical checks are seeded, so every run sees the same draws; margins are
4 standard errors unless a tighter one is part of the contract.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from urnwf.errors import DegenerateUrnError, DomainError
from urnwf.season_exact import UrnState, exact_q, repro_probs, season_moments_exact
from urnwf.season_mc import (
    THIRD_MOMENT_COEFF,
    EstimateWithError,
    RngStream,
    SeasonOutcome,
    estimate_probs,
    simulate_coupled_batch,
    simulate_coupled_urns,
    simulate_season,
    simulate_seasons,
    tail_check,
    third_moment_check,
)

SMALL_POSITIVE_GRID = [
    (w, b, f)
    for w in range(1, 7)
    for b in range(1, 7)
    for f in range(0, 7)
    if w + b + f <= 8
]


class TestDeterminism:
    def test_identical_streams_identical_outcomes(self):
        state = UrnState(8, 8, 12)
        a = simulate_season(state, RngStream(123, 5))
        b = simulate_season(state, RngStream(123, 5))
        assert a == b

    def test_distinct_streams_differ(self):
        state = UrnState(20, 20, 30)
        xs0, _ = simulate_seasons(state, RngStream(123, 0), 50)
        xs1, _ = simulate_seasons(state, RngStream(123, 1), 50)
        assert not np.array_equal(xs0, xs1)

    def test_scalar_equals_batch_replica(self):
        state = UrnState(6, 6, 9)
        rng = RngStream(77)
        xs, ys = simulate_seasons(state, rng, 6)
        for r in range(6):
            out = simulate_season(state, rng, replica=r)
            assert (out.x_count, out.y_count) == (int(xs[r]), int(ys[r]))

    def test_generator_reproducible(self):
        g1 = RngStream(9, 2).generator()
        g2 = RngStream(9, 2).generator()
        assert np.array_equal(g1.integers(0, 100, 10), g2.integers(0, 100, 10))
        g3 = RngStream(9, 3).generator()
        assert not np.array_equal(g1.integers(0, 100, 10), g3.integers(0, 100, 10))


class TestSeasonBasics:
    def test_no_draws(self):
        assert simulate_season(UrnState(4, 4, 0), RngStream(1)) == SeasonOutcome(0, 0)

    def test_no_whites(self):
        out = simulate_season(UrnState(0, 5, 7), RngStream(2))
        assert out.x_count == 0
        assert 1 <= out.y_count <= 5

    def test_empty_urn_rejected(self):
        with pytest.raises(DegenerateUrnError):
            simulate_season(UrnState(0, 0, 3), RngStream(1))
        assert simulate_season(UrnState(0, 0, 0), RngStream(1)) == SeasonOutcome(0, 0)

    def test_bad_reps(self):
        with pytest.raises(DomainError):
            simulate_seasons(UrnState(2, 2, 2), RngStream(1), 0)

    @settings(deadline=None, max_examples=50)
    @given(
        w=st.integers(min_value=0, max_value=15),
        b=st.integers(min_value=0, max_value=15),
        f=st.integers(min_value=0, max_value=20),
        seed=st.integers(min_value=0, max_value=2**63),
    )
    def test_outcome_bounds(self, w, b, f, seed):
        if w + b == 0 and f > 0:
            return
        state = UrnState(w, b, f)
        xs, ys = simulate_seasons(state, RngStream(seed), 40)
        assert np.all((xs >= 0) & (xs <= min(w, f)))
        assert np.all((ys >= 0) & (ys <= min(b, f)))
        assert np.all(xs + ys <= f)
        if w + b >= 1 and f >= 1:
            assert np.all(xs + ys >= 1)


class TestSeasonLaw:
    def test_mean_x_matches_exact(self):
        state = UrnState(10, 10, 10)
        xs, ys = simulate_seasons(state, RngStream(42), 100_000)
        m = season_moments_exact(state)
        for emp, mean, var in ((xs, m.mean_X, m.var_X), (ys, m.mean_Y, m.var_Y)):
            se = math.sqrt(var / emp.size)
            assert abs(emp.mean() - mean) <= 3 * se

    def test_variance_and_covariance_match_exact(self):
        state = UrnState(10, 10, 10)
        xs, ys = simulate_seasons(state, RngStream(42), 100_000)
        m = season_moments_exact(state)
        assert abs(xs.var(ddof=1) - m.var_X) / m.var_X < 0.05
        assert abs(np.cov(xs, ys)[0, 1] - m.cov_XY) / abs(m.cov_XY) < 0.05


class TestEstimateProbs:
    def test_consistency_on_small_grid(self):
        # every state on the small grid, 4-standard-error margin
        exact_zero_se = 0
        for w, b, f in SMALL_POSITIVE_GRID:
            state = UrnState(w, b, f)
            pw_hat, pb_hat = estimate_probs(state, 100_000, seed=1000 + w * 64 + b * 8 + f)
            r = repro_probs(state)
            for est, exact in ((pw_hat, r.p_w), (pb_hat, r.p_b)):
                if est.std_error == 0.0:
                    assert est.value == exact
                    exact_zero_se += 1
                else:
                    assert abs(est.value - exact) <= 4 * est.std_error, (w, b, f)
        assert exact_zero_se > 0  # the grid does contain degenerate cases

    def test_degenerate_case_is_exact(self):
        _, pb_hat = estimate_probs(UrnState(1, 1, 2), 50_000, seed=3)
        assert pb_hat == EstimateWithError(value=1.0, std_error=0.0, n_samples=50_000)

    def test_se_bernoulli_bound(self):
        pw_hat, pb_hat = estimate_probs(UrnState(5, 5, 5), 10_000, seed=7)
        bound = 0.5 / math.sqrt(10_000)
        for est in (pw_hat, pb_hat):
            assert 0.0 <= est.value <= 1.0
            assert est.std_error <= bound * 1.01

    def test_needs_both_colors(self):
        with pytest.raises(DomainError):
            estimate_probs(UrnState(0, 5, 5), 10, seed=1)


class TestCoupling:
    def test_forbidden_outcome_never_occurs(self):
        # hard invariant, not a statistical test
        for w, b, f, seed in [(5, 5, 8, 1), (2, 7, 4, 2), (7, 2, 12, 3), (1, 1, 1, 4)]:
            red1, red2 = simulate_coupled_batch(UrnState(w, b, f), RngStream(seed), 100_000)
            assert int(np.sum(~red1 & red2)) == 0

    def test_marginals_match_exact(self):
        reps = 200_000
        for w, b, f in [(5, 5, 8), (2, 7, 4), (7, 2, 12)]:
            red1, red2 = simulate_coupled_batch(UrnState(w, b, f), RngStream(10), reps)
            # urn 1: w whites, b-1 blacks, one tag; urn 2 recolors one white
            e1 = 1 - exact_q(UrnState(w, b - 1, f))
            e2 = 1 - exact_q(UrnState(w - 1, b, f))
            for emp, exact in ((red1.mean(), e1), (red2.mean(), e2)):
                se = math.sqrt(exact * (1 - exact) / reps)
                assert abs(emp - exact) <= 4 * se, (w, b, f)

    def test_no_draws(self):
        assert simulate_coupled_urns(UrnState(3, 3, 0), RngStream(5)) == (False, False)

    def test_scalar_equals_batch_replica(self):
        state = UrnState(4, 3, 6)
        red1, red2 = simulate_coupled_batch(state, RngStream(8), 5)
        for r in range(5):
            pair = simulate_coupled_urns(state, RngStream(8), replica=r)
            assert pair == (bool(red1[r]), bool(red2[r]))

    def test_needs_both_colors(self):
        with pytest.raises(DomainError):
            simulate_coupled_urns(UrnState(0, 2, 1), RngStream(1))
        with pytest.raises(DomainError):
            simulate_coupled_urns(UrnState(2, 0, 1), RngStream(1))

    def test_determinism(self):
        state = UrnState(6, 4, 10)
        assert simulate_coupled_urns(state, RngStream(31)) == simulate_coupled_urns(
            state, RngStream(31)
        )


class TestTailCheck:
    def test_rows_at_reference_state(self):
        rows = tail_check(UrnState(100, 100, 100), 20_000, [0.0, 10.0, 40.0, 250.0], seed=5)
        assert len(rows) == 8
        by_key = {(r.which, r.threshold): r for r in rows}
        assert by_key[("x", 0.0)].bound == 1.0
        assert by_key[("x", 0.0)].empirical == 1.0
        assert not by_key[("x", 0.0)].violation
        # |X - E X| <= 100 makes the largest threshold unreachable
        assert by_key[("x", 250.0)].empirical == 0.0
        assert by_key[("x", 40.0)].empirical <= math.exp(-4.0)
        assert not any(r.violation for r in rows)

    def test_bound_formula(self):
        rows = tail_check(UrnState(25, 50, 10), 1_000, [5.0], seed=2)
        by_key = {(r.which, r.threshold): r for r in rows}
        assert by_key[("x", 5.0)].bound == pytest.approx(math.exp(-25 / 100))
        assert by_key[("y", 5.0)].bound == pytest.approx(math.exp(-25 / 200))

    def test_zero_count_side(self):
        rows = tail_check(UrnState(0, 5, 5), 500, [0.0, 1.0], seed=3)
        by_key = {(r.which, r.threshold): r for r in rows}
        assert by_key[("x", 1.0)].empirical == 0.0
        assert by_key[("x", 1.0)].bound == 0.0
        assert not by_key[("x", 1.0)].violation

    def test_negative_threshold_rejected(self):
        with pytest.raises(DomainError):
            tail_check(UrnState(5, 5, 5), 100, [-1.0], seed=1)


class TestThirdMoment:
    def test_no_draws_zero(self):
        rows = third_moment_check(UrnState(10, 10, 0), 200, seed=1)
        assert all(r.empirical == 0.0 for r in rows)
        assert not any(r.violation for r in rows)

    def test_reference_state_within_bound(self):
        rows = third_moment_check(UrnState(100, 100, 100), 20_000, seed=5)
        assert len(rows) == 2
        for r in rows:
            assert r.bound == pytest.approx(THIRD_MOMENT_COEFF * 100**1.5)
            assert r.empirical <= r.bound
            assert not r.violation

    def test_bound_scales_as_n_three_halves(self):
        big = third_moment_check(UrnState(400, 10, 5), 100, seed=1)[0]
        small = third_moment_check(UrnState(100, 10, 5), 100, seed=1)[0]
        assert big.bound == pytest.approx(8 * small.bound)
