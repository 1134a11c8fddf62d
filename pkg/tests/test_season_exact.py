"""Tests for exact single-season probabilities.

The enumeration oracle (exact rationals over all ordered draw sequences) is
the ground truth here.  Every frozen constant below was computed with it and
checked by hand where small enough; the DP path is then cross-validated
against the oracle over the full small grid.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from urnwf.errors import CoverageError, DomainError, InfeasibleSizeError
from urnwf.season_exact import (
    QTable,
    UrnState,
    enumerate_oracle,
    exact_q,
    exact_q_tilde,
    finite_diffs,
    p_black,
    p_white,
    pair_probs,
    repro_probs,
    season_moments_exact,
)

SMALL_GRID = [
    (w, b, f)
    for w in range(7)
    for b in range(7)
    for f in range(7)
    if w + b + f <= 8
]

counts = st.integers(min_value=0, max_value=12)
draws = st.integers(min_value=0, max_value=14)


def q(w, b, f):
    return exact_q(UrnState(w, b, f))


def qt(w, b, f):
    return exact_q_tilde(UrnState(w, b, f))


# ---------------------------------------------------------------------------
# Frozen values (oracle-computed)
# ---------------------------------------------------------------------------


class TestFrozenAvoidance:
    def test_q_1_1_1(self):
        assert abs(q(1, 1, 1) - 2 / 3) < 1e-15

    def test_q_1_1_2(self):
        assert abs(q(1, 1, 2) - 7 / 18) < 1e-15

    def test_q_no_whites_closed_form(self):
        # only blacks: each draw misses the tag with probability b/(b+1)
        for b in range(6):
            for f in range(6):
                assert abs(q(0, b, f) - (b / (b + 1)) ** f) < 1e-15

    def test_q_tag_alone_is_drawn_immediately(self):
        assert q(0, 0, 1) == 0.0
        assert q(0, 0, 3) == 0.0

    def test_q_single_white_two_draws(self):
        # draw 1 removes either ball; draw 2 finishes the tag if it survives
        assert q(1, 0, 2) == 0.0

    def test_qtilde_0_1_1(self):
        assert abs(qt(0, 1, 1) - 1 / 3) < 1e-15

    def test_qtilde_1_1_1(self):
        assert abs(qt(1, 1, 1) - 1 / 2) < 1e-15

    def test_zero_draw_layer_is_one(self):
        for w in range(4):
            for b in range(4):
                assert q(w, b, 0) == 1.0
                assert qt(w, b, 0) == 1.0


class TestFrozenOracle:
    def test_q_values_exact(self):
        assert enumerate_oracle(UrnState(1, 1, 1)).q == Fraction(2, 3)
        assert enumerate_oracle(UrnState(1, 1, 2)).q == Fraction(7, 18)

    def test_qtilde_values_exact(self):
        assert enumerate_oracle(UrnState(0, 1, 1)).q_tilde == Fraction(1, 3)
        assert enumerate_oracle(UrnState(1, 1, 1)).q_tilde == Fraction(1, 2)

    def test_repro_1_1_2(self):
        o = enumerate_oracle(UrnState(1, 1, 2))
        assert o.p_w == Fraction(3, 4)
        assert o.p_b == 1

    def test_pmf_sums_to_one(self):
        o = enumerate_oracle(UrnState(2, 2, 3))
        assert sum(o.joint_pmf.values()) == 1

    def test_refuses_large_instances(self):
        with pytest.raises(InfeasibleSizeError):
            enumerate_oracle(UrnState(5, 5, 5))

    def test_bound_is_configurable(self):
        o = enumerate_oracle(UrnState(5, 5, 5), max_total=15)
        assert 0 < float(o.q) < 1


class TestFrozenRepro:
    def test_repro_1_1_1(self):
        r = repro_probs(UrnState(1, 1, 1))
        assert abs(r.p_w - 1 / 2) < 1e-15
        assert abs(r.p_b - 1 / 2) < 1e-15

    def test_repro_1_1_2(self):
        r = repro_probs(UrnState(1, 1, 2))
        assert abs(r.p_w - 3 / 4) < 1e-15
        assert r.p_b == 1.0

    def test_scalar_accessors(self):
        st_ = UrnState(1, 1, 2)
        assert p_white(st_) == repro_probs(st_).p_w
        assert p_black(st_) == repro_probs(st_).p_b

    def test_no_draws_no_marks(self):
        r = repro_probs(UrnState(3, 3, 0))
        assert r.p_w == 0.0
        assert r.p_b == 0.0


class TestFrozenPairs:
    def test_p_ww_2_0_1(self):
        # one draw cannot mark two balls
        assert pair_probs(UrnState(2, 0, 1)).p_ww == 0.0

    def test_p_ww_2_0_2(self):
        # two draws from two whites mark both with certainty
        assert pair_probs(UrnState(2, 0, 2)).p_ww == 1.0

    def test_p_wb_1_1_2(self):
        assert abs(pair_probs(UrnState(1, 1, 2)).p_wb - 3 / 4) < 1e-15

    def test_no_draws(self):
        p = pair_probs(UrnState(2, 2, 0))
        assert (p.p_ww, p.p_wb, p.p_bb) == (0.0, 0.0, 0.0)

    def test_undefined_components_are_none(self):
        p = pair_probs(UrnState(1, 1, 2))
        assert p.p_ww is None
        assert p.p_bb is None
        assert p.p_wb is not None
        p = pair_probs(UrnState(0, 2, 1))
        assert p.p_wb is None
        assert p.p_bb is not None


class TestFrozenMoments:
    def test_moments_1_1_2(self):
        m = season_moments_exact(UrnState(1, 1, 2))
        assert abs(m.mean_X - 3 / 4) < 1e-15
        assert m.mean_Y == 1.0
        assert abs(m.var_X - 3 / 16) < 1e-15
        assert m.var_Y == 0.0
        assert m.cov_XY == 0.0

    def test_no_draws_all_zero(self):
        m = season_moments_exact(UrnState(4, 5, 0))
        assert (m.mean_X, m.mean_Y, m.var_X, m.var_Y, m.cov_XY) == (0, 0, 0, 0, 0)


class TestFiniteDiffs:
    def test_zero_draw_layer_is_flat(self):
        t = QTable.build("q", max_w=4, max_b=4, max_f=0)
        assert finite_diffs(t, UrnState(2, 2, 0)) == (0.0, 0.0)

    def test_both_diffs_at_0_1_1(self):
        t = QTable.build("q", max_w=4, max_b=4, max_f=1)
        dx, dy = finite_diffs(t, UrnState(0, 1, 1))
        assert abs(dx - 1 / 6) < 1e-15
        assert abs(dy - 1 / 6) < 1e-15

    def test_matches_direct_differences(self):
        t = QTable.build("q", max_w=6, max_b=6, max_f=4)
        dx, dy = finite_diffs(t, UrnState(3, 3, 4))
        assert abs(dx - (q(4, 3, 4) - q(3, 3, 4))) < 1e-15
        assert abs(dy - (q(3, 4, 4) - q(3, 3, 4))) < 1e-15

    def test_uncovered_shift_raises(self):
        t = QTable.build("q", max_w=4, max_b=4, max_f=2)
        with pytest.raises(CoverageError):
            finite_diffs(t, UrnState(4, 2, 2))


# ---------------------------------------------------------------------------
# Oracle equivalence on the full small grid
# ---------------------------------------------------------------------------


class TestOracleEquivalence:
    def test_all_ops_agree_with_oracle(self):
        for w, b, f in SMALL_GRID:
            state = UrnState(w, b, f)
            o = enumerate_oracle(state)
            assert abs(q(w, b, f) - float(o.q)) < 1e-12, (w, b, f)
            assert abs(qt(w, b, f) - float(o.q_tilde)) < 1e-12, (w, b, f)
            r = repro_probs(state)
            if o.p_w is not None:
                assert abs(r.p_w - float(o.p_w)) < 1e-12, (w, b, f)
            if o.p_b is not None:
                assert abs(r.p_b - float(o.p_b)) < 1e-12, (w, b, f)
            p = pair_probs(state)
            for got, want in ((p.p_ww, o.p_ww), (p.p_wb, o.p_wb), (p.p_bb, o.p_bb)):
                if want is not None:
                    assert got is not None and abs(got - float(want)) < 1e-12, (w, b, f)
            m, om = season_moments_exact(state), o.moments()
            for field in ("mean_X", "mean_Y", "var_X", "var_Y", "cov_XY"):
                assert abs(getattr(m, field) - getattr(om, field)) < 1e-12, (w, b, f, field)


# ---------------------------------------------------------------------------
# QTable mechanics
# ---------------------------------------------------------------------------


class TestQTable:
    def test_guard_row_is_zero(self):
        t = QTable.build("q", max_w=3, max_b=3, max_f=2)
        for b in range(4):
            assert t.value(-1, b) == 0.0

    def test_matches_scalar_dp(self):
        t = QTable.build("qtilde", max_w=8, max_b=8, max_f=5)
        for w in range(9):
            for b in range(9):
                assert abs(t.value(w, b) - qt(w, b, 5)) < 1e-15

    def test_rolling_keeps_two_layers(self):
        t = QTable.build("q", max_w=5, max_b=5, max_f=3)
        assert t.f_current == 3
        assert t.value(2, 2, 3) == q(2, 2, 3)
        assert t.value(2, 2, 2) == q(2, 2, 2)
        with pytest.raises(CoverageError):
            t.value(2, 2, 1)

    def test_keep_all_retains_every_layer(self):
        t = QTable.build("q", max_w=5, max_b=5, max_f=4, keep_all=True)
        for f in range(5):
            assert t.value(1, 2, f) == q(1, 2, f)

    def test_advance_is_incremental(self):
        t = QTable(kind="q", max_w=4, max_b=4)
        t.advance(2)
        t.advance(5)
        assert abs(t.value(2, 2) - q(2, 2, 5)) < 1e-15

    def test_cannot_roll_back(self):
        t = QTable.build("q", max_w=3, max_b=3, max_f=3)
        with pytest.raises(DomainError):
            t.advance(1)

    def test_out_of_range_lookups(self):
        t = QTable.build("q", max_w=3, max_b=3, max_f=1)
        with pytest.raises(CoverageError):
            t.value(4, 0)
        with pytest.raises(CoverageError):
            t.value(0, 4)
        with pytest.raises(CoverageError):
            t.value(-2, 0)

    def test_bad_kind(self):
        with pytest.raises(DomainError):
            QTable(kind="qq", max_w=2, max_b=2)

    def test_layer_views_are_readonly(self):
        t = QTable.build("q", max_w=3, max_b=3, max_f=1)
        layer = t.current_layer
        assert layer.shape == (4, 4)
        with pytest.raises(ValueError):
            layer[0, 0] = 0.5


# ---------------------------------------------------------------------------
# Domain errors and state validation
# ---------------------------------------------------------------------------


class TestValidation:
    def test_negative_counts_rejected(self):
        with pytest.raises(DomainError):
            UrnState(-1, 2, 3)
        with pytest.raises(DomainError):
            UrnState(1, -2, 3)
        with pytest.raises(DomainError):
            UrnState(1, 2, -3)

    def test_non_integer_counts_rejected(self):
        with pytest.raises(DomainError):
            UrnState(1.5, 2, 3)

    def test_scale(self):
        assert UrnState(2, 3, 4).scale == 9

    def test_p_white_requires_a_white(self):
        with pytest.raises(DomainError):
            p_white(UrnState(0, 3, 2))

    def test_p_black_requires_a_black(self):
        with pytest.raises(DomainError):
            p_black(UrnState(3, 0, 2))


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------


class TestProperties:
    @settings(deadline=None, max_examples=80)
    @given(w=counts, b=counts, f=draws)
    def test_avoidance_in_unit_interval(self, w, b, f):
        val = q(w, b, f)
        val2 = qt(w, b, f)
        assert 0.0 <= val <= 1.0
        assert 0.0 <= val2 <= 1.0

    @settings(deadline=None, max_examples=80)
    @given(w=counts, b=counts, f=st.integers(min_value=1, max_value=14))
    def test_avoidance_nonincreasing_in_draws(self, w, b, f):
        assert q(w, b, f) <= q(w, b, f - 1) + 1e-15

    @settings(deadline=None, max_examples=80)
    @given(w=counts, b=counts, f=draws)
    def test_two_tags_harder_than_one(self, w, b, f):
        # observed ordering: two extra balls both surviving is less likely
        assert qt(w, b, f) <= q(w, b, f) + 1e-15

    @settings(deadline=None, max_examples=80)
    @given(
        w=st.integers(min_value=1, max_value=12),
        b=st.integers(min_value=1, max_value=12),
        f=draws,
    )
    def test_black_reproduces_at_least_as_often(self, w, b, f):
        r = repro_probs(UrnState(w, b, f))
        assert r.p_b >= r.p_w - 1e-15
        if f >= 2:
            assert r.p_b > r.p_w

    @settings(deadline=None, max_examples=60)
    @given(w=counts, b=counts, f=draws)
    def test_mean_identities(self, w, b, f):
        state = UrnState(w, b, f)
        m = season_moments_exact(state)
        r = repro_probs(state)
        assert m.mean_X == (w * r.p_w if w else 0.0)
        assert m.mean_Y == (b * r.p_b if b else 0.0)

    @settings(deadline=None, max_examples=60)
    @given(w=counts, b=counts, f=draws)
    def test_moment_sanity(self, w, b, f):
        m = season_moments_exact(UrnState(w, b, f))
        assert m.var_X >= 0.0
        assert m.var_Y >= 0.0
        assert m.cov_XY**2 <= m.var_X * m.var_Y + 1e-12

    @settings(deadline=None, max_examples=40)
    @given(
        w=st.integers(min_value=0, max_value=10),
        b=st.integers(min_value=0, max_value=10),
        f=st.integers(min_value=0, max_value=8),
    )
    def test_slab_matches_scalar_dp(self, w, b, f):
        t = QTable.build("q", max_w=10, max_b=10, max_f=f)
        assert abs(t.value(w, b) - q(w, b, f)) < 1e-15
