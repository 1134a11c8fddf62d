"""Exact single-season urn probabilities.

One reproductive season draws f times from an urn holding w white and b black
balls.  A drawn white ball is marked and removed; a drawn black ball is marked
(the first time only) and returned.  After the season, X counts marked whites
and Y marked blacks.

Two families of quantities live here:

  - avoidance probabilities: q(w, b, f) is the probability that one tagged
    extra ball added to the urn is never drawn in f draws, and qtilde(w, b, f)
    the same for two tagged extra balls.  Per-ball reproduction probabilities
    reduce to these: a given white ball in a (w, b) urn reproduces with
    probability p_w = 1 - q(w-1, b, f), a given black with
    p_b = 1 - q(w, b-1, f), and pair probabilities reduce to qtilde.
  - exact mean/variance/covariance of (X, Y), assembled from the single and
    pair probabilities.

Routes are deliberately redundant: exact_q and exact_q_tilde run the one-step
dynamic program in floating point, while enumerate_oracle walks every ordered
draw sequence of a small urn with exact rational arithmetic and tracks
designated balls directly, never using the reduction identities.  The test
suite pins the two routes against each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from ._kernels import dp_advance_layer
from .errors import CoverageError, DomainError, InfeasibleSizeError

__all__ = [
    "ORACLE_DEFAULT_BOUND",
    "UrnState",
    "QTable",
    "ReproProbs",
    "PairProbs",
    "SeasonMoments",
    "OracleResult",
    "exact_q",
    "exact_q_tilde",
    "repro_probs",
    "p_white",
    "p_black",
    "pair_probs",
    "finite_diffs",
    "season_moments_exact",
    "enumerate_oracle",
]

# Largest w + b + f the exhaustive enumerator accepts by default.
ORACLE_DEFAULT_BOUND = 10


@dataclass(frozen=True)
class UrnState:
    """Urn coordinates: w white balls, b black balls, f draws.

    All fields are nonnegative integers.  The sum w + b + f is the
    discretization scale used by the convergence harness.
    """

    w: int
    b: int
    f: int

    def __post_init__(self) -> None:
        for name in ("w", "b", "f"):
            value = getattr(self, name)
            if value != int(value):
                raise DomainError(f"{name} must be an integer, got {value!r}")
            if value < 0:
                raise DomainError(f"{name} must be nonnegative, got {value!r}")
            object.__setattr__(self, name, int(value))

    @property
    def scale(self) -> int:
        """Discretization scale N = w + b + f."""
        return self.w + self.b + self.f


class ReproProbs(NamedTuple):
    """Per-ball reproduction probabilities; a component is None when the
    corresponding color is absent from the urn."""

    p_w: Optional[float]
    p_b: Optional[float]


class PairProbs(NamedTuple):
    """Probabilities that two given distinct balls are both marked; a
    component is None when the urn lacks the balls it refers to."""

    p_ww: Optional[float]
    p_wb: Optional[float]
    p_bb: Optional[float]


@dataclass(frozen=True)
class SeasonMoments:
    """Exact first and second moments of the season counts (X, Y)."""

    mean_X: float
    mean_Y: float
    var_X: float
    var_Y: float
    cov_XY: float


# ---------------------------------------------------------------------------
# Exhaustive rational oracle
# ---------------------------------------------------------------------------


def _joint_law(
    w: int, b: int, f: int, desig_w: int, desig_b: int
) -> dict[tuple[int, int, int, int], Fraction]:
    """Exact joint law of (X, Y, designated whites drawn, designated blacks
    marked) after f draws, by expanding every ordered draw sequence.

    The first desig_w whites and desig_b blacks are individually tracked.
    Draws from an empty urn (possible once all whites are gone and b = 0) do
    nothing.  Probabilities are exact Fractions summing to 1.
    """

    @lru_cache(maxsize=None)
    def walk(wr: int, dwr: int, m: int, dm: int, k: int):
        # wr whites remain (dwr of them designated); m blacks are marked
        # (dm of them designated); k draws left.
        size = wr + b
        if k == 0 or size == 0:
            return ((wr, dwr, m, dm, Fraction(1)),)
        acc: dict[tuple[int, int, int, int], Fraction] = {}

        def branch(entries, weight: Fraction) -> None:
            for rw, rdw, rm, rdm, p in entries:
                key = (rw, rdw, rm, rdm)
                acc[key] = acc.get(key, Fraction(0)) + weight * p

        if dwr:  # a designated white is drawn and removed
            branch(walk(wr - 1, dwr - 1, m, dm, k - 1), Fraction(dwr, size))
        if wr - dwr:  # a plain white is drawn and removed
            branch(walk(wr - 1, dwr, m, dm, k - 1), Fraction(wr - dwr, size))
        if desig_b - dm:  # an unmarked designated black is drawn and marked
            branch(walk(wr, dwr, m + 1, dm + 1, k - 1), Fraction(desig_b - dm, size))
        plain_unmarked = (b - desig_b) - (m - dm)
        if plain_unmarked:  # an unmarked plain black is drawn and marked
            branch(walk(wr, dwr, m + 1, dm, k - 1), Fraction(plain_unmarked, size))
        if m:  # an already-marked black is drawn; nothing changes
            branch(walk(wr, dwr, m, dm, k - 1), Fraction(m, size))
        return tuple((*key, p) for key, p in acc.items())

    law: dict[tuple[int, int, int, int], Fraction] = {}
    for wr, dwr, m, dm, p in walk(w, desig_w, 0, 0, f):
        key = (w - wr, m, desig_w - dwr, dm)
        law[key] = law.get(key, Fraction(0)) + p
    return law


@dataclass(frozen=True)
class OracleResult:
    """Exact-rational season quantities for one small urn.

    Probability fields are Fractions; p_w/p_b/pair entries are None when the
    urn lacks the balls they refer to.  joint_pmf maps (X, Y) outcomes to
    their exact probabilities.
    """

    state: UrnState
    q: Fraction
    q_tilde: Fraction
    p_w: Optional[Fraction]
    p_b: Optional[Fraction]
    p_ww: Optional[Fraction]
    p_wb: Optional[Fraction]
    p_bb: Optional[Fraction]
    joint_pmf: dict[tuple[int, int], Fraction]

    def moments(self) -> SeasonMoments:
        """Mean/variance/covariance of (X, Y) from the exact joint pmf."""
        mean_x = sum((p * x for (x, _), p in self.joint_pmf.items()), Fraction(0))
        mean_y = sum((p * y for (_, y), p in self.joint_pmf.items()), Fraction(0))
        var_x = sum(
            (p * (x - mean_x) ** 2 for (x, _), p in self.joint_pmf.items()), Fraction(0)
        )
        var_y = sum(
            (p * (y - mean_y) ** 2 for (_, y), p in self.joint_pmf.items()), Fraction(0)
        )
        cov = sum(
            (p * (x - mean_x) * (y - mean_y) for (x, y), p in self.joint_pmf.items()),
            Fraction(0),
        )
        return SeasonMoments(
            mean_X=float(mean_x),
            mean_Y=float(mean_y),
            var_X=float(var_x),
            var_Y=float(var_y),
            cov_XY=float(cov),
        )


def _tag_survival(law, want_w_zero: bool, want_b_zero: bool) -> Fraction:
    """Probability that no designated white was drawn / no designated black
    was marked, per the flags."""
    total = Fraction(0)
    for (_, _, ndw, ndb), p in law.items():
        if want_w_zero and ndw:
            continue
        if want_b_zero and ndb:
            continue
        total += p
    return total


@lru_cache(maxsize=None)
def _oracle(w: int, b: int, f: int) -> OracleResult:
    desig_w = min(w, 2)
    desig_b = min(b, 2)
    law = _joint_law(w, b, f, desig_w, desig_b)

    e_ndw = sum((p * ndw for (_, _, ndw, _), p in law.items()), Fraction(0))
    e_ndb = sum((p * ndb for (_, _, _, ndb), p in law.items()), Fraction(0))
    e_cross = sum((p * ndw * ndb for (_, _, ndw, ndb), p in law.items()), Fraction(0))

    p_w = e_ndw / desig_w if desig_w else None
    p_b = e_ndb / desig_b if desig_b else None
    p_ww = (
        sum((p for (_, _, ndw, _), p in law.items() if ndw == 2), Fraction(0))
        if desig_w == 2
        else None
    )
    p_bb = (
        sum((p for (_, _, _, ndb), p in law.items() if ndb == 2), Fraction(0))
        if desig_b == 2
        else None
    )
    p_wb = e_cross / (desig_w * desig_b) if desig_w and desig_b else None

    # One tagged extra ball: its color cannot matter as long as it stays in
    # the urn, so model it both as a designated white of a (w+1, b) urn and
    # as a designated black of a (w, b+1) urn and insist the exact values
    # agree.
    q_as_white = _tag_survival(_joint_law(w + 1, b, f, 1, 0), True, False)
    q_as_black = _tag_survival(_joint_law(w, b + 1, f, 0, 1), False, True)
    if q_as_white != q_as_black:
        raise RuntimeError(
            f"tag-color consistency violated at ({w},{b},{f}): "
            f"{q_as_white} != {q_as_black}"
        )

    # Two tagged extra balls: three colorings, one exact value.
    qt_ww = _tag_survival(_joint_law(w + 2, b, f, 2, 0), True, False)
    qt_bb = _tag_survival(_joint_law(w, b + 2, f, 0, 2), False, True)
    qt_wb = _tag_survival(_joint_law(w + 1, b + 1, f, 1, 1), True, True)
    if not (qt_ww == qt_bb == qt_wb):
        raise RuntimeError(
            f"two-tag color consistency violated at ({w},{b},{f}): "
            f"{qt_ww}, {qt_bb}, {qt_wb}"
        )

    joint: dict[tuple[int, int], Fraction] = {}
    for (x, y, _, _), p in law.items():
        joint[(x, y)] = joint.get((x, y), Fraction(0)) + p

    return OracleResult(
        state=UrnState(w, b, f),
        q=q_as_white,
        q_tilde=qt_ww,
        p_w=p_w,
        p_b=p_b,
        p_ww=p_ww,
        p_wb=p_wb,
        p_bb=p_bb,
        joint_pmf=joint,
    )


def enumerate_oracle(
    state: UrnState, max_total: int = ORACLE_DEFAULT_BOUND
) -> OracleResult:
    """Exhaustively enumerate every ordered draw sequence of a small urn.

    Returns exact rational values of q, qtilde, the per-ball and pair
    probabilities, and the joint pmf of (X, Y).  Refuses instances with
    w + b + f above max_total: the state space is tiny but the tag
    enumerations multiply, and this function exists to check the fast routes,
    not to replace them.

    Args:
        state: urn coordinates.
        max_total: largest admissible w + b + f.

    Raises:
        InfeasibleSizeError: when w + b + f exceeds max_total.
    """
    if state.scale > max_total:
        raise InfeasibleSizeError(
            f"oracle bound exceeded: w+b+f = {state.scale} > {max_total}"
        )
    return _oracle(state.w, state.b, state.f)


# ---------------------------------------------------------------------------
# Dynamic programs
# ---------------------------------------------------------------------------


@lru_cache(maxsize=200_000)
def _tagged_avoidance(w: int, b: int, f: int, tags: int) -> float:
    """Probability that `tags` tagged extra balls are never drawn in f draws
    from a (w, b) urn, via the one-step recurrence.

    Only the white count moves in the recurrence, so a single column over
    0..w is rolled through the f draw layers; entry 0 of the shifted column
    encodes the convention that avoidance from a (-1, b) urn is impossible.
    """
    if f == 0:
        return 1.0
    whites = np.arange(w + 1, dtype=np.float64)
    denom = whites + float(b + tags)
    prev = np.ones(w + 1)
    shifted = np.empty(w + 1)
    for _ in range(f):
        shifted[0] = 0.0
        shifted[1:] = prev[:-1]
        prev = (whites * shifted) / denom + (float(b) * prev) / denom
    return float(prev[w])


def exact_q(state: UrnState) -> float:
    """Probability one tagged extra ball survives f draws undrawn."""
    return _tagged_avoidance(state.w, state.b, state.f, 1)


def exact_q_tilde(state: UrnState) -> float:
    """Probability two tagged extra balls both survive f draws undrawn."""
    return _tagged_avoidance(state.w, state.b, state.f, 2)


class QTable:
    """Rolling dynamic-programming slab of avoidance probabilities.

    Stores the dense (w, b) layer for the current number of draws f_current
    plus the previous layer; memory stays O(max_w * max_b) while f advances.
    kind "q" tracks one tagged ball, "qtilde" two.  An internal guard row
    encodes the convention value(-1, b, f) = 0.  With keep_all=True every
    layer is retained for finite-difference sweeps over f (memory then grows
    linearly with the number of layers).
    """

    KINDS = {"q": 1, "qtilde": 2}

    def __init__(self, kind: str, max_w: int, max_b: int, *, keep_all: bool = False):
        if kind not in self.KINDS:
            raise DomainError(f"kind must be one of {sorted(self.KINDS)}, got {kind!r}")
        if max_w < 0 or max_b < 0:
            raise DomainError("max_w and max_b must be nonnegative")
        self.kind = kind
        self.max_w = int(max_w)
        self.max_b = int(max_b)
        self.f_current = 0
        # Row 0 is the guard row (w = -1); real w starts at row 1.
        layer0 = np.ones((self.max_w + 2, self.max_b + 1))
        layer0[0, :] = 0.0
        self._curr = layer0
        self._prev: Optional[np.ndarray] = None
        self._layers: Optional[list[np.ndarray]] = [layer0.copy()] if keep_all else None

    @classmethod
    def build(
        cls, kind: str, max_w: int, max_b: int, max_f: int, *, keep_all: bool = False
    ) -> "QTable":
        """Construct the table and advance it to the max_f draw layer."""
        table = cls(kind, max_w, max_b, keep_all=keep_all)
        table.advance(max_f)
        return table

    def advance(self, to_f: int) -> None:
        """Advance the rolling slab forward to draw layer to_f."""
        if to_f < self.f_current:
            raise DomainError(
                f"cannot roll back from f={self.f_current} to f={to_f}; build a new table"
            )
        tags = self.KINDS[self.kind]
        while self.f_current < to_f:
            out = np.empty_like(self._curr)
            dp_advance_layer(self._curr, out, tags)
            self._prev = self._curr
            self._curr = out
            self.f_current += 1
            if self._layers is not None:
                self._layers.append(out.copy())

    def value(self, w: int, b: int, f: Optional[int] = None) -> float:
        """Table value at (w, b, f); f defaults to the current layer.

        w = -1 returns 0 by convention.  Raises CoverageError when the
        requested indices fall outside what the table holds.
        """
        if f is None:
            f = self.f_current
        if w != -1 and not 0 <= w <= self.max_w:
            raise CoverageError(f"w={w} outside [0, {self.max_w}]")
        if not 0 <= b <= self.max_b:
            raise CoverageError(f"b={b} outside [0, {self.max_b}]")
        layer = self._layer_array(f)
        return float(layer[w + 1, b])

    def _layer_array(self, f: int) -> np.ndarray:
        if self._layers is not None:
            if not 0 <= f <= self.f_current:
                raise CoverageError(f"layer f={f} outside [0, {self.f_current}]")
            return self._layers[f]
        if f == self.f_current:
            return self._curr
        if f == self.f_current - 1 and self._prev is not None:
            return self._prev
        raise CoverageError(
            f"layer f={f} not held by rolling table at f_current={self.f_current}"
        )

    def _readonly(self, arr: np.ndarray) -> np.ndarray:
        view = arr[1:, :]
        view = view.view()
        view.flags.writeable = False
        return view

    @property
    def current_layer(self) -> np.ndarray:
        """Read-only (max_w+1, max_b+1) view of the current draw layer."""
        return self._readonly(self._curr)

    @property
    def previous_layer(self) -> Optional[np.ndarray]:
        """Read-only view of the previous draw layer, or None at f = 0."""
        return None if self._prev is None else self._readonly(self._prev)

    def layer(self, f: int) -> np.ndarray:
        """Read-only view of an arbitrary retained layer."""
        return self._readonly(self._layer_array(f))


# ---------------------------------------------------------------------------
# Derived probabilities and moments
# ---------------------------------------------------------------------------


def repro_probs(state: UrnState) -> ReproProbs:
    """Per-ball reproduction probabilities (p_w, p_b) for the season.

    A given white ball is marked with probability 1 - q(w-1, b, f): from its
    point of view the rest of the urn plus itself is a (w-1, b) urn with one
    tagged extra ball.  Likewise p_b = 1 - q(w, b-1, f).  Components whose
    color is absent are returned as None; use p_white / p_black for the
    raising accessors.
    """
    w, b, f = state.w, state.b, state.f
    pw = 1.0 - _tagged_avoidance(w - 1, b, f, 1) if w >= 1 else None
    pb = 1.0 - _tagged_avoidance(w, b - 1, f, 1) if b >= 1 else None
    return ReproProbs(p_w=pw, p_b=pb)


def p_white(state: UrnState) -> float:
    """Reproduction probability of a given white ball; raises if w = 0."""
    if state.w < 1:
        raise DomainError(f"p_w undefined: urn {state} has no white ball")
    return 1.0 - _tagged_avoidance(state.w - 1, state.b, state.f, 1)


def p_black(state: UrnState) -> float:
    """Reproduction probability of a given black ball; raises if b = 0."""
    if state.b < 1:
        raise DomainError(f"p_b undefined: urn {state} has no black ball")
    return 1.0 - _tagged_avoidance(state.w, state.b - 1, state.f, 1)


def _clamp01(value: float) -> float:
    # Assembled pair probabilities subtract nearly equal numbers; boundary
    # states can land a few ulps outside [0, 1].
    return min(1.0, max(0.0, value))


def pair_probs(state: UrnState) -> PairProbs:
    """Probabilities that two given distinct balls are both marked.

    Each pair probability reduces to a two-tag avoidance value plus the
    single-ball probabilities, by inclusion-exclusion on the two survival
    events: p_ww = qtilde(w-2, b, f) - 1 + 2 p_w, and correspondingly for
    mixed and black pairs.  Components whose pair does not exist in the urn
    are None.
    """
    w, b, f = state.w, state.b, state.f
    pw, pb = repro_probs(state)
    p_ww = p_wb = p_bb = None
    if w >= 2:
        p_ww = _clamp01(_tagged_avoidance(w - 2, b, f, 2) - 1.0 + 2.0 * pw)
    if w >= 1 and b >= 1:
        p_wb = _clamp01(_tagged_avoidance(w - 1, b - 1, f, 2) - 1.0 + pw + pb)
    if b >= 2:
        p_bb = _clamp01(_tagged_avoidance(w, b - 2, f, 2) - 1.0 + 2.0 * pb)
    return PairProbs(p_ww=p_ww, p_wb=p_wb, p_bb=p_bb)


def finite_diffs(table: QTable, state: UrnState) -> tuple[float, float]:
    """One-step differences of the tabulated function at (w, b, f):
    (value(w+1,b,f) - value(w,b,f), value(w,b+1,f) - value(w,b,f)).

    Raises CoverageError when the table does not cover (w+1, b+1, f).
    """
    w, b, f = state.w, state.b, state.f
    center = table.value(w, b, f)
    dx = table.value(w + 1, b, f) - center
    dy = table.value(w, b + 1, f) - center
    return (dx, dy)


def season_moments_exact(state: UrnState) -> SeasonMoments:
    """Exact mean/variance/covariance of the season counts (X, Y).

    X is a sum of w exchangeable marking indicators, so
    Var X = w p_w (1 - p_w) + w (w-1) (p_ww - p_w^2); the pair term vanishes
    algebraically when w < 2, which is why no pair probability is needed
    there.  Cov(X, Y) = w b (p_wb - p_w p_b).
    """
    w, b = state.w, state.b
    pw, pb = repro_probs(state)
    pairs = pair_probs(state)

    mean_x = w * pw if w else 0.0
    mean_y = b * pb if b else 0.0

    var_x = 0.0
    if w:
        var_x = w * pw * (1.0 - pw)
        if w >= 2:
            var_x += w * (w - 1) * (pairs.p_ww - pw * pw)
    var_y = 0.0
    if b:
        var_y = b * pb * (1.0 - pb)
        if b >= 2:
            var_y += b * (b - 1) * (pairs.p_bb - pb * pb)

    cov = 0.0
    if w and b:
        cov = w * b * (pairs.p_wb - pw * pb)

    return SeasonMoments(
        mean_X=mean_x,
        mean_Y=mean_y,
        var_X=max(0.0, var_x),
        var_Y=max(0.0, var_y),
        cov_XY=cov,
    )
