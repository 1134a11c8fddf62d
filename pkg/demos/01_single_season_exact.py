"""
Exact single-season probabilities
=================================

One season of the urn process: f forager balls draw from an urn holding
w white and b black balls.  A drawn white is marked and stays out; a
drawn black that is not yet marked is marked and returned; a marked
black is returned unchanged.  Every probability below is computed by
exact dynamic programming, then cross-checked against a brute-force
enumeration of all draw sequences.
"""

import numpy as np

from urnwf import (
    QTable,
    UrnState,
    enumerate_oracle,
    exact_q,
    exact_q_tilde,
    finite_diffs,
    pair_probs,
    repro_probs,
    season_moments_exact,
)

state = UrnState(w=4, b=3, f=5)
print(f"urn: {state.w} white, {state.b} black, {state.f} draws")
print()

# -- survival of one extra white ------------------------------------------
# q is the chance a tagged extra white placed in the urn is never drawn;
# q_tilde is the same for a tagged pair of extra whites.
q = exact_q(state)
qt = exact_q_tilde(state)
print(f"q      (one tagged white avoids all draws)  = {q:.12f}")
print(f"q~     (two tagged whites both avoid draws) = {qt:.12f}")
print(f"q~ - q^2 = {qt - q * q:+.3e}   (pair survival vs independence)")
print()

# -- per-ball marking probabilities ---------------------------------------
rp = repro_probs(state)
print(f"p_w (a given white gets marked) = {rp.p_w:.12f}")
print(f"p_b (a given black gets marked) = {rp.p_b:.12f}")
print(f"p_b - p_w = {rp.p_b - rp.p_w:+.3e}   (blacks return, so they lead)")
pp = pair_probs(state)
print(f"pair marks: ww={pp.p_ww:.9f}  wb={pp.p_wb:.9f}  bb={pp.p_bb:.9f}")
print()

# -- season moments -------------------------------------------------------
m = season_moments_exact(state)
print("exact season moments (X = marked whites, Y = marked blacks):")
print(f"  E[X]={m.mean_X:.9f}  E[Y]={m.mean_Y:.9f}")
print(f"  Var X={m.var_X:.9f}  Var Y={m.var_Y:.9f}  Cov={m.cov_XY:+.9f}")
print()

# -- brute-force cross-check ----------------------------------------------
# The oracle enumerates every draw sequence, so it shares no code with the
# DP above.  Totals this small finish instantly (the default bound is 10;
# w+b+f = 12 needs it raised explicitly).
oracle = enumerate_oracle(state, max_total=12)
om = oracle.moments()
print("oracle (full enumeration) agreement:")
print(f"  |q - oracle|    = {abs(q - oracle.q):.2e}")
print(f"  |p_w - oracle|  = {abs(rp.p_w - oracle.p_w):.2e}")
print(f"  |E[X] - oracle| = {abs(m.mean_X - om.mean_X):.2e}")
print()

# -- bulk tables ----------------------------------------------------------
# QTable computes a whole (w, b) layer per draw count with one rolling
# recurrence; finite_diffs reads the scaled one-ball differences used by
# the convergence studies.
table = QTable("q", max_w=10, max_b=10)
for f in range(1, state.f + 1):
    table.advance(f)
print(f"table layer at f={state.f}: q(4,3) = {table.value(4, 3):.12f}")
dxq, dyq = finite_diffs(table, state)
print(f"scaled one-ball differences at (4,3): dxq={dxq:+.6f} dyq={dyq:+.6f}")
