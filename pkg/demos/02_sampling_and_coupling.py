#=========================================================================
# 02_sampling_and_coupling.py
#=========================================================================
# Monte-Carlo season sampling against the exact layer, the coupled-urn
# construction behind the monotonicity argument, and empirical tail
# bounds for the marked counts.

import numpy as np

from urnwf import (
    RngStream,
    UrnState,
    estimate_probs,
    repro_probs,
    season_moments_exact,
    simulate_coupled_batch,
    simulate_seasons,
    tail_check,
)

SEED = 7

#-------------------------------------------------------------------------
# Sampled vs exact moments
#-------------------------------------------------------------------------

state = UrnState(w=30, b=20, f=25)
reps = 200_000
xs, ys = simulate_seasons(state, RngStream(SEED), reps)
exact = season_moments_exact(state)

print(f"{reps} seasons at (w={state.w}, b={state.b}, f={state.f})")
for name, sample, truth in [
    ("E[X]", xs.mean(), exact.mean_X),
    ("E[Y]", ys.mean(), exact.mean_Y),
    ("Var X", xs.var(ddof=1), exact.var_X),
]:
    print(f"  {name:5s} sampled {sample:9.5f}   exact {truth:9.5f}"
          f"   diff {sample - truth:+.2e}")

rp = repro_probs(state)
pw_hat, pb_hat = estimate_probs(state, reps, SEED)
print(f"  p_w   sampled {pw_hat.value:.5f} +- {pw_hat.std_error:.5f}"
      f"   exact {rp.p_w:.5f}")
print(f"  p_b   sampled {pb_hat.value:.5f} +- {pb_hat.std_error:.5f}"
      f"   exact {rp.p_b:.5f}")
print()

#-------------------------------------------------------------------------
# Coupled urns
#-------------------------------------------------------------------------
# Two urns share one uniform draw stream and differ only in the color of
# a single ball: urn 1 keeps it white-adjacent (w whites, b-1 blacks plus
# the tag), urn 2 recolors one white to black.  The construction makes
# "tag missed in urn 1 but drawn in urn 2" impossible, which is the
# monotonicity behind p_b >= p_w; we count that forbidden pattern.

cstate = UrnState(w=5, b=5, f=5)
creps = 100_000
drawn1, drawn2 = simulate_coupled_batch(cstate, RngStream(SEED), creps)
forbidden = int(np.sum(~drawn1 & drawn2))
print(f"coupled urns, {creps} replicas: tag drawn in urn1 {drawn1.sum()}"
      f" times, in urn2 {drawn2.sum()} times")
print(f"  forbidden pattern (urn1 missed, urn2 drawn): {forbidden} occurrences")
print()

#-------------------------------------------------------------------------
# Tail bounds
#-------------------------------------------------------------------------
# Deviations of X and Y from their means against the analytic
# exp(-D^2 / (4n)) envelope.  violation flags an empirical exceedance
# beyond the bound plus three binomial standard errors.

tstate = UrnState(w=100, b=100, f=100)
rows = tail_check(tstate, reps=50_000, thresholds=[10.0, 20.0, 30.0], seed=SEED)
print(f"tail bounds at (w={tstate.w}, b={tstate.b}, f={tstate.f}):")
print("  side  D     empirical    bound        violation")
for r in rows:
    print(f"  {r.which:4s} {r.threshold:5.1f}  {r.empirical:.4e}"
          f"   {r.bound:.4e}   {r.violation}")
