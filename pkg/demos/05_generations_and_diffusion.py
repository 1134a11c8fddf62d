#=========================================================================
# 05_generations_and_diffusion.py
#=========================================================================
# The season drives a finite-population frequency chain: each generation
# runs one season at the current type split, then resamples n offspring
# with success weight tilted by the advantage parameter.  On the n -> inf
# timescale (n generations per unit time) the chain follows a degenerate
# SDE whose coefficients come from the success-curve derivatives.

import numpy as np

from urnwf import (
    ChainConfig,
    SdeConfig,
    chain_final_batch,
    diffusion_coeffs,
    em_simulate,
    path_moments,
    run_chain,
)

#-------------------------------------------------------------------------
# A few chain trajectories
#-------------------------------------------------------------------------

cfg = ChainConfig(n=100, s=0.5, beta=1.0, x0=0.3, generations=200, seed=11)
print(f"chain: n={cfg.n}, s={cfg.s}, beta={cfg.beta}, x0={cfg.x0},"
      f" {cfg.generations} generations")
for rep in range(4):
    traj = run_chain(cfg, replica=rep)
    marks = "  ".join(f"{traj.states[g]:.3f}" for g in (0, 50, 100, 150, 200))
    tail = (f"absorbed at gen {traj.absorbed_at[0]}"
            f" -> {traj.absorbed_at[1]:.0f}" if traj.absorbed_at else "interior")
    print(f"  replica {rep}: x at gens 0/50/100/150/200: {marks}   ({tail})")
print()

#-------------------------------------------------------------------------
# Terminal distribution, chain vs chain
#-------------------------------------------------------------------------
# beta > 0 tilts resampling toward the advantaged type; the terminal mean
# should sit above the neutral one.

reps = 4000
finals_adv = chain_final_batch(cfg, reps)
cfg0 = ChainConfig(n=100, s=0.5, beta=0.0, x0=0.3, generations=200, seed=11)
finals_neu = chain_final_batch(cfg0, reps)
print(f"terminal frequency after 200 generations ({reps} replicas):")
print(f"  beta=1.0: mean {finals_adv.mean():.4f}   var {finals_adv.var():.4f}")
print(f"  beta=0.0: mean {finals_neu.mean():.4f}   var {finals_neu.var():.4f}")
print()

#-------------------------------------------------------------------------
# The limiting SDE
#-------------------------------------------------------------------------

co = diffusion_coeffs(s=0.5, x=0.3, beta=1.0)
print(f"diffusion coefficients at x=0.3: drift b {co.b:+.6f},"
      f" variance a {co.a:.6f}")

sde = SdeConfig(s=0.5, beta=1.0, x0=0.3, dt=1e-3, t_end=2.0, seed=11)
path = em_simulate(sde)
marks = "  ".join(f"{path.values[int(t / sde.dt)]:.3f}"
                  for t in (0.0, 0.5, 1.0, 1.5, 2.0))
print(f"one Euler-Maruyama path, x at t = 0/0.5/1/1.5/2: {marks}")

pm = path_moments(sde, reps=2000, t_grid=[1.0, 2.0])
print("SDE ensemble (2000 paths):")
for t, mu, var in zip(pm.times, pm.mean, pm.variance):
    print(f"  t={t:.1f}: mean {mu:.4f}   var {var:.4f}")
print()
print("chain generations 100 and 200 correspond to t = 1 and 2; the"
      " moments agree to sampling error plus the O(1/n) bias of n=100."
      "  Demo 06 runs the calibrated comparison.")
