"""
Finite-urn to limit convergence rates
=====================================

How fast does the exact survival probability q(w, b, f) approach its
limit u(w/N, b/N, f/N)?  rate_sweep_q enumerates every feasible lattice
point of a compact region for each N, records the supremum error, and
fits a power law.  A slope near -1 is first-order convergence.
"""

import numpy as np

from urnwf import RATE_TARGETS, Region, rate_sweep_q

ns = [40, 80, 160, 320]

# -- survival error on a region with a minimum black share ----------------
region = Region.y_floor(0.2)
table = rate_sweep_q(region, ns, "q_vs_u")
print("target q_vs_u on the y >= 0.2 region:")
print("  N     sup error      coverage")
for n, err, cov in zip(table.ns, table.sup_errors, table.coverages):
    print(f"  {n:4d}  {err:.6e}   {cov:.3f}")
print(f"  fitted slope {table.fitted_slope:+.3f}"
      f"  (r^2 = {table.fit_r2:.4f}, constant = {table.fitted_constant:.3f})")
print()

# -- scaled fitness gap on a draw-capped region ---------------------------
# The gap N * (p_b - p_w) has a nonzero limit; its error should also
# shrink like 1/N.
region2 = Region.s_capped(0.5)
table2 = rate_sweep_q(region2, ns, "fitness_gap")
print("target fitness_gap on the s = 0.5 capped region:")
print("  N     sup error      coverage")
for n, err, cov in zip(table2.ns, table2.sup_errors, table2.coverages):
    print(f"  {n:4d}  {err:.6e}   {cov:.3f}")
print(f"  fitted slope {table2.fitted_slope:+.3f}"
      f"  (r^2 = {table2.fit_r2:.4f})")
print()

# -- all five targets at a glance -----------------------------------------
print("fitted slopes, both regions, all targets (ns = 40..320):")
for target in RATE_TARGETS:
    slopes = []
    for reg in (region, region2):
        t = rate_sweep_q(reg, ns, target)
        slopes.append(t.fitted_slope)
    print(f"  {target:13s}  y-floor {slopes[0]:+.3f}   s-capped {slopes[1]:+.3f}")
