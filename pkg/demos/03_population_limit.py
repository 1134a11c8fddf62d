"""
Large-population limit of the season
====================================

As the urn grows with fixed composition (x, y, z) = (whites, blacks,
draws) / N, the survival probability q converges to a deterministic
value u = exp(-T), where the season clock T solves

    x * (1 - exp(-T)) + y * T = z.

The solver is a safeguarded Newton iteration; gradients of T, u, and
the limiting marking probability v = 1 - u come in closed form.
"""

import numpy as np

from urnwf import LimitPoint, eval_limit, eval_vs, solve_T_grid, vs_grid

# -- one point, full evaluation -------------------------------------------
pt = LimitPoint(x=0.3, y=0.2, z=0.25)
ev = eval_limit(pt)
print(f"composition (x, y, z) = ({pt.x}, {pt.y}, {pt.z})")
print(f"  season clock T = {ev.T:.12f}")
print(f"  survival     u = {ev.u:.12f}")
print(f"  marking prob v = {ev.v:.12f}")
print(f"  grad T = {tuple(round(g, 6) for g in ev.grad_T)}")
print(f"  grad u = {tuple(round(g, 6) for g in ev.grad_u)}")
print(f"  grad v = {tuple(round(g, 6) for g in ev.grad_v)}")

# residual of the defining equation at the solved clock
res = pt.x * (1.0 - np.exp(-ev.T)) + pt.y * ev.T - pt.z
print(f"  clock equation residual = {res:+.2e}")
print()

# when no whites compete (x = 0) the clock is simply z / y
ev0 = eval_limit(LimitPoint(x=0.0, y=0.5, z=0.25))
print(f"x = 0 sanity: T = {ev0.T} (expected {0.25 / 0.5}),"
      f" u = {ev0.u:.12f}")
print()

# -- vectorized clock solve -----------------------------------------------
xs = np.full(4, 0.4)
ys = np.linspace(0.1, 0.4, 4)
zs = np.full(4, 0.2)
Ts = solve_T_grid(xs, ys, zs)
print("clock on a batch (x=0.4, z=0.2, y varying):")
for y, T in zip(ys, Ts):
    print(f"  y={y:.2f}  T={T:.9f}")
print()

# -- the success curve under a draw cap -----------------------------------
# With draws capped at s per ball, start fraction x of whites and let the
# rest be blacks: v_s(x) interpolates between the pure-black and
# pure-white seasons.  Curvature feeds the diffusion coefficients.
s = 0.5
print(f"success curve v_s and derivatives at s = {s}:")
print("  x      v_s        v_s'       v_s''")
for x in [0.0, 0.25, 0.5, 0.75, 1.0]:
    vev = eval_vs(s, x)
    print(f"  {x:4.2f}  {vev.v_s:9.6f}  {vev.v_s_prime:9.6f}"
          f"  {vev.v_s_second:+9.6f}")

lo, hi = 1.0 - np.exp(-s), s
grid = vs_grid(s, np.linspace(0.0, 1.0, 101))
print(f"  range over [0,1]: [{grid.min():.6f}, {grid.max():.6f}]"
      f"  inside bounds [{lo:.6f}, {hi:.6f}]")
