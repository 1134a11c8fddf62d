"""
Empirical verification harness
==============================

Three instruments that check the asymptotic claims against simulation:
moment matching of one chain step to the diffusion coefficients, the
drift shift bought by the advantage parameter, and terminal moments of
the chain against the SDE at matched time.  Each one reports estimates
with standard errors and a pass verdict; the acceptance suite runs the
same instruments at higher replication.
"""

from urnwf import beta_shift_check, chain_vs_diffusion, infinitesimal_check

SEED = 19

# -- one-step moments vs diffusion coefficients ---------------------------
# E[n(X1 - x)] should approach the drift b(x) and n Var[X1] the variance
# a(x) as n grows; the envelope allows 4 standard errors plus a fitted
# O(1/sqrt(n)) bias term calibrated at the smallest n.
rep = infinitesimal_check(
    n_list=[100, 400], x_grid=[0.25, 0.5, 0.75],
    s=0.5, beta=1.0, reps=30_000, seed=SEED,
)
print("one-step moment check (s=0.5, beta=1.0):")
print("  n     x     drift est    drift ref    var est     var ref     ok")
for row in rep.rows:
    ok = "yes" if (row.a_within and row.b_within) else "NO"
    print(f"  {row.n:4d}  {row.x:.2f}  {row.b_hat:+.6f}   {row.b_ref:+.6f}"
          f"   {row.a_hat:.6f}   {row.a_ref:.6f}   {ok}")
print(f"  all cells within envelope: {rep.all_within}")
print()

# -- drift shift from the advantage parameter -----------------------------
# Paired seasons (same draws, advantage on vs off) isolate the shift
# beta * x * (1 - x) with far less noise than differencing two
# independent runs would.
res = beta_shift_check(n=200, x=0.5, s=0.5, beta=2.0, reps=50_000, seed=SEED)
print("advantage-induced drift shift (n=200, x=0.5, beta=2.0):")
print(f"  estimate {res.shift_hat:+.5f} +- {res.std_error:.5f}"
      f"   reference {res.reference:+.5f}   within 4 SE: {res.within}")
print()

# -- chain vs diffusion at matched time -----------------------------------
report = chain_vs_diffusion(
    n=300, s=0.5, beta=0.0, x0=0.5, t=0.4, reps=4000, seed=SEED,
)
print(f"terminal comparison ({report.model} model, n={report.n},"
      f" {report.generations} generations = t {report.t}):")
print(f"  chain mean {report.chain_mean:.4f} +- {report.chain_mean_se:.4f}"
      f"   sde mean {report.sde_mean:.4f} +- {report.sde_mean_se:.4f}")
print(f"  chain var  {report.chain_var:.4f} +- {report.chain_var_se:.4f}"
      f"   sde var  {report.sde_var:.4f} +- {report.sde_var_se:.4f}")
print(f"  |mean diff| <= {report.mean_tol:.4f} and"
      f" |var diff| <= {report.var_tol:.4f}: {report.passed}")
