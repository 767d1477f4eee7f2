"""
Checking coverage by simulation and by exact calculation
========================================================

Each bound promises an exceedance probability of at most delta. Here the
promise is checked three ways: Monte Carlo, an exact binomial tail at a
single point, and the closed-form law for one observation.
"""

from dkwlocal import (
    SimConfig,
    binomial_exact_pointwise,
    coverage_sim,
    martingale_exact_mean,
    martingale_mean_check,
    n1_exact_check,
)

# Monte Carlo. Results depend only on the seed, not on the worker count.
for cfg in (
    SimConfig("massart", 100, 0.1, 20_000, seed=1),
    SimConfig("cor2", 100, 0.1, 20_000, seed=2),
    SimConfig("theorem1_local", 100, 0.1, 20_000, seed=3, p_range=(0.0, 0.25)),
    SimConfig("cor3_adaptive", 500, 0.1, 5_000, seed=4, beta=1.1),
):
    rep = coverage_sim(cfg, workers=2)
    print(f"{cfg.method:<15} estimate {rep.estimate:.4f} +- {rep.stderr:.4f} (delta {cfg.delta})")

# Exact: at one point with F(t) = p, the exceedance is a binomial tail.
for p in (0.01, 0.2, 0.5, 0.8):
    print(f"  n = 20, p = {p}: P(exceed) = {binomial_exact_pointwise(20, p, 0.1):.5f} <= 0.1")

# One observation: sup (F_1 - F) = 1 - X, so P(exceed x) = 1 - x.
for method in ("massart", "cor2", "theorem1_local"):
    rec = n1_exact_check(method, 0.3)
    print(f"  n = 1, {method:<15} margin {rec.margin:.4f}, exact {rec.exact:.4f}, ok = {rec.ok}")

# The exponential martingale behind the local bound has mean one.
print("closed-form mean:", martingale_exact_mean(5, 1.0, 0.5))
for e in martingale_mean_check(5, 1.0, [0.5, 0.9], reps=200_000, seed=7):
    print(f"  t = {e.t}: {e.estimate:.4f} +- {e.stderr:.4f}")
