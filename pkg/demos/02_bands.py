"""
Global, local and variance-adaptive lower bands
===============================================

Draw a sample, then compare the one-sided margins each method puts on
``F_n - F``: the classical sqrt(log(1/delta)/(2n)) margin, its refined global version,
the local margin for a region where F is small, and the adaptive band.
"""

import numpy as np

from dkwlocal import (
    EmpiricalCdf,
    Uniform01,
    band_global,
    band_lower_confidence,
    constant_band,
    interval_margin,
    local_threshold,
    sup_deviation,
)

rng = np.random.default_rng(2024)
n, delta = 500, 0.05
ecdf = EmpiricalCdf(rng.random(n))

massart = band_global(n, delta, "massart")
cor2 = band_global(n, delta, "cor2")
print(f"n = {n}, delta = {delta}")
print(f"  massart margin       {massart:.5f}")
print(f"  refined global       {cor2:.5f}")

# If F stays below 0.05 on an interval, the local margin there is much smaller.
local = local_threshold(0.0, 0.05, n, delta)
closed = interval_margin(0.0, 0.05, n, delta)
print(f"  local, F in [0, .05] {local:.5f} (closed form {closed:.5f})")

# The realised one-sided deviation, over the whole line and over [0, 0.05].
u = Uniform01()
print(f"sup (F_n - F) on R:         {sup_deviation(ecdf, u):.5f}")
print(f"sup (F_n - F) on [0, 0.05]: {sup_deviation(ecdf, u, (0.0, 0.05)):.5f}")

# The adaptive band is tighter than the classical margin in the tails and looser in the middle.
adaptive = band_lower_confidence(ecdf, delta, beta=1.1)
flat = constant_band(n, massart, "massart", delta)
for k in (5, 25, 250, 475, 495):
    print(f"  q = {k / n:.2f}: adaptive {adaptive.lower[k]:.4f}   massart {flat.lower[k]:.4f}")

# Bands are stored per empirical level k/n and evaluate at data points.
t = 0.5
print(f"adaptive lower bound on F({t}) = {adaptive(ecdf, t):.4f} (truth {t})")
print(adaptive.to_csv().splitlines()[:3])
