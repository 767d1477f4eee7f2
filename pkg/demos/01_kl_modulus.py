"""
The KL modulus omega(p, eps)
============================

How far can a Bernoulli(p) sample mean drift upward before its KL cost
exceeds a budget eps? That distance is ``omega(p, eps)``, and it is the
building block of every local bound in the package.
"""

import math

import numpy as np

from dkwlocal import kl_bernoulli, kl_lower_series, lambda_lower, delta_fn, omega, phi0

# A budget of log(1/delta)/n with n = 100 and delta = 0.1.
eps = math.log(10) / 100
p = np.array([0.001, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9])
w = omega(p, eps)

# Rare events move little; central ones move most. The classical bound
# sqrt(eps/2) ignores this and charges every p the same.
print(f"eps = {eps:.5f}, sqrt(eps/2) = {math.sqrt(eps / 2):.5f}")
for pi, wi in zip(p, w):
    print(f"  p = {pi:<6} omega = {wi:.6f}  kl residual = {kl_bernoulli(pi + wi, pi) - eps:+.1e}")

# phi0 is a closed-form envelope: omega <= phi0 * sqrt(eps/2) everywhere.
grid = np.linspace(0, 1, 10_001)
gap = phi0(grid, eps) * math.sqrt(eps / 2) - omega(grid, eps)
print(f"min(phi0 sqrt(eps/2) - omega) over a grid: {gap.min():.2e}")

# A second route to omega: minimise the Chernoff deviation Delta(p, lambda)
# over lambda. Both routes agree to about 1e-12.
for pi in (0.05, 0.3, 0.6):
    lam = lambda_lower(pi, eps)
    print(f"  p = {pi}: lambda = {lam:.5f}, Delta - omega = {delta_fn(pi, lam, eps) - omega(pi, eps):+.1e}")

# The uniform-in-p series lower bound on kl sits below the exact divergence.
eta = np.linspace(0, 0.5, 6)
print("series bound vs kl at p = 0.5:", np.round(kl_lower_series(eta), 4), np.round(kl_bernoulli(0.5 + eta, 0.5), 4))
