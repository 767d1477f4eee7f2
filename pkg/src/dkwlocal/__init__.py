"""Local one-sided confidence bounds for empirical distribution functions.

The central quantity is the modulus ``omega(p, eps)``, the largest upward
deviation of a Bernoulli(p) mean whose KL cost stays within ``eps``. Taking
its supremum over the range of F on an interval gives a one-sided bound on
``F_n - F`` there that holds with probability ``1 - delta`` for every delta.
Closed-form relaxations give a global bound sharper than the classical
``sqrt(log(1/delta) / (2n))`` margin and a variance-adaptive band over the
whole line.
"""

from ._config import DEFAULT_TOL, NumericalError, Tolerances
from .bands import (
    DiscreteCdf,
    EmpiricalCdf,
    PiecewiseLinearCdf,
    StepBand,
    Uniform01,
    band_global,
    band_lower_confidence,
    constant_band,
    interval_margin,
    local_threshold,
    plugin_range,
    sup_deviation,
)
from .bounds import (
    SaddlePoint,
    adaptive_threshold,
    cor2_exponent,
    cor2_threshold,
    delta_fn,
    eps_beta,
    eps_rate,
    gamma1,
    lambda_lower,
    lcb_margin,
    phi0,
    phi0_argmax,
    phi_interval,
    rho,
    saddle_point,
    sigma,
)
from .kl import kl_bernoulli, kl_lower_bernstein, kl_lower_series, omega
from .verify import (
    SimConfig,
    SimReport,
    binomial_exact_pointwise,
    binomial_tail,
    coverage_sim,
    martingale_exact_mean,
    martingale_mean_check,
    n1_exact_check,
)

__version__ = "0.1.0"
