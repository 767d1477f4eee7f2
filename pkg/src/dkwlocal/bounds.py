"""Closed-form bound machinery and the lambda/saddle-point apparatus.

The rates, ``phi0`` and the margins are explicit formulas. ``lambda_lower``
and ``saddle_point`` solve the Chernoff-parameter problem directly and serve
as an independent route to :func:`dkwlocal.kl.omega`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._config import DEFAULT_TOL, NumericalError, Tolerances
from .kl import _as_prob, _as_rate, _out

__all__ = [
    "SaddlePoint",
    "eps_rate",
    "eps_beta",
    "ceil_log",
    "sigma",
    "rho",
    "phi0",
    "phi0_argmax",
    "phi_interval",
    "delta_fn",
    "delta_dr",
    "gamma1",
    "lambda_lower",
    "saddle_point",
    "cor2_exponent",
    "cor2_threshold",
    "adaptive_threshold",
    "lcb_margin",
]


def _check_n(n, minimum=1):
    if isinstance(n, bool) or int(n) != n or n < minimum:
        raise ValueError(f"n must be an integer >= {minimum}, got {n!r}")
    return int(n)


def _check_delta(delta):
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    return float(delta)


def _check_beta(beta):
    if not (beta > 1.0) or math.isinf(beta):
        raise ValueError(f"beta must be a finite real > 1, got {beta!r}")
    return float(beta)


def eps_rate(n, delta):
    """Per-sample rate ``log(1/delta) / n``."""
    n = _check_n(n)
    delta = _check_delta(delta)
    return -math.log(delta) / n


def ceil_log(n, beta):
    """Smallest integer k with ``beta**k >= n``, using exact rational powers."""
    n = _check_n(n)
    beta = _check_beta(beta)
    b = Fraction(beta)
    # start just below the float estimate, then settle with exact comparisons
    k = max(0, math.floor(math.log(n) / math.log(beta)) - 2)
    while k > 0 and b**k >= n:
        k -= 1
    power = b**k
    while power < n:
        power *= b
        k += 1
    return k


def eps_beta(n, delta, beta):
    """Peeled rate ``log(2 ceil(log_beta n) / delta) / n`` (needs n >= 2)."""
    n = _check_n(n, minimum=2)
    delta = _check_delta(delta)
    k = ceil_log(n, beta)
    return math.log(2.0 * k / delta) / n


def sigma(p):
    """Bernoulli standard deviation ``sqrt(p (1 - p))``."""
    p = _as_prob(p, "p")
    return _out(np.sqrt(p * (1.0 - p)))


def rho(eps):
    """``9 / (9 + 2 eps)``."""
    eps = _as_rate(eps)
    return _out(9.0 / (9.0 + 2.0 * eps))


def _positive_eps(eps):
    eps = _as_rate(eps)
    if (eps <= 0.0).any():
        raise ValueError("eps must be strictly positive")
    return eps


def phi0(p, eps):
    """Variance-adaptive width factor ``phi0(p, eps)`` in (0, 1].

    ``sqrt(4 sigma(p)^2 rho^2 + sigma(rho)^2) + sigma(rho) (1 - 2p)`` with
    ``rho = 9 / (9 + 2 eps)``. Concave in p; for ``eps <= 4.5`` the maximum
    is 1, attained at :func:`phi0_argmax`. Tends to ``2 sigma(p)`` as eps -> 0.
    """
    p = _as_prob(p, "p")
    eps = _positive_eps(eps)
    r = 9.0 / (9.0 + 2.0 * eps)
    s2r = r * (1.0 - r)
    var = p * (1.0 - p)
    return _out(np.sqrt(4.0 * var * r * r + s2r) + np.sqrt(s2r) * (1.0 - 2.0 * p))


def phi0_argmax(eps):
    """Maximiser of ``p -> phi0(p, eps)`` on [0, 1].

    ``(1 - sigma(rho)/rho) / 2 = 1/2 - sqrt(2 eps)/6``. Past ``eps = 4.5`` this
    turns negative, phi0 is decreasing on [0, 1] and the maximiser is 0 (with
    ``phi0(0, eps) < 1``).
    """
    eps = _positive_eps(eps)
    r = 9.0 / (9.0 + 2.0 * eps)
    return _out(np.maximum(0.5 * (1.0 - np.sqrt(r * (1.0 - r)) / r), 0.0))


def phi_interval(p_min, p_max, eps):
    """Supremum of ``phi0(., eps)`` over ``[p_min, p_max]`` via the three-case rule."""
    p_min = float(_as_prob(p_min, "p_min"))
    p_max = float(_as_prob(p_max, "p_max"))
    if p_min > p_max:
        raise ValueError("p_min must not exceed p_max")
    eps = float(_positive_eps(eps))
    r = 9.0 / (9.0 + 2.0 * eps)
    cut = 1.0 - math.sqrt(r * (1.0 - r)) / r
    if 2.0 * p_min <= cut <= 2.0 * p_max:
        return 1.0
    if 2.0 * p_max < cut:
        return phi0(p_max, eps)
    return phi0(p_min, eps)


def delta_fn(r, lam, eps):
    """Chernoff deviation ``(log(1 + lam) + eps) / log(1 + lam / r) - r``.

    Defined for r in (0, 1] and lam > 0; nonnegative there.
    """
    r = np.asarray(r, dtype=float)
    lam = np.asarray(lam, dtype=float)
    eps = _as_rate(eps)
    if np.isnan(r).any() or ((r <= 0.0) | (r > 1.0)).any():
        raise ValueError("r must lie in (0, 1]")
    if np.isnan(lam).any() or (lam <= 0.0).any():
        raise ValueError("lam must be positive")
    val = (np.log1p(lam) + eps) / np.log1p(lam / r) - r
    return _out(np.maximum(val, 0.0))


def delta_dr(r, lam, eps):
    """Partial derivative of :func:`delta_fn` in r."""
    r = np.asarray(r, dtype=float)
    lam = np.asarray(lam, dtype=float)
    lr = np.log1p(lam / r)
    return _out(lam * (eps + np.log1p(lam)) / (r * (lam + r) * lr * lr) - 1.0)


def gamma1(p, lam, eps):
    """Numerator of the lambda-derivative of :func:`delta_fn`.

    ``(p + lam) log(1 + lam/p) - (1 + lam)(eps + log(1 + lam))``, rearranged
    as ``p L1 + lam (log((p+lam)/(p(1+lam))) - eps) - L2 - eps`` to limit
    cancellation at large lam.
    """
    p = np.asarray(p, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if np.isnan(p).any() or ((p <= 0.0) | (p >= 1.0)).any():
        raise ValueError("p must lie in (0, 1)")
    if np.isnan(lam).any() or (lam <= 0.0).any():
        raise ValueError("lam must be positive")
    l1 = np.log1p(lam / p)
    l2 = np.log1p(lam)
    gap = np.log1p(lam * (1.0 - p) / (p * (1.0 + lam)))
    return _out(p * l1 + lam * (gap - eps) - l2 - eps)


def _bisect(f, lo, hi, maxiter, xtol=0.0):
    """Bisect ``f`` on [lo, hi] with ``f(lo) < 0 <= f(hi)``; returns (lo, hi)."""
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= xtol:
            break
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def lambda_lower(p, eps, tol: Tolerances = DEFAULT_TOL):
    """Root in lambda of :func:`gamma1`, i.e. the minimiser of ``delta_fn(p, .)``.

    The bracket starts at ``[tol.lambda_lo, tol.lambda_hi]``; the upper end is
    doubled until ``gamma1`` turns positive.

    Raises
    ------
    NumericalError
        If doubling passes ``tol.lambda_cap`` (p too close to ``exp(-eps)``).
    """
    p = float(p)
    eps = float(eps)
    if not eps > 0.0:
        raise ValueError("eps must be strictly positive")
    if not (0.0 < p < math.exp(-eps)):
        raise ValueError("p must lie in (0, exp(-eps))")

    def g(lam):
        return gamma1(p, lam, eps)

    lo = tol.lambda_lo
    while g(lo) >= 0.0:
        lo *= 0.5
        if lo < 1e-300:
            raise NumericalError("could not bracket lambda from below")
    hi = max(tol.lambda_hi, 2.0 * lo)
    while g(hi) < 0.0:
        lo = hi
        hi *= 2.0
        if hi > tol.lambda_cap:
            raise NumericalError(
                f"lambda bracket exceeded {tol.lambda_cap:g} for p={p!r}, eps={eps!r}"
            )
    lo, hi = _bisect(g, lo, hi, tol.root_maxiter)
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SaddlePoint:
    """Pair (p_star, lambda_star) where inf over lambda meets sup over p."""

    p_star: float
    lambda_star: float
    value: float


def _argmax_r(lam, eps, p_min, p_max, maxiter):
    # delta_fn is strictly concave in r, so the derivative sign locates the max
    if delta_dr(p_min, lam, eps) <= 0.0:
        return p_min
    if delta_dr(p_max, lam, eps) >= 0.0:
        return p_max
    lo, hi = _bisect(lambda r: -delta_dr(r, lam, eps), p_min, p_max, maxiter)
    return 0.5 * (lo + hi)


def saddle_point(p_min, p_max, eps, tol: Tolerances = DEFAULT_TOL):
    """Saddle point of ``delta_fn`` over ``[p_min, p_max] x (0, inf)``.

    Finds p_star with ``argmax_r delta_fn(r, lambda_lower(p_star)) = p_star``
    by bisection. The value equals ``omega(p_star, eps)``, which is also the
    maximum of omega over the range.

    Requires ``0 < p_min <= p_max < exp(-eps)``.
    """
    p_min = float(p_min)
    p_max = float(p_max)
    eps = float(eps)
    if not eps > 0.0:
        raise ValueError("eps must be strictly positive")
    if not (0.0 < p_min <= p_max < math.exp(-eps)):
        raise ValueError("need 0 < p_min <= p_max < exp(-eps)")

    def phi(rr):
        lam = lambda_lower(rr, eps, tol)
        return _argmax_r(lam, eps, p_min, p_max, tol.root_maxiter) - rr

    if p_min == p_max:
        p_star = p_min
    else:
        f_lo, f_hi = phi(p_min), phi(p_max)
        if f_lo < 0.0 or f_hi > 0.0:
            raise NumericalError("no sign change in the saddle equation")
        if f_lo == 0.0:
            p_star = p_min
        elif f_hi == 0.0:
            p_star = p_max
        else:
            lo, hi = _bisect(lambda rr: -phi(rr), p_min, p_max, tol.root_maxiter)
            p_star = lo if abs(phi(lo)) <= abs(phi(hi)) else hi
    lam_star = lambda_lower(p_star, eps, tol)
    return SaddlePoint(p_star, lam_star, delta_fn(p_star, lam_star, eps))


def cor2_exponent(xi, n):
    """Tail bound ``exp(-2 xi^2 - zeta^2/n (1 + 4 zeta/(5n) + 425 zeta^2/(525 n^2)))``.

    ``zeta = 2 xi^2 / 3``. Bounds P{sup sqrt(n)(F_n - F) > xi}.
    """
    xi = np.asarray(xi, dtype=float)
    if np.isnan(xi).any() or (xi < 0.0).any():
        raise ValueError("xi must be nonnegative")
    n = _check_n(n)
    zeta = 2.0 * xi * xi / 3.0
    bracket = 1.0 + 4.0 * zeta / (5.0 * n) + 425.0 * zeta**2 / (525.0 * n * n)
    return _out(np.exp(-2.0 * xi * xi - zeta**2 / n * bracket))


def cor2_threshold(n, delta, tol: Tolerances = DEFAULT_TOL):
    """Solve ``cor2_exponent(xi, n) = delta`` for xi by bisection."""
    n = _check_n(n)
    delta = _check_delta(delta)
    # the exponent lies below exp(-2 xi^2), so the classical xi brackets the root
    hi = math.sqrt(-math.log(delta) / 2.0)
    lo, hi = _bisect(lambda x: delta - cor2_exponent(x, n), 0.0, hi, tol.root_maxiter)
    return 0.5 * (lo + hi)


def adaptive_threshold(p, n, delta, beta):
    """Peeled threshold ``max(beta phi0(p, eps_b) sqrt(eps_b / 2), 1/n)``."""
    beta = _check_beta(beta)
    eb = eps_beta(n, delta, beta)
    return _out(np.maximum(beta * np.asarray(phi0(p, eb)) * math.sqrt(eb / 2.0), 1.0 / n))


def lcb_margin(q, eps, beta):
    """Lower-band margin U(q, eps) turning the peeled threshold into a bound on F.

    ``3b((2q-1)(3b-1)eps + sqrt(eps(18 sigma(q)^2 + eps(3b-1)^2))) / (9 + 2 eps (3b-1)^2)``.
    """
    q = _as_prob(q, "q")
    eps = _as_rate(eps)
    beta = _check_beta(beta)
    c = 3.0 * beta - 1.0
    root = np.sqrt(eps * (18.0 * q * (1.0 - q) + eps * c * c))
    val = 3.0 * beta * ((2.0 * q - 1.0) * c * eps + root) / (9.0 + 2.0 * eps * c * c)
    return _out(np.maximum(val, 0.0))
