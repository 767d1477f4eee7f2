"""Bernoulli KL divergence, its inversion, and closed-form lower bounds.

All functions accept scalars or array-likes and broadcast; scalar inputs
give Python floats back.
"""

from __future__ import annotations

import numpy as np

from ._config import DEFAULT_TOL, Tolerances

__all__ = [
    "kl_bernoulli",
    "omega",
    "kl_lower_bernstein",
    "kl_lower_series",
]


def _as_prob(x, name):
    arr = np.asarray(x, dtype=float)
    if np.isnan(arr).any():
        raise ValueError(f"{name} must not be NaN")
    if ((arr < 0.0) | (arr > 1.0)).any():
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")
    return arr


def _as_rate(x, name="eps"):
    arr = np.asarray(x, dtype=float)
    if np.isnan(arr).any():
        raise ValueError(f"{name} must not be NaN")
    if (~np.isfinite(arr)).any() or (arr < 0.0).any():
        raise ValueError(f"{name} must be finite and nonnegative, got {x!r}")
    return arr


def _out(arr):
    arr = np.asarray(arr, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


def _phi1(x):
    # (1 + x) log1p(x) - x, nonnegative; series near 0 avoids cancellation
    x = np.asarray(x, dtype=float)
    small = np.abs(x) <= 0.05
    xs = np.where(small, x, 0.0)
    series = np.zeros_like(xs)
    for k in range(18, 1, -1):
        series = xs * (series + (-1.0) ** k / (k * (k - 1)) * xs)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (1.0 + x) * np.log1p(x) - x
    # 0 log 0 = 0 at x = -1
    direct = np.where(x == -1.0, 1.0, direct)
    return np.where(small, series, direct)


def kl_bernoulli(a, b):
    """KL divergence kl(a || b) between Bernoulli(a) and Bernoulli(b).

    Uses ``0 log 0 = 0 log(0/0) = 0`` and ``z log(z/0) = inf`` for ``z > 0``.
    When a and b are within a factor of two of each other (in both the
    success and failure parameterisations) the divergence is evaluated as
    ``b f(a/b) + (1-b) f((1-a)/(1-b))`` with ``f(u) = u log u - u + 1``, a sum
    of nonnegative terms. Otherwise ``x log1p(d / y)`` terms are used.

    Parameters
    ----------
    a, b : float or array_like
        Success probabilities in [0, 1].

    Returns
    -------
    float or ndarray
        Nonnegative divergence, possibly ``inf``.

    Examples
    --------
    >>> bool(np.isclose(kl_bernoulli(1.0, 0.25), np.log(4.0)))
    True
    >>> kl_bernoulli(0.3, 0.0)
    inf
    """
    a = _as_prob(a, "a")
    b = _as_prob(b, "b")
    a, b = np.broadcast_arrays(a, b)
    ca = 1.0 - a
    cb = 1.0 - b
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        x1 = (a - b) / b
        x2 = (b - a) / cb
        t1 = a * np.log1p(x1)
        t2 = ca * np.log1p(x2)
        near = (np.abs(x1) <= 1.0) & (np.abs(x2) <= 1.0)
        sym = b * _phi1(np.where(near, x1, 0.0)) + cb * _phi1(np.where(near, x2, 0.0))
    t1 = np.where(a == 0.0, 0.0, np.where(b == 0.0, np.inf, t1))
    t2 = np.where(ca == 0.0, 0.0, np.where(cb == 0.0, np.inf, t2))
    res = np.where(near, sym, np.maximum(t1 + t2, 0.0))
    res = np.where(a == b, 0.0, res)
    return _out(res)


def omega(p, eps, tol: Tolerances = DEFAULT_TOL):
    """Largest upward deviation eta with kl(p + eta || p) <= eps.

    For ``p`` in ``(0, exp(-eps)]`` this is the unique root of
    ``kl(p + eta || p) = eps`` on ``[0, 1 - p]``, found by bisection to
    absolute tolerance ``tol.omega_tol``. Above ``exp(-eps)`` no deviation
    reaches ``eps`` and the result is ``1 - p``; at ``p = 0`` it is 0.

    Parameters
    ----------
    p : float or array_like
        Base probability in [0, 1].
    eps : float or array_like
        Rate budget, finite and nonnegative.
    tol : Tolerances, optional

    Returns
    -------
    float or ndarray
        Values in ``[0, 1 - p]``.
    """
    p = _as_prob(p, "p")
    eps = _as_rate(eps)
    p, eps = np.broadcast_arrays(p, eps)
    seam = np.exp(-eps)
    out = np.where(p > seam, 1.0 - p, 0.0)
    inner = (p > 0.0) & (p <= seam) & (eps > 0.0)
    if inner.any():
        pi = p[inner]
        ei = eps[inner]
        lo = np.zeros_like(pi)
        hi = 1.0 - pi
        for _ in range(tol.omega_maxiter):
            if np.all(hi - lo <= tol.omega_tol):
                break
            mid = 0.5 * (lo + hi)
            below = kl_bernoulli(np.minimum(pi + mid, 1.0), pi) < ei
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out[inner] = np.clip(0.5 * (lo + hi), 0.0, 1.0 - pi)
    return _out(out)


def kl_lower_bernstein(p, eta):
    """Bernstein-type lower bound ``eta^2 / (2 (p + eta/3)(1 - p - eta/3))`` on kl(p + eta || p).

    Requires ``0 < p < 1`` and ``0 <= eta <= 1 - p``.
    """
    p = np.asarray(p, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if np.isnan(p).any() or ((p <= 0.0) | (p >= 1.0)).any():
        raise ValueError("p must lie in (0, 1)")
    p, eta = np.broadcast_arrays(p, eta)
    if np.isnan(eta).any() or ((eta < 0.0) | (eta > 1.0 - p)).any():
        raise ValueError("eta must lie in [0, 1 - p]")
    return _out(eta**2 / (2.0 * (p + eta / 3.0) * (1.0 - p - eta / 3.0)))


def kl_lower_series(eta):
    """Four-term refined Pinsker bound on kl(p + eta || p), uniform in p.

    ``2 eta^2 + 4 eta^4/9 + 32 eta^6/135 + 7072 eta^8/42525`` for eta in [0, 1].
    """
    eta = np.asarray(eta, dtype=float)
    if np.isnan(eta).any() or ((eta < 0.0) | (eta > 1.0)).any():
        raise ValueError("eta must lie in [0, 1]")
    e2 = eta * eta
    return _out(
        2.0 * e2
        + 4.0 * e2**2 / 9.0
        + 32.0 * e2**3 / 135.0
        + 7072.0 * e2**4 / 42525.0
    )
