"""Empirical CDFs, exact one-sided sup deviations, and lower confidence bands.

Bands are stored at the empirical levels ``q = k/n``, ``k = 0..n``, so the
same band applies to any sample of size n. Evaluate it at a data point t by
looking up the level ``F_n(t)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._config import DEFAULT_TOL, Tolerances
from .bounds import (
    _check_beta,
    _check_delta,
    _check_n,
    cor2_threshold,
    eps_beta,
    eps_rate,
    lcb_margin,
    phi_interval,
)
from .kl import _as_prob, omega

__all__ = [
    "METHODS",
    "EmpiricalCdf",
    "OracleCdf",
    "Uniform01",
    "PiecewiseLinearCdf",
    "DiscreteCdf",
    "StepBand",
    "sup_deviation",
    "band_global",
    "interval_margin",
    "local_threshold",
    "plugin_range",
    "constant_band",
    "band_lower_confidence",
]

METHODS = ("massart", "cor2", "theorem1_local", "cor1_interval", "cor3_adaptive")


class EmpiricalCdf:
    """Right-continuous empirical distribution function of a sample.

    Parameters
    ----------
    samples : array_like
        Finite real observations; ties are allowed.

    Examples
    --------
    >>> F = EmpiricalCdf([1.0, 1.0, 2.0])
    >>> F(1.0)
    0.6666666666666666
    """

    def __init__(self, samples):
        x = np.sort(np.asarray(samples, dtype=float).ravel())
        if x.size == 0:
            raise ValueError("need at least one sample")
        if not np.isfinite(x).all():
            raise ValueError("samples must be finite")
        x.setflags(write=False)
        self._x = x

    @property
    def samples(self):
        return self._x

    @property
    def n(self):
        return self._x.size

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        res = np.searchsorted(self._x, t, side="right") / self.n
        return float(res) if res.ndim == 0 else res

    def __repr__(self):
        return f"EmpiricalCdf(n={self.n})"


class OracleCdf:
    """A known distribution function used by simulations and exact checks."""

    def __call__(self, t):
        raise NotImplementedError


class Uniform01(OracleCdf):
    def __call__(self, t):
        res = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        return float(res) if res.ndim == 0 else res


class PiecewiseLinearCdf(OracleCdf):
    """Continuous CDF interpolating the knots ``(x[i], y[i])``.

    ``y`` must be nondecreasing from 0 to 1; the CDF is 0 left of ``x[0]``
    and 1 right of ``x[-1]``.
    """

    def __init__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape or x.ndim != 1 or x.size < 2:
            raise ValueError("x and y must be 1-d of equal length >= 2")
        if np.any(np.diff(x) <= 0) or np.any(np.diff(y) < 0):
            raise ValueError("x must increase and y must not decrease")
        if y[0] != 0.0 or y[-1] != 1.0:
            raise ValueError("y must run from 0 to 1")
        self.x, self.y = x, y

    def __call__(self, t):
        res = np.interp(np.asarray(t, dtype=float), self.x, self.y)
        return float(res) if res.ndim == 0 else res


class DiscreteCdf(OracleCdf):
    """Step CDF with point masses ``weights`` at ``atoms``."""

    def __init__(self, atoms, weights):
        atoms = np.asarray(atoms, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if atoms.shape != weights.shape or atoms.ndim != 1 or atoms.size == 0:
            raise ValueError("atoms and weights must be 1-d of equal length")
        if (weights < 0).any() or not math.isclose(weights.sum(), 1.0, abs_tol=1e-12):
            raise ValueError("weights must be nonnegative and sum to 1")
        order = np.argsort(atoms)
        self.atoms = atoms[order]
        cum = np.cumsum(weights[order])
        cum[-1] = 1.0
        self.cum = cum

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.atoms, t, side="right")
        res = np.where(idx > 0, self.cum[np.maximum(idx - 1, 0)], 0.0)
        return float(res) if res.ndim == 0 else res


def sup_deviation(ecdf, cdf, interval=None, closed_right=True):
    """Exact ``sup_{t in I} (F_n(t) - F(t))``.

    Both functions are right-continuous and F_n is constant between order
    statistics while F does not decrease, so on each step the supremum sits
    at the step's left end. The candidates are the sample points inside I
    and the left end ``a`` of I. ``F_n(a) - F(a)`` is also the limit from
    the right, so it is used whether or not I contains ``a``. With
    ``a = -inf`` that limit is 0.

    Parameters
    ----------
    ecdf : EmpiricalCdf
    cdf : callable
        Right-continuous distribution function.
    interval : (a, b), optional
        Defaults to the whole real line. ``b`` may be ``inf``.
    closed_right : bool
        Whether ``b`` belongs to the interval.

    Returns
    -------
    float
        The supremum. It can be negative for sub-intervals.
    """
    a, b = (-math.inf, math.inf) if interval is None else map(float, interval)
    if a > b:
        raise ValueError("interval must satisfy a <= b")
    x = ecdf.samples
    n = ecdf.n
    levels = np.arange(1, n + 1) / n
    # last index of each tie group carries the full jump
    last = np.r_[x[1:] != x[:-1], True]
    xs, lv = x[last], levels[last]
    inside = (xs >= a) & ((xs <= b) if closed_right else (xs < b))
    cands = list(lv[inside] - np.asarray(cdf(xs[inside]), dtype=float))
    if math.isinf(a):
        cands.append(0.0)
    else:
        cands.append(ecdf(a) - float(cdf(a)))
    return float(max(cands))


def band_global(n, delta, method="massart", tol: Tolerances = DEFAULT_TOL):
    """Constant margin for the whole real line.

    ``massart`` gives ``sqrt(log(1/delta) / (2n))``. ``cor2`` inverts the
    refined exponent and is strictly smaller.
    """
    n = _check_n(n)
    delta = _check_delta(delta)
    if method == "massart":
        return math.sqrt(-math.log(delta) / (2.0 * n))
    if method == "cor2":
        return cor2_threshold(n, delta, tol) / math.sqrt(n)
    raise ValueError(f"unknown global method {method!r}")


def interval_margin(p_min, p_max, n, delta):
    """Closed-form local margin ``phi(I, eps) sqrt(eps / 2)``, with eps = log(1/delta)/n."""
    eps = eps_rate(n, delta)
    return phi_interval(p_min, p_max, eps) * math.sqrt(eps / 2.0)


def local_threshold(p_min, p_max, n, delta, tol: Tolerances = DEFAULT_TOL):
    """``sup_{p in [p_min, p_max]} omega(p, log(1/delta)/n)``.

    A ``tol.grid_points`` grid is swept, then ``tol.refine_rounds`` rounds
    re-grid the two cells around the current argmax. No unimodality is
    assumed for the coarse pass. The point ``exp(-eps)``, where omega has a
    kink, is added as an exact candidate when it lies in the range.
    """
    p_min = float(_as_prob(p_min, "p_min"))
    p_max = float(_as_prob(p_max, "p_max"))
    if p_min > p_max:
        raise ValueError("p_min must not exceed p_max")
    eps = eps_rate(n, delta)
    if p_min == p_max:
        return omega(p_min, eps, tol)
    lo, hi = p_min, p_max
    best = -math.inf
    seam = math.exp(-eps)
    if p_min <= seam <= p_max:
        # kl(1 || seam) = eps, so omega(seam) = 1 - seam exactly; grids only approach it
        best = 1.0 - seam
    for _ in range(tol.refine_rounds + 1):
        grid = np.linspace(lo, hi, tol.grid_points)
        vals = omega(grid, eps, tol)
        i = int(np.argmax(vals))
        best = max(best, float(vals[i]))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
        if hi <= lo:
            break
    return best


def plugin_range(ecdf, lo, hi):
    """Range of F_n over ``[lo, hi]``, used as a stand-in for the range of F.

    This is a heuristic. The local guarantee is stated for the true F, so a
    data-estimated range carries no coverage promise.
    """
    if lo > hi:
        raise ValueError("lo must not exceed hi")
    # F_n is nondecreasing, so its range over [lo, hi] is [F_n(lo), F_n(hi)]
    p_min = ecdf(lo)
    p_max = ecdf(hi)
    return p_min, p_max


@dataclass(frozen=True)
class StepBand:
    """Lower confidence envelope for F, stored per empirical level ``k/n``.

    ``lower[k]`` bounds F(t) from below wherever ``F_n(t) = k/n``.
    """

    method: str
    n: int
    delta: float
    lower: np.ndarray
    unclamped: np.ndarray
    beta: float | None = None
    margin: float | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        for arr in (self.lower, self.unclamped):
            if arr.shape != (self.n + 1,):
                raise ValueError("need n + 1 knots")

    @property
    def q(self):
        return np.arange(self.n + 1) / self.n

    def __call__(self, ecdf, t):
        """Band value at data point(s) t for the sample behind ``ecdf``."""
        if ecdf.n != self.n:
            raise ValueError("sample size does not match the band")
        k = np.searchsorted(ecdf.samples, np.asarray(t, dtype=float), side="right")
        res = self.lower[k]
        return float(res) if np.ndim(res) == 0 else res

    def to_dict(self, t=None, verbose=False):
        """JSON-ready dict; ``t`` optionally attaches a data coordinate per knot."""
        knots = []
        for k in range(self.n + 1):
            row = {"q": float(self.q[k]), "lower": float(self.lower[k])}
            if verbose:
                row["unclamped"] = float(self.unclamped[k])
            if t is not None:
                row["t"] = None if t[k] is None else float(t[k])
            knots.append(row)
        out = {"method": self.method, "n": self.n, "delta": self.delta}
        if self.beta is not None:
            out["beta"] = self.beta
        if self.margin is not None:
            out["margin"] = self.margin
        out.update(self.extra)
        out["knots"] = knots
        return out

    def to_json(self, **kwargs):
        return _dumps(self.to_dict(**kwargs))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["q", "lower", "unclamped"])
        for q, lo, un in zip(self.q, self.lower, self.unclamped):
            w.writerow([_fmt17(q), _fmt17(lo), _fmt17(un)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, method, delta, beta=None, margin=None):
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["q", "lower", "unclamped"]:
            raise ValueError("not a band CSV")
        body = np.array([[float(v) for v in r] for r in rows[1:]])
        return cls(method, body.shape[0] - 1, delta, body[:, 1], body[:, 2], beta, margin)

    @classmethod
    def from_dict(cls, d):
        knots = d["knots"]
        lower = np.array([k["lower"] for k in knots], dtype=float)
        unclamped = np.array([k.get("unclamped", k["lower"]) for k in knots], dtype=float)
        known = {"method", "n", "delta", "beta", "margin", "knots"}
        extra = {k: v for k, v in d.items() if k not in known}
        return cls(d["method"], int(d["n"]), float(d["delta"]), lower, unclamped,
                   d.get("beta"), d.get("margin"), extra)


def _fmt17(x):
    # repr is the shortest string that reads back to the same double
    return repr(float(x))


def _dumps(obj, indent=None):
    return json.dumps(obj, indent=indent)


def constant_band(n, margin, method, delta, extra=None):
    """Lower band ``clamp(k/n - margin, 0, 1)``."""
    n = _check_n(n)
    q = np.arange(n + 1) / n
    raw = q - margin
    return StepBand(method, n, delta, np.clip(raw, 0.0, 1.0), raw, margin=margin,
                    extra=extra or {})


def band_lower_confidence(n, delta, beta):
    """Variance-adaptive simultaneous lower band from the peeled bound.

    ``lower[k] = clamp(q - max(U(q, eps_beta), 1/n), 0, 1)`` with ``q = k/n``.
    Takes an :class:`EmpiricalCdf` or a sample size. A running maximum makes
    the knots nondecreasing; on every grid checked it changes nothing.
    """
    if isinstance(n, EmpiricalCdf):
        n = n.n
    n = _check_n(n, minimum=2)
    delta = _check_delta(delta)
    beta = _check_beta(beta)
    eb = eps_beta(n, delta, beta)
    q = np.arange(n + 1) / n
    raw = q - np.maximum(lcb_margin(q, eb, beta), 1.0 / n)
    lower = np.maximum.accumulate(np.clip(raw, 0.0, 1.0))
    return StepBand("cor3_adaptive", n, delta, lower, raw, beta=beta,
                    extra={"eps_beta": eb})
