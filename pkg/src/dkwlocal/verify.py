"""Exact and Monte Carlo checks of the coverage guarantees.

Simulations draw uniform(0, 1) samples: every bound here depends on F only
through its values, so the uniform case covers all continuous F.

Replicates are grouped into fixed blocks of ``BLOCK`` draws, and block ``b``
gets its own Philox stream keyed by ``SeedSequence(seed, spawn_key=(b,))``.
Counts are integer sums over blocks. Results therefore depend only on
``(seed, config)``, whatever the worker count.
"""

from __future__ import annotations

import decimal
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from decimal import Decimal

import numpy as np

from ._config import DEFAULT_TOL, Tolerances
from .bands import band_global, interval_margin, local_threshold
from .bounds import _check_beta, _check_delta, _check_n, eps_beta, eps_rate, phi0
from .kl import _as_prob, omega

__all__ = [
    "BLOCK",
    "SimConfig",
    "SimReport",
    "MartingaleEstimate",
    "N1Check",
    "binomial_tail",
    "binomial_exact_pointwise",
    "threshold_for",
    "coverage_sim",
    "martingale_exact_mean",
    "martingale_mean_check",
    "n1_exact_check",
]

BLOCK = 1024

SIM_METHODS = ("massart", "cor2", "theorem1_local", "cor1_interval", "cor3_adaptive")


def binomial_tail(n, p, k_min):
    """P{B >= k_min} for B ~ Binomial(n, p).

    Terms run through ``decimal`` at 50 digits with the recurrence
    ``b_{k+1} = b_k (n-k)/(k+1) p/(1-p)``. ``Decimal(p)`` and ``1 - Decimal(p)``
    are exact and the decimal exponent range is unbounded, so deep tails
    neither underflow nor lose digits; the sum is rounded to double once.
    """
    n = _check_n(n, minimum=0)
    p = float(_as_prob(p, "p"))
    k_min = max(int(k_min), 0)
    if k_min > n:
        return 0.0
    if k_min == 0 or p == 1.0:
        return 1.0
    if p == 0.0:
        return 0.0
    with decimal.localcontext() as ctx:
        ctx.prec = 50
        ctx.Emin = decimal.MIN_EMIN
        ctx.Emax = decimal.MAX_EMAX
        dp = Decimal(p)
        dq = 1 - dp
        ratio = dp / dq
        term = Decimal(math.comb(n, k_min)) * dp**k_min * dq ** (n - k_min)
        total = term
        for k in range(k_min, n):
            term = term * (n - k) / (k + 1) * ratio
            total += term
        return min(float(total), 1.0)


def binomial_exact_pointwise(n, p, delta, tol: Tolerances = DEFAULT_TOL):
    """Exact P{F_n(t) - F(t) > omega(F(t), eps)} at a single t with F(t) = p.

    The event is ``B > n (p + omega(p, eps))`` with B ~ Binomial(n, p) and
    eps = log(1/delta)/n; the local bound promises the result is <= delta.
    """
    n = _check_n(n)
    p = float(_as_prob(p, "p"))
    delta = _check_delta(delta)
    eps = eps_rate(n, delta)
    if p == 0.0 or p > math.exp(-eps):
        # omega = 0 at p = 0 and 1 - p above the seam: exceedance impossible
        return 0.0
    x = n * (p + omega(p, eps, tol))
    return binomial_tail(n, p, math.floor(x) + 1)


@dataclass(frozen=True)
class SimConfig:
    """One coverage scenario.

    ``p_range`` is the range ``(p_min, p_max)`` of F over the interval, used
    by ``theorem1_local`` and ``cor1_interval``. Under uniform F it is also
    the interval itself. ``beta`` is needed by ``cor3_adaptive`` only.
    """

    method: str
    n: int
    delta: float
    reps: int
    seed: int
    beta: float | None = None
    p_range: tuple[float, float] | None = None

    def __post_init__(self):
        if self.method not in SIM_METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        _check_n(self.n, minimum=2 if self.method == "cor3_adaptive" else 1)
        _check_delta(self.delta)
        _check_n(self.reps)
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not (0 <= self.seed < 2**64):
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.method == "cor3_adaptive":
            if self.beta is None:
                raise ValueError("cor3_adaptive needs beta")
            _check_beta(self.beta)
        if self.method in ("theorem1_local", "cor1_interval"):
            if self.p_range is None:
                object.__setattr__(self, "p_range", (0.0, 1.0))
            lo, hi = (float(v) for v in self.p_range)
            if not (0.0 <= lo <= hi <= 1.0):
                raise ValueError("p_range must satisfy 0 <= p_min <= p_max <= 1")
            object.__setattr__(self, "p_range", (lo, hi))


@dataclass(frozen=True)
class SimReport:
    """Exceedance count and estimate for one :class:`SimConfig`."""

    method: str
    n: int
    delta: float
    reps: int
    exceed_count: int
    estimate: float
    stderr: float
    seed: int
    threshold: float | None
    beta: float | None = None
    p_range: tuple[float, float] | None = None
    wall_time: float = 0.0

    def to_dict(self, timing=False):
        d = asdict(self)
        if d["p_range"] is not None:
            d["p_range"] = list(d["p_range"])
        if not timing:
            d.pop("wall_time")
        return d


def threshold_for(cfg: SimConfig, tol: Tolerances = DEFAULT_TOL):
    """Constant threshold of the configured method (None for the adaptive one)."""
    if cfg.method in ("massart", "cor2"):
        return band_global(cfg.n, cfg.delta, cfg.method, tol)
    if cfg.method == "theorem1_local":
        return local_threshold(*cfg.p_range, cfg.n, cfg.delta, tol)
    if cfg.method == "cor1_interval":
        return interval_margin(*cfg.p_range, cfg.n, cfg.delta)
    return None


def _block_rng(seed, block):
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def _block_sizes(reps):
    full, rest = divmod(reps, BLOCK)
    return [BLOCK] * full + ([rest] if rest else [])


def _count_block(args):
    method, n, block, size, seed, threshold, p_range, beta, eb = args
    u = np.sort(_block_rng(seed, block).random((size, n)), axis=1)
    lv = np.arange(1, n + 1) / n
    if method in ("massart", "cor2"):
        dev = np.maximum((lv - u).max(axis=1), 0.0)
        return int((dev > threshold).sum())
    if method in ("theorem1_local", "cor1_interval"):
        a, b = p_range
        inside = (u >= a) & (u <= b)
        jumps = np.where(inside, lv - u, -np.inf).max(axis=1)
        # F_n(a) - F(a), the value approached at the left end of the interval
        left = (u <= a).sum(axis=1) / n - a
        dev = np.maximum(jumps, left)
        return int((dev > threshold).sum())
    # cor3_adaptive: on the step [u_i, u_{i+1}) F_n = i/n, and violation needs
    # t < (i-1)/n for the 1/n floor; i/n - t - c(t) is convex (c concave), so
    # both ends of the admissible piece settle the question
    scale = beta * math.sqrt(eb / 2.0)
    right = np.concatenate([u[:, 1:], np.ones((size, 1))], axis=1)
    r = np.minimum(right, (lv - 1.0 / n)[None, :])
    ok = r > u
    g_left = lv - u - scale * phi0(u, eb)
    rc = np.clip(r, 0.0, 1.0)
    g_right = lv - rc - scale * phi0(rc, eb)
    hit = ok & ((g_left > 0.0) | (g_right > 0.0))
    return int(hit.any(axis=1).sum())


def coverage_sim(cfg: SimConfig, workers=1, tol: Tolerances = DEFAULT_TOL):
    """Monte Carlo frequency of the method's exceedance event.

    Each replicate draws ``cfg.n`` uniforms and decides the event exactly:
    the one-sided sup deviation over the interval is compared with the
    constant threshold, or for ``cor3_adaptive`` the pointwise threshold is
    checked on every step of the empirical CDF.
    """
    start = time.perf_counter()
    thr = threshold_for(cfg, tol)
    eb = eps_beta(cfg.n, cfg.delta, cfg.beta) if cfg.method == "cor3_adaptive" else None
    jobs = [
        (cfg.method, cfg.n, b, size, int(cfg.seed), thr, cfg.p_range, cfg.beta, eb)
        for b, size in enumerate(_block_sizes(cfg.reps))
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            counts = list(ex.map(_count_block, jobs))
    else:
        counts = [_count_block(j) for j in jobs]
    hits = sum(counts)
    est = hits / cfg.reps
    return SimReport(
        method=cfg.method,
        n=cfg.n,
        delta=cfg.delta,
        reps=cfg.reps,
        exceed_count=hits,
        estimate=est,
        stderr=math.sqrt(est * (1.0 - est) / cfg.reps),
        seed=int(cfg.seed),
        threshold=thr,
        beta=cfg.beta,
        p_range=cfg.p_range,
        wall_time=time.perf_counter() - start,
    )


def martingale_exact_mean(n, lam, f):
    """E[M_lam(t)] as a finite binomial sum, with F(t) = f; equals 1."""
    n = _check_n(n)
    total = 0.0
    for k in range(n + 1):
        total += math.comb(n, k) * f**k * (1.0 - f) ** (n - k) * (1.0 + lam / f) ** k
    return total / (1.0 + lam) ** n


@dataclass(frozen=True)
class MartingaleEstimate:
    t: float
    estimate: float
    stderr: float


def _martingale_block(args):
    n, lam, ts, block, size, seed = args
    u = _block_rng(seed, block).random((size, n))
    counts = (u[:, :, None] <= ts[None, None, :]).sum(axis=1)
    logm = counts * np.log1p(lam / ts)[None, :] - n * math.log1p(lam)
    m = np.exp(logm)
    return m.sum(axis=0), (m * m).sum(axis=0)


def martingale_mean_check(n, lam, t_values, reps, seed, workers=1):
    """Monte Carlo mean of ``M(t) = (1+lam)^-n (1 + lam/F(t))^(n F_n(t))``.

    Uses uniform F, so F(t) = t; every t shares the same samples. The mean
    is exactly 1 for all t > 0.
    """
    n = _check_n(n)
    reps = _check_n(reps)
    if not lam > 0:
        raise ValueError("lam must be positive")
    ts = np.asarray(t_values, dtype=float).ravel()
    if ts.size == 0 or ((ts <= 0.0) | (ts > 1.0)).any() or np.isnan(ts).any():
        raise ValueError("t values must lie in (0, 1]")
    jobs = [(n, float(lam), ts, b, size, int(seed)) for b, size in enumerate(_block_sizes(reps))]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_martingale_block, jobs))
    else:
        parts = [_martingale_block(j) for j in jobs]
    s1 = np.sum([p[0] for p in parts], axis=0)
    s2 = np.sum([p[1] for p in parts], axis=0)
    mean = s1 / reps
    var = np.maximum(s2 / reps - mean**2, 0.0) * reps / max(reps - 1, 1)
    se = np.sqrt(var / reps)
    return [MartingaleEstimate(float(t), float(m), float(s)) for t, m, s in zip(ts, mean, se)]


@dataclass(frozen=True)
class N1Check:
    method: str
    delta: float
    margin: float
    exact: float

    @property
    def ok(self):
        # theorem1_local is tight at n = 1 (margin 1 - delta), so allow rounding
        return self.exact <= self.delta * (1.0 + 1e-12)


def n1_exact_check(method, delta, tol: Tolerances = DEFAULT_TOL):
    """Compare a method's n = 1 margin with the exact exceedance law.

    For one uniform draw X, ``sup_t (F_1(t) - t) = 1 - X``, so
    ``P{sup > x} = 1 - x`` on [0, 1].
    """
    delta = _check_delta(delta)
    if method in ("massart", "cor2"):
        margin = band_global(1, delta, method, tol)
    elif method == "theorem1_local":
        margin = local_threshold(0.0, 1.0, 1, delta, tol)
    elif method == "cor1_interval":
        margin = interval_margin(0.0, 1.0, 1, delta)
    else:
        raise ValueError(f"no n = 1 law for method {method!r}")
    exact = min(max(1.0 - margin, 0.0), 1.0)
    return N1Check(method, delta, margin, exact)
