import json
import math
from fractions import Fraction

import numpy as np
import pytest

from dkwlocal import (
    EmpiricalCdf,
    SimConfig,
    Uniform01,
    adaptive_threshold,
    binomial_exact_pointwise,
    binomial_tail,
    coverage_sim,
    eps_rate,
    martingale_exact_mean,
    martingale_mean_check,
    n1_exact_check,
    omega,
    sup_deviation,
)
from dkwlocal.verify import BLOCK, _block_rng, _count_block, eps_beta


def _tail_fraction(n, p, k_min):
    fp = Fraction(p)
    return sum(math.comb(n, k) * fp**k * (1 - fp) ** (n - k) for k in range(k_min, n + 1))


def test_binomial_tail_matches_exact_rationals():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(150):
        n = int(rng.integers(1, 201))
        p = float(rng.random())
        k = int(rng.integers(0, n + 1))
        ref = _tail_fraction(n, p, k)
        got = binomial_tail(n, p, k)
        if ref:
            worst = max(worst, abs(Fraction(got) - ref) / ref)
    assert worst <= 1e-14


def test_binomial_tail_edges():
    assert binomial_tail(10, 0.3, 0) == 1.0
    assert binomial_tail(10, 0.3, 11) == 0.0
    assert binomial_tail(10, 0.0, 1) == 0.0
    assert binomial_tail(10, 1.0, 10) == 1.0
    # intermediate powers underflow a double; the tail itself does not
    ref = _tail_fraction(1000, 0.01, 200)
    assert binomial_tail(1000, 0.01, 200) == pytest.approx(float(ref), rel=1e-14)
    assert 0.0 < binomial_tail(1000, 0.01, 200) < 1e-100


def test_binomial_exact_pointwise_pinned():
    # n=10, p=0.5, delta=0.1: k_min = 9, P{B >= 9} = 11/1024
    assert binomial_exact_pointwise(10, 0.5, 0.1) == 0.0107421875


def test_binomial_exact_pointwise_branches():
    assert binomial_exact_pointwise(10, 0.0, 0.1) == 0.0
    eps = eps_rate(10, 0.1)
    assert binomial_exact_pointwise(10, math.exp(-eps) + 1e-9, 0.1) == 0.0
    assert binomial_exact_pointwise(10, 1.0, 0.1) == 0.0


def test_binomial_exact_pointwise_threshold():
    n, p, delta = 37, 0.23, 0.05
    eps = eps_rate(n, delta)
    k_min = math.floor(n * (p + omega(p, eps))) + 1
    assert binomial_exact_pointwise(n, p, delta) == binomial_tail(n, p, k_min)


def test_sim_config_validation():
    with pytest.raises(ValueError):
        SimConfig("nope", 10, 0.1, 10, 0)
    with pytest.raises(ValueError):
        SimConfig("massart", 0, 0.1, 10, 0)
    with pytest.raises(ValueError):
        SimConfig("massart", 10, 1.5, 10, 0)
    with pytest.raises(ValueError):
        SimConfig("massart", 10, 0.1, 0, 0)
    with pytest.raises(ValueError):
        SimConfig("massart", 10, 0.1, 10, -1)
    with pytest.raises(ValueError):
        SimConfig("cor3_adaptive", 10, 0.1, 10, 0)
    with pytest.raises(ValueError):
        SimConfig("theorem1_local", 10, 0.1, 10, 0, p_range=(0.5, 0.2))
    assert SimConfig("theorem1_local", 10, 0.1, 10, 0).p_range == (0.0, 1.0)


@pytest.mark.parametrize(
    "cfg",
    [
        SimConfig("massart", 30, 0.2, 3000, 1),
        SimConfig("theorem1_local", 30, 0.2, 3000, 2, p_range=(0.1, 0.5)),
        SimConfig("cor1_interval", 30, 0.2, 3000, 3, p_range=(0.0, 0.3)),
    ],
)
def test_coverage_counts_match_sup_deviation(cfg):
    # replay the block generators and decide each replicate with sup_deviation
    from dkwlocal.verify import threshold_for

    thr = threshold_for(cfg)
    u = Uniform01()
    hits = 0
    done = 0
    block = 0
    while done < cfg.reps:
        size = min(BLOCK, cfg.reps - done)
        x = _block_rng(cfg.seed, block).random((size, cfg.n))
        for row in x:
            interval = None if cfg.p_range is None else cfg.p_range
            hits += sup_deviation(EmpiricalCdf(row), u, interval) > thr
        done += size
        block += 1
    assert coverage_sim(cfg).exceed_count == hits


def test_cor3_exact_check_matches_dense_grid():
    n, delta, beta, seed = 20, 0.9, 1.1, 5
    eb = eps_beta(n, delta, beta)
    x = np.sort(_block_rng(seed, 0).random((BLOCK, n)), axis=1)
    grid = np.linspace(0.0, 1.0, 200_001)
    hits = 0
    for row in x:
        t = np.union1d(grid, row)
        fn = np.searchsorted(row, t, side="right") / n
        hits += bool(np.any(fn - t > adaptive_threshold(t, n, delta, beta)))
    got = _count_block(("cor3_adaptive", n, 0, BLOCK, seed, None, None, beta, eb))
    assert hits > 0
    assert got == hits


def test_coverage_small_runs_are_valid():
    for cfg in (
        SimConfig("massart", 50, 0.1, 20_000, 11),
        SimConfig("cor2", 50, 0.1, 20_000, 12),
        SimConfig("theorem1_local", 50, 0.1, 20_000, 13, p_range=(0.0, 0.25)),
        SimConfig("cor3_adaptive", 200, 0.1, 5_000, 14, beta=1.1),
    ):
        rep = coverage_sim(cfg)
        assert rep.estimate <= cfg.delta + 3 * rep.stderr + 1e-12


def test_coverage_report_fields():
    cfg = SimConfig("cor2", 10, 0.3, 2500, 99)
    rep = coverage_sim(cfg)
    d = rep.to_dict()
    assert "wall_time" not in d
    assert "wall_time" in rep.to_dict(timing=True)
    assert d["exceed_count"] == round(d["estimate"] * 2500)
    assert d["stderr"] == pytest.approx(math.sqrt(rep.estimate * (1 - rep.estimate) / 2500))


def test_coverage_deterministic_across_workers():
    cfg = SimConfig("theorem1_local", 40, 0.1, 5000, 2024, p_range=(0.4, 0.6))
    serial = json.dumps(coverage_sim(cfg).to_dict())
    assert json.dumps(coverage_sim(cfg, workers=3).to_dict()) == serial
    assert json.dumps(coverage_sim(cfg).to_dict()) == serial


def test_seeds_change_the_draws():
    a = coverage_sim(SimConfig("massart", 20, 0.5, 4000, 1)).exceed_count
    b = coverage_sim(SimConfig("massart", 20, 0.5, 4000, 2)).exceed_count
    assert a != b


def test_martingale_exact_mean():
    assert martingale_exact_mean(5, 1.0, 0.5) == pytest.approx(1.0, abs=1e-14)
    for n, lam, f in [(1, 0.1, 0.9), (10, 3.0, 0.2), (30, 0.5, 0.7)]:
        assert martingale_exact_mean(n, lam, f) == pytest.approx(1.0, abs=1e-13)


def test_martingale_mc_small():
    est = martingale_mean_check(5, 1.0, [0.5, 0.9], 50_000, seed=8)
    for e in est:
        assert abs(e.estimate - 1.0) <= 4 * e.stderr


def test_martingale_deterministic_across_workers():
    a = martingale_mean_check(4, 0.5, [0.3], 5000, seed=1)
    b = martingale_mean_check(4, 0.5, [0.3], 5000, seed=1, workers=2)
    assert a == b


def test_martingale_rejects():
    with pytest.raises(ValueError):
        martingale_mean_check(5, 0.0, [0.5], 10, 0)
    with pytest.raises(ValueError):
        martingale_mean_check(5, 1.0, [0.0], 10, 0)


def test_n1_massart_example():
    rec = n1_exact_check("massart", 0.3)
    assert rec.margin == pytest.approx(math.sqrt(math.log(1 / 0.3) / 2), rel=1e-15)
    assert rec.margin == pytest.approx(0.7759, abs=1e-4)
    assert rec.exact == pytest.approx(0.2241, abs=1e-4)
    assert rec.ok


@pytest.mark.parametrize("method", ["massart", "cor2", "theorem1_local", "cor1_interval"])
@pytest.mark.parametrize("delta", [0.01, 0.1, 0.3, 0.5, 0.9, 0.999])
def test_n1_all_methods_valid(method, delta):
    assert n1_exact_check(method, delta).ok


def test_n1_limit_delta_to_one():
    rec = n1_exact_check("cor2", 1 - 1e-9)
    assert rec.margin < 1e-3
    assert rec.exact > 0.999


def test_n1_rejects_adaptive():
    with pytest.raises(ValueError):
        n1_exact_check("cor3_adaptive", 0.1)
