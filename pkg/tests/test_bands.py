import json
import math

import numpy as np
import pytest

from dkwlocal import (
    DiscreteCdf,
    EmpiricalCdf,
    PiecewiseLinearCdf,
    StepBand,
    Uniform01,
    band_global,
    band_lower_confidence,
    constant_band,
    cor2_threshold,
    eps_beta,
    eps_rate,
    interval_margin,
    lcb_margin,
    local_threshold,
    omega,
    phi0,
    plugin_range,
    sup_deviation,
)


def test_ecdf_examples():
    f = EmpiricalCdf([3, 1, 2])
    assert f(2) == pytest.approx(2 / 3)
    assert f(0.5) == 0.0
    assert f(3) == 1.0
    assert EmpiricalCdf([1, 1, 2])(1) == pytest.approx(2 / 3)
    assert f.n == 3
    assert list(f.samples) == [1, 2, 3]


def test_ecdf_rejects():
    with pytest.raises(ValueError):
        EmpiricalCdf([])
    with pytest.raises(ValueError):
        EmpiricalCdf([1.0, math.nan])


def test_ecdf_samples_read_only():
    f = EmpiricalCdf([0.2, 0.1])
    with pytest.raises(ValueError):
        f.samples[0] = 5.0


def test_oracle_cdfs():
    u = Uniform01()
    assert u(-1) == 0 and u(0.25) == 0.25 and u(3) == 1
    pl = PiecewiseLinearCdf([0, 1, 2], [0, 0.8, 1])
    assert pl(0.5) == pytest.approx(0.4)
    assert pl(1.5) == pytest.approx(0.9)
    d = DiscreteCdf([0, 1], [0.3, 0.7])
    assert d(-0.1) == 0 and d(0) == pytest.approx(0.3) and d(0.99) == pytest.approx(0.3)
    assert d(1) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        PiecewiseLinearCdf([0, 1], [0, 0.9])
    with pytest.raises(ValueError):
        DiscreteCdf([0, 1], [0.5, 0.6])


def test_sup_deviation_examples():
    u = Uniform01()
    assert sup_deviation(EmpiricalCdf([0.3]), u) == pytest.approx(0.7)
    assert sup_deviation(EmpiricalCdf([0.1, 0.5]), u) == pytest.approx(0.5)
    # F = 1 on the range: the sup is reported as computed, here negative
    d = sup_deviation(EmpiricalCdf([0.2, 0.4, 3.0]), u, interval=(1.0, 2.0))
    assert d == pytest.approx(2 / 3 - 1)


def _brute(ecdf, cdf, lo, hi, m):
    grid = np.union1d(np.linspace(lo, hi, m), ecdf.samples[(ecdf.samples >= lo) & (ecdf.samples <= hi)])
    fn = np.searchsorted(ecdf.samples, grid, side="right") / ecdf.n
    return float(np.max(fn - cdf(grid)))


def test_sup_deviation_matches_brute_force_uniform():
    rng = np.random.default_rng(7)
    u = Uniform01()
    for _ in range(100):
        n = int(rng.integers(1, 60))
        e = EmpiricalCdf(rng.random(n))
        brute = max(_brute(e, u, 0.0, 1.0, 10**6), 0.0)
        assert sup_deviation(e, u) == pytest.approx(brute, abs=1e-12)


def test_sup_deviation_matches_brute_force_piecewise_and_discrete():
    rng = np.random.default_rng(11)
    pl = PiecewiseLinearCdf([0, 0.2, 0.5, 1.0], [0, 0.6, 0.7, 1.0])
    d = DiscreteCdf([0.1, 0.4, 0.7], [0.2, 0.5, 0.3])
    for cdf in (pl, d):
        for _ in range(30):
            n = int(rng.integers(1, 40))
            x = rng.choice([0.1, 0.4, 0.7], n) if cdf is d else rng.random(n)
            e = EmpiricalCdf(x)
            brute = max(_brute(e, cdf, -0.5, 1.5, 200_001), 0.0)
            assert sup_deviation(e, cdf) == pytest.approx(brute, abs=1e-12)


def test_sup_deviation_subintervals():
    u = Uniform01()
    e = EmpiricalCdf([0.1, 0.3, 0.6, 0.9])
    # [0.2, 0.6]: candidates a=0.2 (0.25-0.2), 0.3 (0.5-0.3), 0.6 (0.75-0.6)
    assert sup_deviation(e, u, (0.2, 0.6)) == pytest.approx(0.2)
    # open at 0.6 drops that jump but keeps the left limit there
    assert sup_deviation(e, u, (0.2, 0.6), closed_right=False) == pytest.approx(0.2)
    assert sup_deviation(e, u, (0.55, 0.6), closed_right=False) == pytest.approx(0.5 - 0.55)
    with pytest.raises(ValueError):
        sup_deviation(e, u, (0.5, 0.4))


def test_sup_deviation_ties():
    u = Uniform01()
    e = EmpiricalCdf([0.2, 0.2, 0.2, 0.9])
    assert sup_deviation(e, u) == pytest.approx(0.75 - 0.2)


def test_band_global():
    assert band_global(2, math.exp(-1)) == pytest.approx(0.5, rel=1e-15)
    assert band_global(100, 0.05, "cor2") == pytest.approx(cor2_threshold(100, 0.05) / 10, rel=1e-15)
    for n in (1, 5, 100, 10**4):
        for delta in (0.5, 0.1, 1e-3):
            assert band_global(n, delta, "cor2") < band_global(n, delta, "massart")
    with pytest.raises(ValueError):
        band_global(10, 0.1, "theorem1_local")


def test_interval_margin_matches_phi():
    eps = eps_rate(100, 0.1)
    assert interval_margin(0.0, 1.0, 100, 0.1) == pytest.approx(math.sqrt(eps / 2))
    assert interval_margin(0.0, 0.1, 100, 0.1) == pytest.approx(phi0(0.1, eps) * math.sqrt(eps / 2))


def test_local_threshold_point_range():
    eps = eps_rate(50, 0.2)
    assert local_threshold(0.3, 0.3, 50, 0.2) == omega(0.3, eps)


def test_local_threshold_upper_branch():
    n, delta = 20, 0.1
    eps = eps_rate(n, delta)
    assert local_threshold(math.exp(-eps), 1.0, n, delta) == pytest.approx(1 - math.exp(-eps), abs=1e-12)


def test_local_threshold_pinned():
    # omega is increasing on [0.1, 0.4] at eps = log(10)/100; 10^6-point grid agrees
    assert local_threshold(0.1, 0.4, 100, 0.1) == pytest.approx(0.10625596942795916, abs=1e-12)


def test_local_threshold_matches_dense_grid():
    n, delta = 100, 0.1
    eps = eps_rate(n, delta)
    p = np.linspace(0.0, 1.0, 10**6)
    brute = float(omega(p, eps).max())
    got = local_threshold(0.0, 1.0, n, delta)
    assert got >= brute - 1e-12
    assert got - brute <= 1e-9


def test_local_threshold_monotone_in_delta():
    vals = [local_threshold(0.05, 0.7, 200, d) for d in (0.5, 0.2, 0.1, 0.01, 1e-4)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_local_threshold_below_interval_margin():
    for lo, hi in [(0.0, 1.0), (0.0, 0.25), (0.4, 0.6), (0.9, 1.0)]:
        assert local_threshold(lo, hi, 100, 0.1) <= interval_margin(lo, hi, 100, 0.1) + 1e-12


def test_plugin_range():
    e = EmpiricalCdf([0.1, 0.2, 0.5, 0.8])
    assert plugin_range(e, 0.15, 0.6) == (0.25, 0.75)
    with pytest.raises(ValueError):
        plugin_range(e, 1, 0)


def test_constant_band():
    b = constant_band(4, 0.3, "massart", 0.1)
    assert list(b.lower) == [0.0, 0.0, pytest.approx(0.2), pytest.approx(0.45), pytest.approx(0.7)]
    assert b.unclamped[0] == pytest.approx(-0.3)
    e = EmpiricalCdf([1.0, 2.0, 3.0, 4.0])
    assert b(e, 2.5) == pytest.approx(0.2)


def test_cor3_band_examples():
    n, delta, beta = 1000, 0.1, 1.1
    b = band_lower_confidence(n, delta, beta)
    assert b.lower[0] == 0.0
    eb = eps_beta(n, delta, beta)
    expected = 0.5 - max(lcb_margin(0.5, eb, beta), 1 / n)
    assert b.lower[500] == pytest.approx(expected, rel=1e-15)
    assert b.method == "cor3_adaptive"
    assert np.all(np.diff(b.lower) >= 0)


def test_cor3_band_monotone_without_running_max():
    for n in (2, 10, 137, 1000, 10**4):
        for beta in (1.05, 1.1, 2.0):
            b = band_lower_confidence(n, 0.1, beta)
            raw = np.clip(b.unclamped, 0.0, 1.0)
            assert np.array_equal(raw, b.lower)


def test_cor3_band_beats_massart_in_tails():
    n, delta = 10**4, 0.1
    b = band_lower_confidence(n, delta, 1.1)
    m = constant_band(n, band_global(n, delta), "massart", delta)
    q = b.q
    tails = (q <= 0.05) | (q >= 0.95)
    assert np.all(b.lower[tails] >= m.lower[tails])


def test_cor3_band_accepts_ecdf():
    e = EmpiricalCdf(np.linspace(0, 1, 20))
    assert band_lower_confidence(e, 0.1, 1.5).n == 20
    with pytest.raises(ValueError):
        band_lower_confidence(1, 0.1, 1.5)


def test_csv_round_trip_bit_exact():
    b = band_lower_confidence(257, 0.05, 1.3)
    back = StepBand.from_csv(b.to_csv(), b.method, b.delta, b.beta)
    assert np.array_equal(back.lower, b.lower)
    assert np.array_equal(back.unclamped, b.unclamped)
    assert b.to_csv().splitlines()[0] == "q,lower,unclamped"


def test_json_round_trip_bit_exact():
    b = constant_band(33, band_global(33, 0.1, "cor2"), "cor2", 0.1)
    d = json.loads(b.to_json(verbose=True))
    back = StepBand.from_dict(d)
    assert np.array_equal(back.lower, b.lower)
    assert np.array_equal(back.unclamped, b.unclamped)
    assert back.margin == b.margin


def test_step_band_validation():
    with pytest.raises(ValueError):
        StepBand("nope", 2, 0.1, np.zeros(3), np.zeros(3))
    with pytest.raises(ValueError):
        StepBand("massart", 2, 0.1, np.zeros(2), np.zeros(2))
