import math

import pytest

from qkdrate.detectors import PAPER_FIT, preset
from qkdrate.errors import DomainError
from qkdrate.optimize import cutoff_distance, maximize_scalar, optimize_rate
from qkdrate.protocols import (BB84, BBM92, DPSK, PDC, ChannelParams, Deterministic, Ideal, Poisson,
                               bb84_breakdown, breakdown)

MIN_NEP = preset("upconv-min-nep")
CHAN = ChannelParams(alpha=0.2, L=0.0, L_r=1.0, b=0.01)


def test_maximize_parabola():
    x, fx = maximize_scalar(lambda x: -(x - 0.3) ** 2, 0.0, 1.0, tol=1e-8)
    assert x == pytest.approx(0.3, abs=1e-7)
    assert fx == pytest.approx(0.0, abs=1e-14)


def test_maximize_sine():
    x, fx = maximize_scalar(math.sin, 0.0, math.pi, tol=1e-8)
    assert x == pytest.approx(math.pi / 2, abs=1e-6)
    assert fx == pytest.approx(1.0, abs=1e-12)


def test_maximize_constant_returns_lowest_probe():
    assert maximize_scalar(lambda x: 2.5, 1.0, 3.0) == (1.0, 2.5)


def test_maximize_log_scale():
    x, _ = maximize_scalar(lambda x: -(math.log(x) - math.log(3e-4)) ** 2, 1e-5, 1.0, log=True)
    assert x == pytest.approx(3e-4, rel=1e-4)


def test_maximize_beats_every_probe():
    probes = []

    def f(x):
        v = math.sin(7 * x) * math.exp(-x)
        probes.append(v)
        return v

    _, fx = maximize_scalar(f, 0.0, 10.0, coarse_points=16)
    assert fx >= max(probes)


@pytest.mark.parametrize("args", [(1.0, 1.0), (2.0, 1.0)])
def test_maximize_bad_interval(args):
    with pytest.raises(DomainError):
        maximize_scalar(lambda x: x, *args)


def test_maximize_bad_settings():
    with pytest.raises(DomainError):
        maximize_scalar(lambda x: x, 0.0, 1.0, coarse_points=2)
    with pytest.raises(DomainError):
        maximize_scalar(lambda x: x, 0.0, 1.0, tol=0.0)
    with pytest.raises(DomainError):
        maximize_scalar(lambda x: x, 0.0, 1.0, log=True)


def test_poisson_bb84_beats_mu_grid():
    chan = CHAN.at(50.0)
    res = optimize_rate(BB84(Poisson(0.1)), chan, MIN_NEP)
    grid = max(bb84_breakdown(BB84(Poisson(k * 1e-4)), MIN_NEP, chan).R for k in range(1, 201))
    assert res.best_rate >= grid
    assert res.best_rate >= 5142.3388126268562
    assert res.best_rate == res.breakdown.R
    assert 1e-3 < res.best_params["mu"] < 1e-2


def test_fixed_source_needs_one_evaluation():
    chan = CHAN.at(80.0)
    res = optimize_rate(BB84(Ideal()), chan, MIN_NEP)
    assert res.evaluations == 1
    assert res.breakdown == bb84_breakdown(BB84(Ideal()), MIN_NEP, chan)
    assert res.best_params == {}


@pytest.mark.parametrize("cfg", [BB84(Poisson(0.1)), BBM92(PDC(0.1)), DPSK(0.2, 10), BBM92()])
def test_far_beyond_cutoff_is_zero(cfg):
    res = optimize_rate(cfg, CHAN.at(900.0), MIN_NEP)
    assert res.best_rate == 0.0


def test_pump_optimization_beats_pump_grid():
    chan = CHAN.at(150.0)
    cfg = BB84(Ideal())
    res = optimize_rate(cfg, chan, PAPER_FIT)
    from qkdrate.detectors import operating_point_at
    grid = [k * 1e-3 for k in range(1, 200)]
    best = max(bb84_breakdown(cfg, operating_point_at(PAPER_FIT, p), chan).R for p in grid)
    assert res.best_rate >= best
    assert res.detector.pump_mW == res.best_params["pump_mW"]
    assert 0 < res.best_params["pump_mW"] < 0.124  # first efficiency lobe


def test_pdc_chi_optimized():
    res = optimize_rate(BBM92(PDC(0.1)), CHAN.at(100.0), MIN_NEP)
    grid = max(breakdown(BBM92(PDC(k * 1e-3)), MIN_NEP, CHAN.at(100.0)).R for k in range(1, 2001))
    assert res.best_rate >= grid > 0


def test_optimization_is_deterministic():
    a = optimize_rate(DPSK(0.2, 10), CHAN.at(120.0), PAPER_FIT)
    b = optimize_rate(DPSK(0.2, 10), CHAN.at(120.0), PAPER_FIT)
    assert a == b


def test_cutoff_brackets_floor():
    det = preset("upconv-ideal")
    cfg = DPSK(0.2, 1, True)
    L = cutoff_distance(cfg, CHAN, det, rate_floor=1.0)
    assert optimize_rate(cfg, CHAN.at(L), det).best_rate >= 1.0
    assert optimize_rate(cfg, CHAN.at(L + 0.2), det).best_rate < 1.0
    assert L == pytest.approx(250.0, rel=0.10)


def test_cutoff_floor_above_short_distance_rate():
    with pytest.raises(DomainError):
        cutoff_distance(BB84(Ideal()), CHAN, MIN_NEP, rate_floor=1e12)


def test_cutoff_deterministic_bbm92_reaches_350km():
    assert cutoff_distance(BBM92(Deterministic()), CHAN, preset("upconv-ideal")) >= 350.0
