import math

import pytest

from qkdrate.detectors import DetectorOperatingPoint, preset
from qkdrate.errors import DomainError
from qkdrate.montecarlo import TrialStats, simulate_bb84, simulate_dpsk, z_scores
from qkdrate.protocols import BB84, DPSK, ChannelParams, Poisson, bb84_breakdown, dpsk_breakdown

MIN_NEP = preset("upconv-min-nep")
CHAN = ChannelParams(alpha=0.2, L=0.0, L_r=1.0, b=0.01)


def det(eta=0.1, d=0.0):
    return DetectorOperatingPoint(eta=eta, D=d * 1e9, d=d, nu_max=1e9)


def test_noiseless_has_no_errors():
    chan = ChannelParams(0.2, 0.0, 1.0, b=0.0)
    for sim in (simulate_bb84, simulate_dpsk):
        stats = sim(200_000, 0.1, det(0.5), chan, seed=3)
        assert stats.clicks > 0 and stats.errors == 0


def test_dark_only_errors_are_coin_flips():
    chan = ChannelParams(0.2, 0.0, 1.0, b=0.01)
    stats = simulate_bb84(1_000_000, 1e-12, det(1e-12, d=2.5e-3), chan, seed=11)
    assert stats.clicks > 5000
    sigma = math.sqrt(0.25 / stats.clicks)
    assert abs(stats.e_hat - 0.5) <= 4 * sigma


def test_seed_determinism():
    a = simulate_dpsk(100_000, 0.5, MIN_NEP, CHAN.at(20.0), seed=42)
    b = simulate_dpsk(100_000, 0.5, MIN_NEP, CHAN.at(20.0), seed=42)
    c = simulate_dpsk(100_000, 0.5, MIN_NEP, CHAN.at(20.0), seed=43)
    assert a == b
    assert a != c
    assert a.rng == "numpy.random.PCG64" and a.seed == 42


def test_bb84_reference_configuration():
    chan = CHAN.at(50.0)
    analytic = bb84_breakdown(BB84(Poisson(0.005)), MIN_NEP, chan)
    stats = simulate_bb84(10**6, 0.005, MIN_NEP, chan, seed=0)
    sd = math.sqrt(3.0299308802160556e-05 / 10**6)
    assert abs(stats.p_click_hat - 3.0299308802160556e-05) <= 4 * sd
    z_click, z_error = z_scores(stats, analytic)
    assert abs(z_click) <= 4 and abs(z_error) <= 4


def test_validity_guard():
    with pytest.raises(DomainError):
        simulate_bb84(10, 1.0, det(1.0), ChannelParams(0.2, 0.0, 0.0))
    with pytest.raises(DomainError):
        simulate_bb84(0, 0.1, det(), CHAN)
    with pytest.raises(DomainError):
        simulate_dpsk(10, 0.1, det(0.1, d=0.6), CHAN)


def test_z_zero_when_estimate_matches():
    analytic = dpsk_breakdown(DPSK(0.5, 1), det(0.2), ChannelParams(0.2, 0.0, 0.0, b=0.25))
    n = 1000
    clicks = round(analytic.p_click * n)
    stats = TrialStats(n, clicks, round(clicks * analytic.e), seed=0)
    assert analytic.p_click * n == clicks and clicks * analytic.e == stats.errors
    assert z_scores(stats, analytic) == (0.0, 0.0)


def test_z_with_no_clicks():
    analytic = bb84_breakdown(BB84(Poisson(0.005)), MIN_NEP, CHAN.at(50.0))
    n = 1000
    z_click, z_error = z_scores(TrialStats(n, 0, 0, seed=0), analytic)
    p = analytic.p_click
    assert z_click == pytest.approx(-math.sqrt(n * p / (1 - p)), rel=1e-12)
    assert math.isnan(z_error)


def test_z_undefined_without_expected_clicks():
    analytic = bb84_breakdown(BB84(Poisson(0.005)), det(0.0), CHAN)
    with pytest.raises(DomainError):
        z_scores(TrialStats(10, 0, 0, seed=0), analytic)


def test_trial_stats_invariants():
    with pytest.raises(DomainError):
        TrialStats(10, 3, 4, seed=0)
    with pytest.raises(DomainError):
        TrialStats(10, 11, 0, seed=0)


@pytest.mark.parametrize("sim, cfg, L", [
    (simulate_bb84, BB84(Poisson(0.05)), 10.0),
    (simulate_dpsk, DPSK(0.3, 10), 30.0),
    (simulate_bb84, BB84(Poisson(0.4)), 120.0),
])
def test_z_band_with_many_clicks(sim, cfg, L):
    # at least ~1e3 expected clicks per run
    chan = CHAN.at(L)
    analytic = (bb84_breakdown if isinstance(cfg, BB84) else dpsk_breakdown)(cfg, MIN_NEP, chan)
    n = int(math.ceil(2000 / analytic.p_click))
    mu = cfg.source.mu if isinstance(cfg, BB84) else cfg.mu
    stats = sim(n, mu, MIN_NEP, chan, seed=7)
    z_click, z_error = z_scores(stats, analytic)
    assert abs(z_click) <= 4 and abs(z_error) <= 4
