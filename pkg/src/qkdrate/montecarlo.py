"""Per-pulse Monte Carlo check of the analytic click and error probabilities.

Each pulse draws an independent signal click and dark click, so the
simultaneous signal-plus-dark events that the closed forms neglect are
included here. At most one click is registered per window, which is valid
while the signal click probability stays small (mu*eta*T <= 0.1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detectors import DetectorOperatingPoint
from .errors import DomainError
from .protocols import BB84_DETECTORS, DPSK_DETECTORS, ChannelParams, RateBreakdown, fiber_transmission

RNG_ALGORITHM = "numpy.random.PCG64"
VALIDITY_LIMIT = 0.1
_CHUNK = 1 << 22


@dataclass(frozen=True)
class TrialStats:
    n_pulses: int
    clicks: int
    errors: int
    seed: int
    rng: str = RNG_ALGORITHM

    def __post_init__(self):
        if not 0 <= self.errors <= self.clicks <= self.n_pulses:
            raise DomainError(f"inconsistent counts {self}")

    @property
    def p_click_hat(self) -> float:
        return self.clicks / self.n_pulses

    @property
    def e_hat(self) -> float:
        return self.errors / self.clicks if self.clicks else 0.0


def _simulate(n_pulses: int, p_signal: float, p_dark: float, b: float, seed: int) -> TrialStats:
    if n_pulses < 1:
        raise DomainError(f"n_pulses must be >= 1, got {n_pulses}")
    for name, p in (("signal", p_signal), ("dark", p_dark), ("baseline error", b)):
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"{name} probability {p} outside [0, 1]")
    if p_signal > VALIDITY_LIMIT:
        raise DomainError(f"signal click probability {p_signal} exceeds the single-click model limit")
    rng = np.random.Generator(np.random.PCG64(seed))
    clicks = errors = 0
    left = n_pulses
    while left:
        m = min(left, _CHUNK)
        sig = rng.random(m) < p_signal
        dark = rng.random(m) < p_dark
        u = rng.random(m)
        # dark-involved clicks carry a random bit; signal-only clicks err with b
        err = np.where(dark, u < 0.5, sig & (u < b))
        clicks += int(np.count_nonzero(sig | dark))
        errors += int(np.count_nonzero(err))
        left -= m
    return TrialStats(n_pulses, clicks, errors, seed)


def simulate_bb84(n_pulses: int, mu: float, det: DetectorOperatingPoint, chan: ChannelParams,
                  seed: int = 0) -> TrialStats:
    p_signal = mu * det.eta * fiber_transmission(chan, 1)
    return _simulate(n_pulses, p_signal, BB84_DETECTORS * det.d, chan.b, seed)


def simulate_dpsk(n_pulses: int, mu: float, det: DetectorOperatingPoint, chan: ChannelParams,
                  seed: int = 0) -> TrialStats:
    p_signal = mu * det.eta * fiber_transmission(chan, 1)
    return _simulate(n_pulses, p_signal, DPSK_DETECTORS * det.d, chan.b, seed)


def z_scores(stats: TrialStats, analytic: RateBreakdown) -> tuple[float, float]:
    """Binomial z-scores of the click and error estimates against the analytic
    breakdown. ``z_error`` is NaN when no clicks were observed."""
    p = analytic.p_click
    if stats.n_pulses * p == 0.0 or p >= 1.0:
        raise DomainError("click z-score undefined: zero expected clicks")
    z_click = (stats.p_click_hat - p) / math.sqrt(p * (1.0 - p) / stats.n_pulses)
    if stats.clicks == 0:
        return z_click, math.nan
    e = analytic.e
    var = e * (1.0 - e)
    if var == 0.0:
        if stats.e_hat == e:
            return z_click, 0.0
        raise DomainError(f"error z-score undefined: analytic e = {e} but e_hat = {stats.e_hat}")
    return z_click, (stats.e_hat - e) / math.sqrt(var / stats.clicks)
