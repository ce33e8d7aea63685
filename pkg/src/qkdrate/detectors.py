"""Single-photon detector models at 1.55 um.

Two detector families are covered: the PPLN up-conversion detector, whose
efficiency and dark-count rate are empirical functions of pump power, and the
gated InGaAs/InP APD, which is described by fixed constants.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UnknownPresetError

DEFAULT_GRID_STEP_MW = 1e-3
UPCONV_REP_RATE = 1e9  # Hz
UPCONV_DEAD_TIME = 50e-9  # s, commercial Si APD


@dataclass(frozen=True)
class UpConversionFit:
    """Pump-power fits of the up-conversion detector (pump in mW).

    Efficiency follows ``a1 * sin(sqrt(a2 * p))**2`` and the dark-count rate is
    the quartic ``sum(b[k] * p**k)``. ``nu_max`` and ``t_dead`` describe the
    Si APD behind the converter and are copied into derived operating points.
    """

    a1: float = 0.465
    a2: float = 79.75
    dark_coeffs: tuple[float, ...] = (50.0, 826.4, 110.3, -0.403, 0.00065)
    bandwidth: float = 50e9  # Hz
    pump_domain: tuple[float, float] = (0.0, 100.0)
    nu_max: float = UPCONV_REP_RATE
    t_dead: float = UPCONV_DEAD_TIME

    def __post_init__(self):
        if not 0.0 < self.a1 <= 1.0:
            raise DomainError(f"a1 must lie in (0, 1], got {self.a1}")
        if self.a2 <= 0:
            raise DomainError(f"a2 must be positive, got {self.a2}")
        if len(self.dark_coeffs) != 5:
            raise DomainError("dark_coeffs must hold b0..b4")
        if self.bandwidth <= 0:
            raise DomainError(f"bandwidth must be positive, got {self.bandwidth}")
        lo, hi = self.pump_domain
        if lo != 0.0 or hi <= 0.0:
            raise DomainError(f"pump_domain must be [0, hi] with hi > 0, got {self.pump_domain}")
        ps = np.linspace(lo, hi, 10_001)
        dark = np.polynomial.polynomial.polyval(ps, self.dark_coeffs)
        if np.any(dark <= 0) or np.any(np.diff(dark) <= 0):
            raise DomainError("dark-rate polynomial must be positive and increasing on pump_domain")


PAPER_FIT = UpConversionFit()


@dataclass(frozen=True)
class DetectorOperatingPoint:
    """Detector snapshot: efficiency, dark rate, dark counts per window,
    maximum repetition rate and dead time (0 disables saturation)."""

    eta: float
    D: float
    d: float
    nu_max: float
    t_dead: float = 0.0
    label: str = ""
    pump_mW: float | None = field(default=None, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"eta must lie in [0, 1], got {self.eta}")
        if self.D < 0 or self.d < 0:
            raise DomainError("dark rates must be non-negative")
        if self.nu_max <= 0:
            raise DomainError(f"nu_max must be positive, got {self.nu_max}")
        if self.t_dead < 0:
            raise DomainError(f"t_dead must be non-negative, got {self.t_dead}")


def _check_pump(fit: UpConversionFit, p: float) -> None:
    lo, hi = fit.pump_domain
    if not lo <= p <= hi:
        raise DomainError(f"pump power {p} mW outside fit domain [{lo}, {hi}]")


def upconversion_efficiency(fit: UpConversionFit, p: float) -> float:
    _check_pump(fit, p)
    return fit.a1 * math.sin(math.sqrt(fit.a2 * p)) ** 2


def upconversion_dark_rate(fit: UpConversionFit, p: float) -> float:
    """Dark-count rate in counts/s at pump power ``p`` (mW)."""
    _check_pump(fit, p)
    b0, b1, b2, b3, b4 = fit.dark_coeffs
    return b0 + p * (b1 + p * (b2 + p * (b3 + p * b4)))


def dark_per_window(D: float, bandwidth: float) -> float:
    """Dark counts per measurement window behind a matched filter.

    Depends only on the filter bandwidth, never on the system bit rate. For a
    gated APD pass the gate frequency as ``bandwidth``.
    """
    if bandwidth <= 0:
        raise DomainError(f"bandwidth must be positive, got {bandwidth}")
    if D < 0:
        raise DomainError(f"dark rate must be non-negative, got {D}")
    return D / bandwidth


def noise_equivalent_power(fit: UpConversionFit, p: float) -> float:
    eta = upconversion_efficiency(fit, p)
    if eta == 0.0:
        raise DomainError(f"NEP undefined at pump {p} mW: zero efficiency")
    return math.sqrt(2.0 * upconversion_dark_rate(fit, p)) / eta


def operating_point_at(fit: UpConversionFit, p: float, label: str = "upconv-fit") -> DetectorOperatingPoint:
    D = upconversion_dark_rate(fit, p)
    return DetectorOperatingPoint(
        eta=upconversion_efficiency(fit, p),
        D=D,
        d=dark_per_window(D, fit.bandwidth),
        nu_max=fit.nu_max,
        t_dead=fit.t_dead,
        label=label,
        pump_mW=p,
    )


def min_nep_operating_point(fit: UpConversionFit = PAPER_FIT,
                            grid_step: float = DEFAULT_GRID_STEP_MW) -> DetectorOperatingPoint:
    """Grid argmin of sqrt(2D)/eta over the pump domain, skipping eta == 0."""
    lo, hi = fit.pump_domain
    if grid_step <= 0 or grid_step >= hi - lo:
        raise DomainError(f"grid_step must lie in (0, {hi - lo}), got {grid_step}")
    n = int(math.floor((hi - lo) / grid_step + 1e-9))
    ps = lo + grid_step * np.arange(n + 1)
    eta = fit.a1 * np.sin(np.sqrt(fit.a2 * ps)) ** 2
    dark = np.polynomial.polynomial.polyval(ps, fit.dark_coeffs)
    ok = eta > 0
    if not ok.any():
        raise DomainError("efficiency is zero at every grid point")
    nep = np.full_like(ps, np.inf)
    nep[ok] = np.sqrt(2.0 * dark[ok]) / eta[ok]
    return operating_point_at(fit, float(ps[int(np.argmin(nep))]), label="upconv-fit-min-nep")


_PRESETS = {
    # stated minimum-NEP point of the measured detector, d = 6.4e3 / 50 GHz
    "upconv-min-nep": DetectorOperatingPoint(
        eta=0.075, D=6.4e3, d=dark_per_window(6.4e3, 50e9),
        nu_max=UPCONV_REP_RATE, t_dead=UPCONV_DEAD_TIME, label="upconv-min-nep"),
    # converter noise removed, limited by the Si APD alone
    "upconv-ideal": DetectorOperatingPoint(
        eta=0.46, D=5e-8 * 50e9, d=5e-8,
        nu_max=UPCONV_REP_RATE, t_dead=UPCONV_DEAD_TIME, label="upconv-ideal"),
    # gated APD at 10 MHz, no dead-time model
    "ingaas-typical": DetectorOperatingPoint(
        eta=0.1, D=1e-5 * 1e7, d=1e-5, nu_max=1e7, t_dead=0.0, label="ingaas-typical"),
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name: str) -> DetectorOperatingPoint:
    try:
        return _PRESETS[name]
    except KeyError:
        raise UnknownPresetError(
            f"unknown detector preset {name!r}; choose from {', '.join(PRESET_NAMES)}") from None
