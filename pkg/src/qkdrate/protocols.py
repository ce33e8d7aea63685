"""Secure key rates for BB84, BBM92 and DPSK over fiber.

Every rate evaluation returns a :class:`RateBreakdown` carrying the
intermediate probabilities, so results can be audited and re-derived. Only
individual attacks are considered. Regions where the security formulas stop
being meaningful are clamped to a rate of exactly zero rather than raising.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Union


from .detectors import DetectorOperatingPoint
from .errors import DomainError

# (e, f(e)) benchmark rows of the bi-directional error-correction algorithm
EC_TABLE_E = (0.01, 0.05, 0.1, 0.15)
EC_TABLE_F = (1.16, 1.16, 1.22, 1.35)

BB84_DETECTORS = 4
DPSK_DETECTORS = 2


@dataclass(frozen=True)
class ChannelParams:
    alpha: float = 0.2  # dB/km
    L: float = 0.0  # km
    L_r: float = 1.0  # dB
    b: float = 0.01

    def __post_init__(self):
        if self.alpha < 0 or self.L < 0 or self.L_r < 0:
            raise DomainError(f"alpha, L and L_r must be non-negative: {self}")
        if not 0.0 <= self.b < 0.5:
            raise DomainError(f"baseline error b must lie in [0, 0.5), got {self.b}")

    def at(self, L: float) -> "ChannelParams":
        return ChannelParams(self.alpha, L, self.L_r, self.b)


# Sources
@dataclass(frozen=True)
class Ideal:
    """Single-photon source."""


@dataclass(frozen=True)
class Poisson:
    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError(f"mu must be positive, got {self.mu}")


@dataclass(frozen=True)
class Deterministic:
    """Entangled-pair source emitting exactly one pair per pulse."""


@dataclass(frozen=True)
class PDC:
    chi: float

    def __post_init__(self):
        if not self.chi >= 0:
            raise DomainError(f"chi must be non-negative, got {self.chi}")


# Protocols. ``nu=None`` runs at the detector's maximum repetition rate.
@dataclass(frozen=True)
class BB84:
    source: Union[Ideal, Poisson] = Ideal()
    eve_has_memory: bool = True
    nu: float | None = None

    @property
    def label(self) -> str:
        if isinstance(self.source, Ideal):
            return "bb84-ideal"
        return "bb84-poisson-" + ("memory" if self.eve_has_memory else "nomemory")


@dataclass(frozen=True)
class BBM92:
    source: Union[Deterministic, PDC] = Deterministic()
    nu: float | None = None

    @property
    def label(self) -> str:
        return "bbm92-" + ("pdc" if isinstance(self.source, PDC) else "deterministic")


@dataclass(frozen=True)
class DPSK:
    mu: float = 0.2
    N: int = 1
    eve_has_memory: bool = False
    nu: float | None = None

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError(f"mu must be positive, got {self.mu}")
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N}")

    @property
    def label(self) -> str:
        return f"dpsk-N{self.N}-" + ("memory" if self.eve_has_memory else "nomemory")


ProtocolConfig = Union[BB84, BBM92, DPSK]


@dataclass(frozen=True)
class RateBreakdown:
    """Trace of one rate evaluation.

    For BBM92 ``p_signal``, ``p_dark`` and ``p_click`` hold the true, false and
    total coincidence probabilities. ``R`` is in bits/s, everything else is
    dimensionless. ``insecure`` names the clamp that forced ``R = 0``, if any.
    """

    protocol: str
    nu: float
    p_signal: float
    p_dark: float
    p_click: float
    e: float
    tau: float
    f_e: float
    leak: float
    sat: float
    R: float
    sifting: float
    beta: float | None = None
    eta_BS: float | None = None
    gamma: float | None = None
    insecure: str | None = None


def fiber_transmission(chan: ChannelParams, receiver_passes: int = 1) -> float:
    """Power transmission of the fiber plus ``receiver_passes`` receiver losses."""
    if receiver_passes not in (1, 2):
        raise DomainError(f"receiver_passes must be 1 or 2, got {receiver_passes}")
    return 10.0 ** (-(chan.alpha * chan.L + receiver_passes * chan.L_r) / 10.0)


def entropy_leak_term(e: float) -> float:
    """e log2 e + (1-e) log2(1-e), with 0 log 0 = 0. Always <= 0."""
    if not 0.0 <= e <= 1.0:
        raise DomainError(f"error rate must lie in [0, 1], got {e}")
    out = 0.0
    if e > 0.0:
        out += e * math.log2(e)
    if e < 1.0:
        out += (1.0 - e) * math.log2(1.0 - e)
    return out


def error_correction_factor(e: float) -> float:
    """Error-correction inefficiency f(e), linear between the benchmark rows
    and held constant outside them."""
    if not 0.0 <= e < 0.5:
        raise DomainError(f"f(e) defined for e in [0, 0.5), got {e}")
    if e <= EC_TABLE_E[0]:
        return EC_TABLE_F[0]
    i = bisect.bisect_left(EC_TABLE_E, e)
    if i == len(EC_TABLE_E):
        return EC_TABLE_F[-1]
    x0, x1 = EC_TABLE_E[i - 1], EC_TABLE_E[i]
    y0, y1 = EC_TABLE_F[i - 1], EC_TABLE_F[i]
    return y0 + (y1 - y0) * (e - x0) / (x1 - x0)


def saturation_factor(nu: float, p_click: float, t_dead: float, n_detectors: int) -> float:
    """Dead-time survival factor exp(-nu * p_click * t_dead / n_detectors)."""
    if n_detectors < 1:
        raise DomainError(f"n_detectors must be >= 1, got {n_detectors}")
    if nu < 0 or p_click < 0 or t_dead < 0:
        raise DomainError("nu, p_click and t_dead must be non-negative")
    return math.exp(-nu * p_click * t_dead / n_detectors)


# Shrinking factors. Outside their domains the log argument re-enters (0, 1)
# spuriously, so they are pinned to zero there.
def tau_bb84_memory(e: float, beta: float) -> float:
    if beta <= 0:
        return 0.0
    x = e / beta
    if x >= 0.5:
        return 0.0
    return -beta * math.log2(0.5 + 2.0 * x - 2.0 * x * x)


def tau_bb84_nomemory(e: float, beta: float) -> float:
    if beta <= 0:
        return 0.0
    x = e / (1.0 + beta)
    if x >= 0.25:
        return 0.0
    return -(1.0 + beta) / 2.0 * math.log2(0.5 + 4.0 * x - 8.0 * x * x)


def tau_bbm92(e: float) -> float:
    if e >= 0.5:
        return 0.0
    return -math.log2(0.5 + 2.0 * e - 2.0 * e * e)


def tau_dpsk(e: float, gamma: float, N: int) -> float:
    return max(0.0, gamma - e / (N * (1.0 - 1.0 / (2.0 * N))))


def _resolve_nu(nu: float | None, det: DetectorOperatingPoint) -> float:
    if nu is None:
        return det.nu_max
    if not 0 < nu <= det.nu_max:
        raise DomainError(f"repetition rate {nu} Hz must lie in (0, {det.nu_max}] for {det.label or 'detector'}")
    return nu


def _check_prob(name: str, p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"{name} = {p} is not a probability")


def _finish(protocol, nu, sifting, ps, pd, b, tau, sat, insecure=None, **extra) -> RateBreakdown:
    pc = ps + pd
    _check_prob("p_click", pc)
    e = (0.5 * pd + b * ps) / pc if pc > 0 else 0.0
    # f(e) is undefined from e = 0.5; tau is already 0 there so R vanishes
    f_e = error_correction_factor(min(e, EC_TABLE_E[-1]))
    leak = f_e * entropy_leak_term(e)
    t = tau(e)
    bracket = t + leak
    if insecure is None and t <= 0.0:
        insecure = "tau<=0"
    elif insecure is None and bracket <= 0.0:
        insecure = "tau+leak<=0"
    R = sifting * nu * pc * max(0.0, bracket) * sat
    return RateBreakdown(protocol=protocol, nu=nu, p_signal=ps, p_dark=pd, p_click=pc, e=e,
                         tau=t, f_e=f_e, leak=leak, sat=sat, R=R, sifting=sifting,
                         insecure=insecure, **extra)


def bb84_breakdown(cfg: BB84, det: DetectorOperatingPoint, chan: ChannelParams) -> RateBreakdown:
    nu = _resolve_nu(cfg.nu, det)
    mu = 1.0 if isinstance(cfg.source, Ideal) else cfg.source.mu
    T1 = fiber_transmission(chan, 1)
    ps = mu * det.eta * T1
    _check_prob("mu*eta*T", ps)
    pd = BB84_DETECTORS * det.d
    pc = ps + pd
    pm = 0.0 if isinstance(cfg.source, Ideal) else -math.expm1(-mu) - mu * math.exp(-mu)
    beta = (pc - pm) / pc if pc > 0 else 0.0
    insecure = "beta<=0" if beta <= 0 else None
    tau = (lambda e: tau_bb84_memory(e, beta)) if cfg.eve_has_memory else (lambda e: tau_bb84_nomemory(e, beta))
    sat = saturation_factor(nu, pc, det.t_dead, BB84_DETECTORS)
    return _finish(cfg.label, nu, 0.5, ps, pd, chan.b, tau, sat, insecure, beta=beta)


def pdc_coefficients(chi: float, t_L: float) -> tuple[float, float, float, float]:
    """Coincidence coefficients c1..c4 of a polarization-entangled PDC source."""
    th2 = math.tanh(chi) ** 2
    ch4 = math.cosh(chi) ** 4
    q = 1.0 - th2 * (1.0 - t_L) ** 2
    c1 = 2.0 * t_L**2 * th2 / (ch4 * q**4)
    c2 = 1.0 / (ch4 * q**2)
    c3 = 2.0 * t_L * (1.0 - t_L) * th2 / (ch4 * q**3)
    c4 = 4.0 * t_L**2 * (1.0 - t_L) ** 2 * th2**2 / (ch4 * q**4)
    return c1, c2, c3, c4


def pdc_singles_probability(chi: float, t_L: float) -> float:
    """Probability that one party registers at least one photon from the PDC
    source (pair number n weighted by (n+1) tanh^2n / cosh^4)."""
    # cosh^2 (1 - tanh^2 (1 - t)) == 1 + sinh^2 t; written this way it stays >= 0
    return -math.expm1(-2.0 * math.log1p(math.sinh(chi) ** 2 * t_L))


def _bbm92(label, nu, det, chan, pt, pf, p_side) -> RateBreakdown:
    # both parties' detectors saturate on their own singles
    sat = saturation_factor(nu, p_side, det.t_dead, BB84_DETECTORS) ** 2
    return _finish(label, nu, 0.5, pt, pf, chan.b, tau_bbm92, sat)


def bbm92_breakdown_deterministic(det: DetectorOperatingPoint, chan: ChannelParams,
                                  nu: float | None = None) -> RateBreakdown:
    nu = _resolve_nu(nu, det)
    T2 = fiber_transmission(chan, 2)
    t_L = det.eta * math.sqrt(T2)
    pt = det.eta**2 * T2
    pf = 8.0 * det.d * t_L + 16.0 * det.d**2
    return _bbm92("bbm92-deterministic", nu, det, chan, pt, pf, t_L)


def bbm92_breakdown_pdc(chi: float, det: DetectorOperatingPoint, chan: ChannelParams,
                        nu: float | None = None) -> RateBreakdown:
    if chi < 0:
        raise DomainError(f"chi must be non-negative, got {chi}")
    nu = _resolve_nu(nu, det)
    t_L = det.eta * 10.0 ** (-(chan.alpha * chan.L + 2.0 * chan.L_r) / 20.0)
    c1, c2, c3, c4 = pdc_coefficients(chi, t_L)
    pf = 16.0 * det.d**2 * c2 + 8.0 * det.d * c3 + c4
    return _bbm92("bbm92-pdc", nu, det, chan, c1, pf, pdc_singles_probability(chi, t_L))


def dpsk_breakdown(cfg: DPSK, det: DetectorOperatingPoint, chan: ChannelParams) -> RateBreakdown:
    nu = _resolve_nu(cfg.nu, det)
    eta_bs = det.eta * fiber_transmission(chan, 1)
    ps = cfg.mu * eta_bs
    _check_prob("mu*eta_BS", ps)
    pd = DPSK_DETECTORS * det.d
    if cfg.eve_has_memory:
        gamma = 1.0 - 2.0 * cfg.mu + 2.0 * ps
    else:
        gamma = 1.0 - cfg.mu / cfg.N + ps / cfg.N
    insecure = "gamma<=0" if gamma <= 0 else None
    sat = saturation_factor(nu, ps + pd, det.t_dead, DPSK_DETECTORS)
    return _finish(cfg.label, nu, 1.0, ps, pd, chan.b, lambda e: tau_dpsk(e, gamma, cfg.N), sat,
                   insecure, eta_BS=eta_bs, gamma=gamma)


def breakdown(cfg: ProtocolConfig, det: DetectorOperatingPoint, chan: ChannelParams) -> RateBreakdown:
    """Dispatch on the protocol variant."""
    if isinstance(cfg, BB84):
        return bb84_breakdown(cfg, det, chan)
    if isinstance(cfg, DPSK):
        return dpsk_breakdown(cfg, det, chan)
    if isinstance(cfg, BBM92):
        if isinstance(cfg.source, PDC):
            return bbm92_breakdown_pdc(cfg.source.chi, det, chan, cfg.nu)
        return bbm92_breakdown_deterministic(det, chan, cfg.nu)
    raise TypeError(f"unsupported protocol config {cfg!r}")
