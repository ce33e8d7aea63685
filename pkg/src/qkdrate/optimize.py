"""Per-distance maximization of the secure rate and cutoff-distance search.

The free parameters are the mean photon number (Poisson BB84, DPSK), the
squeeze parameter (PDC BBM92) and, when the detector is given as a pump-power
fit, the pump power. Searches are nested 1-D maximizations: a coarse grid
picks a bracket and golden-section search refines it. The grid is what keeps
the search safe on the oscillating pump-power objective.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .detectors import DetectorOperatingPoint, UpConversionFit, operating_point_at
from .errors import DomainError
from .protocols import (BB84, BBM92, DPSK, PDC, ChannelParams, Poisson, ProtocolConfig,
                        RateBreakdown, breakdown)

DetectorSource = Union[DetectorOperatingPoint, UpConversionFit]

MU_RANGE = (1e-5, 1.0)
CHI_RANGE = (1e-4, 2.0)
PUMP_MIN_MW = 1e-4  # lower end of the log-spaced pump grid
COARSE_POINTS = 64
REL_TOL = 1e-5

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def maximize_scalar(f: Callable[[float], float], lo: float, hi: float,
                    coarse_points: int = COARSE_POINTS, tol: float = REL_TOL,
                    log: bool = False) -> tuple[float, float]:
    """Maximize ``f`` on [lo, hi] by a grid scan plus golden-section refinement.

    With ``log=True`` both stages run in ln(x), so ``tol`` is relative and
    ``lo`` must be positive. Ties keep the lowest probed x. The returned value
    is never below any value probed along the way.
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    if coarse_points < 3:
        raise DomainError(f"coarse_points must be >= 3, got {coarse_points}")
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    if log and lo <= 0:
        raise DomainError("log-scale search needs lo > 0")

    if log:
        to_x, u_lo, u_hi = math.exp, math.log(lo), math.log(hi)
    else:
        to_x, u_lo, u_hi = (lambda u: u), lo, hi

    grid = np.linspace(u_lo, u_hi, coarse_points)
    best_u, best_f = None, -math.inf
    for u in grid:
        # pin the endpoints exactly so exp(log(hi)) cannot leave the domain
        x = lo if u == u_lo else hi if u == u_hi else to_x(u)
        fx = f(x)
        if fx > best_f:
            best_u, best_f = float(u), fx
    best_x = to_x(best_u) if best_u not in (u_lo, u_hi) else (lo if best_u == u_lo else hi)

    i = int(np.searchsorted(grid, best_u))
    a = float(grid[max(i - 1, 0)])
    b = float(grid[min(i + 1, coarse_points - 1)])
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(to_x(c)), f(to_x(d))
    for u, fu in ((c, fc), (d, fd)):
        if fu > best_f:
            best_x, best_f = to_x(u), fu
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(to_x(c))
            u, fu = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(to_x(d))
            u, fu = d, fd
        if fu > best_f:
            best_x, best_f = to_x(u), fu
    return best_x, best_f


@dataclass(frozen=True)
class OptimizationResult:
    best_params: dict[str, float]
    best_rate: float
    breakdown: RateBreakdown
    evaluations: int
    detector: DetectorOperatingPoint = field(repr=False)


def free_parameter(cfg: ProtocolConfig) -> str | None:
    """Name of the source parameter that is optimized for ``cfg``, if any."""
    if isinstance(cfg, BB84):
        return "mu" if isinstance(cfg.source, Poisson) else None
    if isinstance(cfg, DPSK):
        return "mu"
    if isinstance(cfg, BBM92):
        return "chi" if isinstance(cfg.source, PDC) else None
    raise TypeError(f"unsupported protocol config {cfg!r}")


def with_parameter(cfg: ProtocolConfig, name: str | None, value: float | None) -> ProtocolConfig:
    if name is None:
        return cfg
    if isinstance(cfg, BB84):
        return BB84(Poisson(value), cfg.eve_has_memory, cfg.nu)
    if isinstance(cfg, DPSK):
        return DPSK(value, cfg.N, cfg.eve_has_memory, cfg.nu)
    return BBM92(PDC(value), cfg.nu)


def _inner(cfg, det, chan, counter) -> tuple[float | None, RateBreakdown]:
    name = free_parameter(cfg)

    def rate(x):
        counter[0] += 1
        return breakdown(with_parameter(cfg, name, x), det, chan).R

    if name is None:
        counter[0] += 1
        return None, breakdown(cfg, det, chan)
    lo, hi = MU_RANGE if name == "mu" else CHI_RANGE
    x, _ = maximize_scalar(rate, lo, hi, log=True)
    return x, breakdown(with_parameter(cfg, name, x), det, chan)


def optimize_rate(cfg: ProtocolConfig, chan: ChannelParams,
                  detector_source: DetectorSource) -> OptimizationResult:
    """Best secure rate at ``chan.L`` over the protocol's free parameters.

    A fixed operating point searches only mu or chi. An
    :class:`UpConversionFit` additionally searches the pump power (outer loop).
    """
    name = free_parameter(cfg)
    counter = [0]

    if isinstance(detector_source, DetectorOperatingPoint):
        x, bd = _inner(cfg, detector_source, chan, counter)
        params = {} if name is None else {name: x}
        return OptimizationResult(params, bd.R, bd, counter[0], detector_source)

    fit = detector_source
    cache: dict[float, tuple[float | None, RateBreakdown]] = {}

    def rate_at_pump(p):
        det = operating_point_at(fit, p)
        if det.eta == 0.0:
            return 0.0
        cache[p] = _inner(cfg, det, chan, counter)
        return cache[p][1].R

    p_best, _ = maximize_scalar(rate_at_pump, max(PUMP_MIN_MW, fit.pump_domain[0]),
                                fit.pump_domain[1], log=True)
    if p_best not in cache:
        rate_at_pump(p_best)
    x, bd = cache.get(p_best, (None, None))
    det = operating_point_at(fit, p_best)
    if bd is None:  # zero efficiency at the optimum: nothing secure was found
        x, bd = _inner(cfg, det, chan, counter)
    params = {"pump_mW": p_best}
    if name is not None:
        params[name] = x
    return OptimizationResult(params, bd.R, bd, counter[0], det)


def cutoff_distance(cfg: ProtocolConfig, chan: ChannelParams, detector_source: DetectorSource,
                    rate_floor: float = 1.0, lookahead_km: float = 50.0,
                    max_distance: float = 2000.0, resolution: float = 0.1) -> float:
    """Largest distance (to ``resolution`` km) whose optimized rate reaches
    ``rate_floor``. Scans forward in 1 km steps until ``lookahead_km`` pass
    without a rate at or above the floor, then bisects the last crossing."""
    if not rate_floor > 0:
        raise DomainError(f"rate_floor must be positive, got {rate_floor}")

    def rate(L):
        return optimize_rate(cfg, chan.at(L), detector_source).best_rate

    r0 = rate(0.0)
    if r0 < rate_floor:
        raise DomainError(f"optimized rate at L=0 ({r0:.3g} bit/s) is below the floor {rate_floor}")
    last_good = 0
    L = 1
    while L - last_good <= lookahead_km:
        if L > max_distance:
            raise DomainError(f"rate stays above the floor beyond {max_distance} km")
        if rate(float(L)) >= rate_floor:
            last_good = L
        L += 1
    lo, hi = float(last_good), float(last_good + 1)
    while hi - lo > resolution + 1e-12:
        mid = 0.5 * (lo + hi)
        if rate(mid) >= rate_floor:
            lo = mid
        else:
            hi = mid
    return lo
