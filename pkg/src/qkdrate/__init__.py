"""Secure key rates of fiber QKD systems with up-conversion and InGaAs detectors."""
from .detectors import (PAPER_FIT, DetectorOperatingPoint, UpConversionFit, dark_per_window,
                        min_nep_operating_point, noise_equivalent_power, operating_point_at, preset,
                        upconversion_dark_rate, upconversion_efficiency)
from .errors import DomainError, UnknownPresetError
from .montecarlo import TrialStats, simulate_bb84, simulate_dpsk, z_scores
from .optimize import OptimizationResult, cutoff_distance, maximize_scalar, optimize_rate
from .protocols import (BB84, BBM92, DPSK, PDC, ChannelParams, Deterministic, Ideal, Poisson,
                        RateBreakdown, bb84_breakdown, bbm92_breakdown_deterministic,
                        bbm92_breakdown_pdc, breakdown, dpsk_breakdown, entropy_leak_term,
                        error_correction_factor, fiber_transmission, saturation_factor)
from .sweeps import SweepRow, figure_preset, sweep_distance, write_table

__version__ = "0.1.0"
