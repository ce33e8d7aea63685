"""Rate-versus-distance sweeps, the figure configurations, and table output."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .detectors import PAPER_FIT, UpConversionFit, operating_point_at, preset
from .errors import DomainError, UnknownPresetError
from .optimize import DetectorSource, free_parameter, optimize_rate, with_parameter
from .protocols import BB84, BBM92, DPSK, PDC, ChannelParams, Deterministic, Ideal, Poisson, ProtocolConfig, breakdown

CSV_HEADER = ("protocol", "L_km", "pump_mW", "mu", "chi", "p_click", "qber", "tau", "sat", "rate_bps")

# fixed simulation constants: fiber loss, baseline error, receiver loss, up-conversion clock
PAPER_CHANNEL = ChannelParams(alpha=0.2, L=0.0, L_r=1.0, b=0.01)
PAPER_NU_UPCONV = 1e9


@dataclass(frozen=True)
class SweepRow:
    protocol: str
    L: float
    pump_mW: float | None
    mu: float | None
    chi: float | None
    p_click: float
    e: float
    tau: float
    sat: float
    R: float

    def as_dict(self) -> dict:
        return dict(zip(CSV_HEADER, (self.protocol, self.L, self.pump_mW, self.mu, self.chi,
                                      self.p_click, self.e, self.tau, self.sat, self.R)))


def distance_grid(L_start: float, L_end: float, step: float) -> list[float]:
    """Points ``L_start + k*step`` below ``L_end`` (end excluded)."""
    if not 0 <= L_start < L_end:
        raise DomainError(f"need 0 <= L_start < L_end, got {L_start}, {L_end}")
    if not step > 0:
        raise DomainError(f"step must be positive, got {step}")
    n = math.ceil((L_end - L_start) / step - 1e-9)
    return [L_start + k * step for k in range(n)]


def sweep_distance(protocol: ProtocolConfig, detector_source: DetectorSource, chan: ChannelParams,
                   L_start: float, L_end: float, step: float = 1.0) -> list[SweepRow]:
    """One optimized row per distance; insecure distances keep explicit zeros."""
    rows = []
    name = free_parameter(protocol)
    for L in distance_grid(L_start, L_end, step):
        res = optimize_rate(protocol, chan.at(L), detector_source)
        bd = res.breakdown
        rows.append(SweepRow(
            protocol=protocol.label, L=L,
            pump_mW=res.best_params.get("pump_mW"),
            mu=res.best_params.get("mu") if name == "mu" else None,
            chi=res.best_params.get("chi"),
            p_click=bd.p_click, e=bd.e, tau=bd.tau, sat=bd.sat, R=bd.R,
        ))
    return rows


def reevaluate_row(row: SweepRow, protocol: ProtocolConfig, detector_source: DetectorSource,
                   chan: ChannelParams):
    """Recompute the breakdown at the parameters recorded in ``row``."""
    if isinstance(detector_source, UpConversionFit):
        det = operating_point_at(detector_source, row.pump_mW)
    else:
        det = detector_source
    name = free_parameter(protocol)
    value = {"mu": row.mu, "chi": row.chi}.get(name)
    return breakdown(with_parameter(protocol, name, value), det, chan.at(row.L))


@dataclass(frozen=True)
class SweepSpec:
    name: str
    protocol: ProtocolConfig
    detector_source: DetectorSource
    chan: ChannelParams
    L_start: float
    L_end: float
    step: float = 1.0

    def run(self) -> list[SweepRow]:
        return sweep_distance(self.protocol, self.detector_source, self.chan,
                              self.L_start, self.L_end, self.step)


FIGURE_NAMES = ("fig5", "fig6", "fig7", "fig8")


def figure_preset(name: str, *, dpsk_memory: bool | None = None, fig8_N: int = 1,
                  step: float = 1.0) -> list[SweepSpec]:
    """Sweep bundles behind the rate-versus-distance figures.

    fig5-fig7 optimize the pump power of the measured up-conversion detector;
    fig8 uses the noise-free ``upconv-ideal`` operating point with Eve holding
    a quantum memory. ``dpsk_memory`` overrides the memory flag of the DPSK
    curves in fig7 (no memory) and fig8 (memory).
    """
    chan = PAPER_CHANNEL
    nu = PAPER_NU_UPCONV
    if name == "fig5":
        return [
            SweepSpec("bb84-poisson-memory", BB84(Poisson(0.1), True, nu), PAPER_FIT, chan, 0, 220, step),
            SweepSpec("bb84-poisson-nomemory", BB84(Poisson(0.1), False, nu), PAPER_FIT, chan, 0, 220, step),
            SweepSpec("bb84-ideal", BB84(Ideal(), True, nu), PAPER_FIT, chan, 0, 410, step),
        ]
    if name == "fig6":
        return [
            SweepSpec("bbm92-pdc", BBM92(PDC(0.1), nu), PAPER_FIT, chan, 0, 380, step),
            SweepSpec("bbm92-deterministic", BBM92(Deterministic(), nu), PAPER_FIT, chan, 0, 440, step),
        ]
    if name == "fig7":
        memory = False if dpsk_memory is None else dpsk_memory
        return [SweepSpec(f"dpsk-N{N}", DPSK(0.2, N, memory, nu), PAPER_FIT, chan, 0, 440, step)
                for N in (1, 10, 100)]
    if name == "fig8":
        det = preset("upconv-ideal")
        memory = True if dpsk_memory is None else dpsk_memory
        return [
            SweepSpec("bb84-ideal", BB84(Ideal(), True, nu), det, chan, 0, 330, step),
            SweepSpec("bbm92-deterministic", BBM92(Deterministic(), nu), det, chan, 0, 440, step),
            SweepSpec(f"dpsk-N{fig8_N}", DPSK(0.2, fig8_N, memory, nu), det, chan, 0, 310, step),
        ]
    raise UnknownPresetError(f"unknown figure preset {name!r}; choose from {', '.join(FIGURE_NAMES)}")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return format(float(v), ".16e")


def render_table(rows: list[SweepRow], fmt: str = "csv") -> str:
    if not rows:
        raise DomainError("no rows to write")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([_fmt(v) for v in r.as_dict().values()])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps([r.as_dict() for r in rows], indent=1) + "\n"
    raise DomainError(f"unknown table format {fmt!r}")


def write_table(rows: list[SweepRow], fmt: str, destination) -> None:
    """Write rows as CSV or JSON. The file is replaced atomically, so a failed
    write never leaves a partial table behind."""
    text = render_table(rows, fmt)
    dest = Path(destination)
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(dir=dest.parent, prefix=f".{dest.name}.")
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, dest)
    except OSError as exc:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
        raise OSError(f"cannot write table to {dest}: {exc}") from exc


def read_csv_rows(path) -> list[SweepRow]:
    with open(path, newline="") as fh:
        out = []
        for rec in csv.DictReader(fh):
            opt = {k: (float(rec[k]) if rec[k] else None) for k in ("pump_mW", "mu", "chi")}
            out.append(SweepRow(rec["protocol"], float(rec["L_km"]), opt["pump_mW"], opt["mu"], opt["chi"],
                                float(rec["p_click"]), float(rec["qber"]), float(rec["tau"]),
                                float(rec["sat"]), float(rec["rate_bps"])))
        return out
