"""Command-line entry point.

Settings come from built-in defaults, then an optional ``key = value`` config
file (``--config``), then flags. Exit codes: 0 success, 2 configuration
error, 3 failed Monte Carlo check.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import get_type_hints

from . import detectors as dm
from .errors import DomainError
from .montecarlo import simulate_bb84, simulate_dpsk, z_scores
from .optimize import optimize_rate
from .protocols import (BB84, BBM92, DPSK, PDC, ChannelParams, Deterministic, Ideal, Poisson,
                        breakdown)
from .sweeps import FIGURE_NAMES, figure_preset, render_table, sweep_distance, write_table

EXIT_OK, EXIT_CONFIG, EXIT_MC_FAIL = 0, 2, 3
Z_LIMIT = 4.0
SUBCOMMANDS = ("detector-curve", "rate", "optimize", "sweep", "figures", "mc-check")


class ConfigError(DomainError):
    pass


@dataclass
class RunConfig:
    subcommand: str = ""
    # channel
    alpha: float = 0.2
    L: float = 0.0
    L_r: float = 1.0
    b: float = 0.01
    nu: float | None = None
    # detector: preset name, or "fit" for the pump-power fit
    detector: str = "upconv-min-nep"
    pump: float | None = None
    a1: float | None = None
    a2: float | None = None
    b0: float | None = None
    b1: float | None = None
    b2: float | None = None
    b3: float | None = None
    b4: float | None = None
    bandwidth: float | None = None
    # protocol
    protocol: str = "bb84"
    source: str | None = None
    mu: float | None = None
    chi: float | None = None
    N: int = 1
    memory: bool | None = None
    # sweeps and curves
    L_start: float = 0.0
    L_end: float = 300.0
    step: float = 1.0
    pump_start: float = 0.0
    pump_end: float = 0.2
    pump_step: float = 1e-3
    figure: str | None = None
    # output and checks
    out: str | None = None
    format: str | None = None
    seed: int = 0
    floor: float = 1.0
    n_pulses: int = 1_000_000

    def update(self, values: dict, where: str = "") -> None:
        hints = get_type_hints(RunConfig)
        for key, raw in values.items():
            if key not in hints:
                raise ConfigError(f"{where}unknown setting {key!r}")
            setattr(self, key, _coerce(key, raw, hints[key], where))


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(key, raw, hint, where):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    hint_s = str(hint)
    try:
        if "bool" in hint_s:
            if text.lower() in _TRUE:
                return True
            if text.lower() in _FALSE:
                return False
            raise ValueError(text)
        if text.lower() in ("", "none") and "None" in hint_s:
            return None
        if "int" in hint_s:
            v = float(text)
            if v != int(v):
                raise ValueError(text)
            return int(v)
        if "float" in hint_s:
            return float(text)
    except ValueError:
        raise ConfigError(f"{where}bad value for {key}: {raw!r}") from None
    return text


def parse_config_text(text: str, source: str = "<config>") -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, value = body.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key or not key.isidentifier():
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        values[key] = value.strip()
    return values


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = RunConfig()
    values = parse_config_text(text, str(path))
    cfg.update(values, where=f"{path}: ")
    return cfg


# ---- building domain objects from a RunConfig


def build_channel(cfg: RunConfig, L: float | None = None) -> ChannelParams:
    return ChannelParams(cfg.alpha, cfg.L if L is None else L, cfg.L_r, cfg.b)


def build_fit(cfg: RunConfig) -> dm.UpConversionFit:
    base = dm.PAPER_FIT
    coeffs = tuple(base.dark_coeffs[k] if getattr(cfg, f"b{k}") is None else getattr(cfg, f"b{k}")
                   for k in range(5))
    return dm.UpConversionFit(
        a1=base.a1 if cfg.a1 is None else cfg.a1,
        a2=base.a2 if cfg.a2 is None else cfg.a2,
        dark_coeffs=coeffs,
        bandwidth=base.bandwidth if cfg.bandwidth is None else cfg.bandwidth,
    )


def build_detector(cfg: RunConfig, allow_fit: bool):
    """Operating point, or the fit itself when the pump is left free."""
    if cfg.detector == "fit":
        fit = build_fit(cfg)
        if cfg.pump is not None:
            return dm.operating_point_at(fit, cfg.pump)
        if not allow_fit:
            raise ConfigError("detector 'fit' needs --pump for this subcommand")
        return fit
    return dm.preset(cfg.detector)


def build_protocol(cfg: RunConfig, need_params: bool):
    proto = cfg.protocol.lower()

    def need(name):
        v = getattr(cfg, name)
        if v is None:
            if need_params:
                raise ConfigError(f"--{name} is required for {proto} with a fixed parameter")
            return 0.1  # starting value, replaced by the optimizer
        return v

    if proto == "bb84":
        source = (cfg.source or ("poisson" if cfg.mu is not None else "ideal")).lower()
        memory = True if cfg.memory is None else cfg.memory
        if source == "ideal":
            return BB84(Ideal(), memory, cfg.nu)
        if source == "poisson":
            return BB84(Poisson(need("mu")), memory, cfg.nu)
        raise ConfigError(f"bb84 source must be ideal or poisson, got {cfg.source!r}")
    if proto == "bbm92":
        source = (cfg.source or ("pdc" if cfg.chi is not None else "deterministic")).lower()
        if source == "deterministic":
            return BBM92(Deterministic(), cfg.nu)
        if source == "pdc":
            return BBM92(PDC(need("chi")), cfg.nu)
        raise ConfigError(f"bbm92 source must be deterministic or pdc, got {cfg.source!r}")
    if proto == "dpsk":
        memory = False if cfg.memory is None else cfg.memory
        return DPSK(need("mu"), cfg.N, memory, cfg.nu)
    raise ConfigError(f"unknown protocol {cfg.protocol!r}; choose bb84, bbm92 or dpsk")


# ---- output helpers


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _labeled(record: dict) -> str:
    width = max(len(k) for k in record)
    lines = []
    for k, v in record.items():
        if isinstance(v, float):
            v = f"{v:.6g}"
        lines.append(f"{k:<{width}} : {v}")
    return "\n".join(lines) + "\n"


# ---- subcommands


def cmd_detector_curve(cfg: RunConfig) -> int:
    fit = build_fit(cfg)
    if cfg.pump is not None:
        pumps = [cfg.pump]
    else:
        if not 0 <= cfg.pump_start <= cfg.pump_end or cfg.pump_step <= 0:
            raise ConfigError("need 0 <= pump_start <= pump_end and pump_step > 0")
        n = int(math.floor((cfg.pump_end - cfg.pump_start) / cfg.pump_step + 1e-9))
        pumps = [cfg.pump_start + k * cfg.pump_step for k in range(n + 1)]
    for p in pumps:
        dm._check_pump(fit, p)
    rows = []
    for p in pumps:
        op = dm.operating_point_at(fit, p)
        nep = dm.noise_equivalent_power(fit, p) if op.eta > 0 else None
        rows.append({"pump_mW": p, "eta": op.eta, "D_per_s": op.D, "d": op.d, "nep": nep})
    if (cfg.format or "csv") == "json":
        text = json.dumps(rows, indent=1) + "\n"
    else:
        lines = [",".join(rows[0])]
        for r in rows:
            lines.append(",".join("" if v is None else format(v, ".16e") for v in r.values()))
        text = "\n".join(lines) + "\n"
    _emit(text, cfg.out)
    return EXIT_OK


def _breakdown_record(bd) -> dict:
    rec = {k: v for k, v in dataclasses.asdict(bd).items() if v is not None}
    return rec


def cmd_rate(cfg: RunConfig) -> int:
    det = build_detector(cfg, allow_fit=False)
    proto = build_protocol(cfg, need_params=True)
    bd = breakdown(proto, det, build_channel(cfg))
    rec = {"detector": det.label, "L_km": cfg.L, **_breakdown_record(bd)}
    if cfg.format == "json":
        _emit(json.dumps(rec, indent=1) + "\n", cfg.out)
    else:
        _emit(_labeled(rec) + f"secure rate: {bd.R:.4g} bit/s\n", cfg.out)
    return EXIT_OK


def cmd_optimize(cfg: RunConfig) -> int:
    det = build_detector(cfg, allow_fit=True)
    proto = build_protocol(cfg, need_params=False)
    res = optimize_rate(proto, build_channel(cfg), det)
    rec = {"L_km": cfg.L, **res.best_params, "best_rate": res.best_rate,
           "evaluations": res.evaluations, **_breakdown_record(res.breakdown)}
    if cfg.format == "json":
        _emit(json.dumps(rec, indent=1) + "\n", cfg.out)
    else:
        _emit(_labeled(rec), cfg.out)
    return EXIT_OK


def _table_format(cfg: RunConfig) -> str:
    fmt = cfg.format or "csv"
    if fmt not in ("csv", "json"):
        raise ConfigError(f"table format must be csv or json, got {fmt!r}")
    return fmt


def cmd_sweep(cfg: RunConfig) -> int:
    fmt = _table_format(cfg)
    det = build_detector(cfg, allow_fit=True)
    proto = build_protocol(cfg, need_params=False)
    rows = sweep_distance(proto, det, build_channel(cfg, 0.0), cfg.L_start, cfg.L_end, cfg.step)
    if cfg.out is None:
        sys.stdout.write(render_table(rows, fmt))
    else:
        write_table(rows, fmt, cfg.out)
    return EXIT_OK


def cmd_figures(cfg: RunConfig) -> int:
    fmt = _table_format(cfg)
    if cfg.figure is None:
        raise ConfigError(f"figures needs a name: {', '.join(FIGURE_NAMES)}")
    specs = figure_preset(cfg.figure, step=cfg.step)
    out = Path(cfg.out or ".")
    tables = [(spec, spec.run()) for spec in specs]
    out.mkdir(parents=True, exist_ok=True)
    for spec, rows in tables:
        path = out / f"{cfg.figure}_{spec.name}.{fmt}"
        write_table(rows, fmt, path)
        print(path)
    return EXIT_OK


def cmd_mc_check(cfg: RunConfig) -> int:
    det = build_detector(cfg, allow_fit=False)
    chan = build_channel(cfg)
    proto = cfg.protocol.lower()
    if proto == "bb84":
        mu = 1.0 if cfg.mu is None and (cfg.source or "").lower() == "ideal" else cfg.mu
        if mu is None:
            raise ConfigError("--mu is required for mc-check")
        analytic = breakdown(BB84(Poisson(mu), True, cfg.nu), det, chan)
        stats = simulate_bb84(cfg.n_pulses, mu, det, chan, cfg.seed)
    elif proto == "dpsk":
        if cfg.mu is None:
            raise ConfigError("--mu is required for mc-check")
        analytic = breakdown(DPSK(cfg.mu, cfg.N, bool(cfg.memory), cfg.nu), det, chan)
        stats = simulate_dpsk(cfg.n_pulses, cfg.mu, det, chan, cfg.seed)
    else:
        raise ConfigError("mc-check supports bb84 and dpsk")
    z_click, z_error = z_scores(stats, analytic)
    ok = abs(z_click) <= Z_LIMIT and abs(z_error) <= Z_LIMIT  # NaN fails
    rec = {**dataclasses.asdict(stats), "p_click_hat": stats.p_click_hat, "e_hat": stats.e_hat,
           "p_click": analytic.p_click, "e": analytic.e, "z_click": z_click, "z_error": z_error,
           "pass": ok}
    if cfg.format == "json":
        _emit(json.dumps(rec, indent=1) + "\n", cfg.out)
    else:
        _emit(_labeled(rec), cfg.out)
    return EXIT_OK if ok else EXIT_MC_FAIL


COMMANDS = {
    "detector-curve": cmd_detector_curve,
    "rate": cmd_rate,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "figures": cmd_figures,
    "mc-check": cmd_mc_check,
}


def _add_flags(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="key = value settings file")
    p.add_argument("--alpha", type=float, default=S, help="fiber loss, dB/km")
    p.add_argument("--L", type=float, default=S, help="distance, km")
    p.add_argument("--L-r", dest="L_r", type=float, default=S, help="receiver loss, dB")
    p.add_argument("--b", type=float, default=S, help="baseline error rate")
    p.add_argument("--nu", type=float, default=S, help="repetition rate, Hz")
    p.add_argument("--detector", default=S,
                   help=f"preset ({', '.join(dm.PRESET_NAMES)}) or 'fit'")
    p.add_argument("--pump", type=float, default=S, help="pump power, mW")
    for name in ("a1", "a2", "b0", "b1", "b2", "b3", "b4", "bandwidth"):
        p.add_argument(f"--{name}", type=float, default=S, help=argparse.SUPPRESS)
    p.add_argument("--protocol", choices=("bb84", "bbm92", "dpsk"), default=S)
    p.add_argument("--source", choices=("ideal", "poisson", "deterministic", "pdc"), default=S)
    p.add_argument("--mu", type=float, default=S)
    p.add_argument("--chi", type=float, default=S)
    p.add_argument("--N", type=int, default=S)
    p.add_argument("--memory", dest="memory", action="store_true", default=S)
    p.add_argument("--no-memory", dest="memory", action="store_false", default=S)
    p.add_argument("--L-start", dest="L_start", type=float, default=S)
    p.add_argument("--L-end", dest="L_end", type=float, default=S)
    p.add_argument("--step", type=float, default=S)
    p.add_argument("--pump-start", dest="pump_start", type=float, default=S)
    p.add_argument("--pump-end", dest="pump_end", type=float, default=S)
    p.add_argument("--pump-step", dest="pump_step", type=float, default=S)
    p.add_argument("--out", default=S)
    p.add_argument("--format", choices=("text", "csv", "json"), default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--floor", type=float, default=S)
    p.add_argument("--n-pulses", dest="n_pulses", type=int, default=S)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qkdrate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    helps = {
        "detector-curve": "efficiency, dark rate and NEP versus pump power",
        "rate": "single rate breakdown",
        "optimize": "optimized rate at one distance",
        "sweep": "optimized rate versus distance",
        "figures": "write the sweep tables of a figure preset",
        "mc-check": "Monte Carlo check of click and error probabilities",
    }
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, help=helps[name])
        if name == "figures":
            sp.add_argument("figure", choices=FIGURE_NAMES)
        _add_flags(sp)
    return parser


def parse_run_config(argv) -> RunConfig:
    ns = vars(make_parser().parse_args(argv))
    path = ns.pop("config", None)
    cfg = load_config(path) if path is not None else RunConfig()
    cfg.update(ns, where="flag ")
    return cfg


def run(argv=None) -> int:
    try:
        cfg = parse_run_config(argv)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_CONFIG if exc.code else EXIT_OK
    except ConfigError as exc:
        print(f"qkdrate: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[cfg.subcommand](cfg)
    except DomainError as exc:
        print(f"qkdrate: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run())
