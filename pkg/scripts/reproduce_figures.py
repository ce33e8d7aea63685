"""Write the rate-versus-distance tables for every figure preset and print
each curve's 1 bit/s cutoff.

    python scripts/reproduce_figures.py --out results/ [--step 1] [--only fig8]
"""
import argparse
import time
from pathlib import Path

from qkdrate.sweeps import FIGURE_NAMES, figure_preset, write_table


def last_at_floor(rows, floor=1.0):
    good = [r.L for r in rows if r.R >= floor]
    return max(good) if good else None


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--step", type=float, default=1.0)
    ap.add_argument("--only", choices=FIGURE_NAMES, action="append")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for fig in args.only or FIGURE_NAMES:
        for spec in figure_preset(fig, step=args.step):
            t0 = time.perf_counter()
            rows = spec.run()
            path = out / f"{fig}_{spec.name}.csv"
            write_table(rows, "csv", path)
            peak = max(rows, key=lambda r: r.R)
            print(f"{fig:5s} {spec.name:24s} R(0)={rows[0].R:10.4g}  peak={peak.R:10.4g} @ {peak.L:5.0f} km"
                  f"  last L with R>=1: {last_at_floor(rows)} km  ({time.perf_counter() - t0:.1f}s) -> {path}")


if __name__ == "__main__":
    main()
