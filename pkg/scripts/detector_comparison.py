"""Up-conversion (pump optimized) versus gated InGaAs APD for each protocol:
1 bit/s cutoff distances and the rate ratio at a fixed distance."""
import argparse

from qkdrate import PAPER_FIT, cutoff_distance, optimize_rate, preset
from qkdrate.protocols import BB84, BBM92, DPSK, PDC, Deterministic, Ideal, Poisson
from qkdrate.sweeps import PAPER_CHANNEL

PROTOCOLS = {
    "bb84-poisson": BB84(Poisson(0.1)),
    "bb84-ideal": BB84(Ideal()),
    "bbm92-pdc": BBM92(PDC(0.1)),
    "bbm92-deterministic": BBM92(Deterministic()),
    "dpsk-N1": DPSK(0.2, 1),
    "dpsk-N10": DPSK(0.2, 10),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L", type=float, default=50.0, help="distance for the rate ratio, km")
    ap.add_argument("--protocol", choices=PROTOCOLS, action="append")
    args = ap.parse_args()
    apd = preset("ingaas-typical")
    print(f"{'protocol':20s} {'cut_up':>8s} {'cut_apd':>8s} {'ratio':>6s} {'R_up/R_apd':>11s}")
    for name in args.protocol or PROTOCOLS:
        cfg = PROTOCOLS[name]
        cut_up = cutoff_distance(cfg, PAPER_CHANNEL, PAPER_FIT)
        cut_apd = cutoff_distance(cfg, PAPER_CHANNEL, apd)
        r_up = optimize_rate(cfg, PAPER_CHANNEL.at(args.L), PAPER_FIT).best_rate
        r_apd = optimize_rate(cfg, PAPER_CHANNEL.at(args.L), apd).best_rate
        ratio = r_up / r_apd if r_apd else float("inf")
        print(f"{name:20s} {cut_up:8.1f} {cut_apd:8.1f} {cut_up / cut_apd:6.2f} {ratio:11.1f}")


if __name__ == "__main__":
    main()
