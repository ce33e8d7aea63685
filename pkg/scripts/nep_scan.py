"""Compare the minimum-NEP point found on the printed pump-power fits with
the stated operating point shipped as the ``upconv-min-nep`` preset."""
import argparse

from qkdrate import PAPER_FIT, min_nep_operating_point, preset
from qkdrate.detectors import noise_equivalent_power


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--step", type=float, default=1e-3, help="pump grid step, mW")
    args = ap.parse_args()
    op = min_nep_operating_point(PAPER_FIT, args.step)
    stated = preset("upconv-min-nep")
    print(f"fit minimum : pump={op.pump_mW:.4f} mW eta={op.eta:.4f} D={op.D:.1f}/s d={op.d:.3e} "
          f"NEP={noise_equivalent_power(PAPER_FIT, op.pump_mW):.3f}")
    print(f"stated point: eta={stated.eta:.4f} D={stated.D:.1f}/s d={stated.d:.3e} "
          f"NEP={(2 * stated.D) ** 0.5 / stated.eta:.3f}")


if __name__ == "__main__":
    main()
