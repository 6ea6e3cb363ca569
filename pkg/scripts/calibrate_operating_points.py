"""Locate the default operating point of each protocol at τ = 1 ns.

SRT and DE: Ω0 that minimizes ε (flip amplitude), searched in a bracket.
ARP and STIRAP: worst-case ε over a ±10 % intensity band against Ω0,
showing that it keeps falling up to the Rabi budget.

    python scripts/calibrate_operating_points.py --out out/calibration
"""

import argparse
from pathlib import Path

import numpy as np

from ionkick import sdk
from ionkick.constants import ghz
from ionkick.io import write_csv

BRACKETS = {"SRT": (ghz(30), ghz(42)), "DE": (ghz(40), ghz(56))}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/calibration")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    for proto, bracket in BRACKETS.items():
        o, eps = sdk.find_flip_amplitude(proto, bracket)
        rows.append((proto, "flip", o / (2 * np.pi), eps))
        print(f"{proto}: Omega0 = 2pi x {o / 2 / np.pi / 1e9:.6f} GHz, eps = {eps:.3e}")

    for proto in ("ARP", "STIRAP"):
        for o in np.linspace(40, 100, 7):
            worst = sdk.worst_case_epsilon(proto, params={"omega0": ghz(o)}, threads=args.threads)
            rows.append((proto, "band_worst", o * 1e9, worst))
            print(f"{proto}: Omega0 = 2pi x {o:.0f} GHz, worst eps over +-10% = {worst:.3e}")

    write_csv(out / "calibration.csv", ["protocol", "quantity", "omega0_hz", "epsilon"], rows)


if __name__ == "__main__":
    main()
