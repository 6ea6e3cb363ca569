"""1 - F_s of every protocol under ±10 % intensity and detuning drifts (N_p = 10).

    python scripts/robustness_curves.py --out out/robustness --count 21
"""

import argparse
from pathlib import Path

import numpy as np

from ionkick import sdk
from ionkick.io import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/robustness")
    ap.add_argument("--count", type=int, default=11)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    band = np.linspace(-0.1, 0.1, args.count)
    rows = []
    for proto in ("SRT", "ARP", "STIRAP", "DE"):
        for kind in ("intensity", "detuning"):
            curve = sdk.robustness_sweep(proto, kind, band, threads=args.threads)
            rows += [(proto, kind, *r) for r in curve.rows()]
            print(f"{proto:6s} {kind:9s} worst 1-Fs = {curve.worst:.3e}")
    write_csv(out / "robustness.csv",
              ["protocol", "kind", "perturbation", "epsilon", "one_minus_Fs"], rows)


if __name__ == "__main__":
    main()
