"""2-D kick-error maps for the four protocols (Ω0 against a protocol knob).

    python scripts/fidelity_maps.py --out out/maps --count 21
"""

import argparse
from pathlib import Path

from ionkick import sdk
from ionkick.constants import ghz
from ionkick.io import write_csv

AXES = {
    "SRT": ("Delta", ghz(100), ghz(600)),
    "ARP": ("delta0", ghz(2), ghz(40)),
    "STIRAP": ("t_d", 0.0, 0.5e-9),
    "DE": ("omega_e", ghz(50), ghz(300)),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/maps")
    ap.add_argument("--count", type=int, default=11, help="grid points per axis")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for proto, (name, lo, hi) in AXES.items():
        grid = sdk.SweepGrid(sdk.SweepAxis("omega0", ghz(10), ghz(100), args.count),
                             sdk.SweepAxis(name, lo, hi, args.count))
        fmap = sdk.fidelity_map(proto, grid, threads=args.threads)
        write_csv(out / f"map_{proto}.csv", ["omega0", name, "epsilon"], fmap.rows(),
                  f"x=omega0 y={name}")
        best = fmap.epsilon.min()
        print(f"{proto}: min eps {best:.2e}, failed cells {len(fmap.failures)}")


if __name__ == "__main__":
    main()
