"""Gate time and motional infidelity of GZC/FRAG gates on a timing grid.

Solves n = 1..8 once per scheme, fits T ∝ N_p^p, then snaps each solution
to every repetition rate.

    python scripts/gate_scan.py --out out/gates
"""

import argparse
from pathlib import Path

from ionkick import fastgate as fg
from ionkick.io import write_csv

RATES = (1e8, 2e8, 5e8, 1e9, 2e9, 5e9, 1e10)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/gates")
    ap.add_argument("--nmax", type=int, default=8)
    ap.add_argument("--mode", choices=("snap", "regrid"), default="snap")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trap = fg.TrapConfig()
    ns = range(1, args.nmax + 1)
    rows, times = [], []
    for scheme in ("GZC", "FRAG"):
        slope, seqs = fg.gate_time_scaling(scheme, ns, trap)
        print(f"{scheme}: T ~ N_p^{slope:.3f}")
        times += [(scheme, s.n, s.n_pairs, s.gate_time) for s in seqs]
        scan = fg.repetition_scan(scheme, ns, RATES, trap, mode=args.mode, baselines=seqs)
        rows += [(scheme, *r.as_tuple()) for r in scan]
        for r in scan:
            if r.f_bw in (1e8, 1e9):
                print(f"  n={r.n} f_bw={r.f_bw:.0e} T={r.gate_time * 1e6:.3f} us "
                      f"1-Fo={r.one_minus_Fo:.2e}")
    write_csv(out / "gate_scan.csv", ("scheme",) + fg.SCAN_COLUMNS, rows)
    write_csv(out / "gate_times.csv", ["scheme", "n", "n_pairs", "gate_time_s"], times)


if __name__ == "__main__":
    main()
