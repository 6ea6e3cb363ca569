"""Thermal factor of the motional infidelity: n̄|α|² against (n̄ + 1/2)|α|².

For a thermal mode the mean displacement operator is exactly
<D(β)> = exp(-(n̄ + 1/2)|β|²). This script evaluates it by brute force on
a truncated Fock space for the residual displacements of grid-snapped
gates, and prints F_o with both thermal conventions next to it.

    python scripts/thermal_check.py --nbar 0 0.5 2 --f-bw 1e8
"""

import argparse

import numpy as np
from scipy.linalg import expm

from ionkick import fastgate as fg


def thermal_mean_displacement(beta: complex, nbar: float, levels: int = 160) -> complex:
    a = np.diag(np.sqrt(np.arange(1, levels)), 1).astype(complex)
    d = expm(beta * a.conj().T - np.conj(beta) * a)
    n = np.arange(levels)
    p = (nbar / (nbar + 1)) ** n / (nbar + 1) if nbar > 0 else (n == 0).astype(float)
    if p[-1] > 1e-12:
        raise ValueError("increase the Fock truncation")
    return complex(np.sum(p * np.diag(d)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nbar", type=float, nargs="+", default=[0.0, 0.5, 2.0])
    ap.add_argument("--f-bw", type=float, default=1e8, help="timing grid in Hz")
    ap.add_argument("--scheme", default="GZC")
    ap.add_argument("--n", type=int, default=1)
    args = ap.parse_args()

    trap0 = fg.TrapConfig()
    seq, _ = fg.solve_timings(args.scheme, args.n, trap0)
    snapped = fg.discretize(seq, args.f_bw)
    ac, as_, _ = fg.closure(snapped, trap0)
    dphi = fg.gate_phase(snapped, trap0) - np.pi / 4
    print(f"{args.scheme} n={args.n} on {args.f_bw:.0e} Hz grid: |a_c|={abs(ac):.3e} "
          f"|a_s|={abs(as_):.3e} dphi={dphi:.3e}")
    for nbar in args.nbar:
        exact = abs(thermal_mean_displacement(ac, nbar))
        lit = np.exp(-nbar * abs(ac) ** 2)
        half = np.exp(-(nbar + 0.5) * abs(ac) ** 2)
        f_lit = fg.gate_fidelity(ac, as_, dphi, fg.TrapConfig(nbar_c=nbar, nbar_s=nbar))
        f_half = fg.gate_fidelity(ac, as_, dphi,
                                  fg.TrapConfig(nbar_c=nbar + 0.5, nbar_s=nbar + 0.5))
        print(f"nbar={nbar:4.1f}  |<D(a_c)>| Fock={exact:.8f}  exp(-n|a|^2)={lit:.8f}  "
              f"exp(-(n+1/2)|a|^2)={half:.8f}  F_o literal={f_lit:.8f}  F_o n+1/2={f_half:.8f}")


if __name__ == "__main__":
    main()
