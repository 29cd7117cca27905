"""Sweep q(gamma) over a (mu, L) grid and report where q < 1 on (0, 1).

q < 1 somewhere on (0, 1) exactly when the one-step bound certifies contraction
for some step size, which happens once L is large enough relative to mu.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from eglab.stepan import analyze, fmt_float


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mu-max", type=float, default=1.0)
    ap.add_argument("--L-max", type=float, default=2.0)
    ap.add_argument("--n", type=int, default=41, help="grid points per axis")
    ap.add_argument("--out", type=Path, default=Path("runs/q_claim_audit.csv"))
    args = ap.parse_args()

    mus = np.linspace(0.0, args.mu_max, args.n)
    Ls = np.linspace(0.0, args.L_max, args.n)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    n_contractive = 0
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mu", "L", "sign_changes", "n_roots", "contractive_lo", "contractive_hi"])
        for mu in mus:
            for L in Ls:
                a = analyze(float(mu), float(L), 1.0, 200)
                lo, hi = a.contractive_gammas[0] if a.contractive_gammas else ("", "")
                n_contractive += bool(a.contractive_gammas)
                w.writerow([fmt_float(mu), fmt_float(L), a.sign_changes, len(a.positive_roots),
                            lo if lo == "" else fmt_float(lo), hi if hi == "" else fmt_float(hi)])
    print(f"{n_contractive} of {len(mus) * len(Ls)} (mu, L) pairs have q < 1 somewhere on (0, 1]")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
