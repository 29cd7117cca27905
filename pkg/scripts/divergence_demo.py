"""EG on F(x) = -x and on a rotation at the same step size.

Both operators have |F(x)| = |x|, so they share L = 1. Only the sign of the
symmetric part differs. The rotation contracts at sqrt(0.8125) per step and
-I grows by 1.75 per step.
"""

import argparse
import csv
from pathlib import Path

from eglab.egsolve import SolverConfig, run
from eglab.harness.config import named_operator
from eglab.stepan import fmt_float


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gamma", type=float, default=0.5)
    ap.add_argument("--iters", type=int, default=40)
    ap.add_argument("--out", type=Path, default=Path("runs/divergence_demo.csv"))
    args = ap.parse_args()

    cfg = SolverConfig(gamma=args.gamma, max_iters=args.iters, residual_stop=0.0)
    runs = {name: run(named_operator(name), [1.0, 0.0], [0.0, 0.0], cfg) for name in ("neg_identity", "rotation")}

    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", *(f"{n}_err" for n in runs)])
        for k in range(args.iters + 1):
            w.writerow([k, *(fmt_float(t.error_norms[k]) for t in runs.values())])

    for name, t in runs.items():
        print(f"{name:13s} rate {t.geometric_mean_ratio():.9f}  final err {t.error_norms[-1]:.3e}  {t.verdict()}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
