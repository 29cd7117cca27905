"""Search random normal operators for violations of |e+|^2 <= q(gamma) |e|^2.

mu and L are taken exactly from each operator. The bound is tight when every
eigenvalue has modulus L; when the moduli differ, the -gamma^2 L^2 term
over-credits the small modes and the bound can fail. The worst ratio is reported.
"""

import argparse

import numpy as np

from eglab.egsolve import one_step_bound_check
from eglab.linop import make_normal_from_spectrum, random_spectrum
from eglab.viclass import classify_linear


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--operators", type=int, default=200)
    ap.add_argument("--samples", type=int, default=500)
    ap.add_argument("--max-dim", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    worst = (-np.inf, None)
    violations = 0
    for i in range(args.operators):
        n = int(rng.integers(2, args.max_dim + 1))
        op = make_normal_from_spectrum(random_spectrum(n, rng), seed=int(rng.integers(2**31)))
        rep = classify_linear(op)
        gamma = float(rng.uniform(0.01, 1.0))
        bc = one_step_bound_check(op, np.zeros(n), gamma, rep.mu, rep.lipschitz,
                                  n_samples=args.samples, seed=args.seed + i)
        violations += bc.fraction_satisfied < 1.0
        if bc.worst_ratio > worst[0]:
            worst = (bc.worst_ratio, (n, gamma, rep.mu, rep.lipschitz))
    ratio, (n, gamma, mu, L) = worst
    print(f"operators with a violation: {violations} / {args.operators}")
    print(f"max |e+|^2 / (q |e|^2) = {ratio:.12f}  (n={n}, gamma={gamma:.4f}, mu={mu:.4f}, L={L:.4f})")


if __name__ == "__main__":
    main()
