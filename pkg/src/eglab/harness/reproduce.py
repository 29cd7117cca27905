"""Canned end-to-end scenarios with fixed seeds. Each emits CSVs and a list of PASS/FAIL checks."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from ..egsolve import SolverConfig, one_step_bound_check, run, write_trajectory_csv
from ..stepan import gamma_sweep, q_of_gamma, uniform_grid, write_sweep_csv
from .config import named_operator

RATIO_TOL = 1e-9


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _ratio_check(name, ratios, target) -> Check:
    got = [r for r in ratios if r is not None]
    err = max(abs(r - target) for r in got) if got else math.inf
    return Check(name, err <= RATIO_TOL, f"{len(got)} ratios, max |ratio - {target:.9f}| = {err:.3e}")


def divergence(out: Path) -> list[Check]:
    F = named_operator("neg_identity", n=1)
    traj = run(F, [1.0], [0.0], SolverConfig(gamma=0.5, max_iters=20))
    write_trajectory_csv(traj, out / "divergence_trajectory.csv")
    return [
        _ratio_check("neg_identity ratio = 1.75", traj.ratios(), 1.75),
        Check("20 iterations recorded", traj.iterations == 20, f"{traj.iterations} iterations"),
        Check("classified non-convergent", traj.verdict() in ("non_convergent", "diverged"), traj.verdict()),
    ]


def monotone_control(out: Path) -> list[Check]:
    F = named_operator("rotation")
    traj = run(F, [1.0, 0.0], [0.0, 0.0], SolverConfig(gamma=0.5, max_iters=200, residual_stop=1e-8))
    write_trajectory_csv(traj, out / "monotone_control_trajectory.csv")
    return [
        _ratio_check("rotation ratio = sqrt(0.8125)", traj.ratios(), math.sqrt(0.8125)),
        Check("residual < 1e-8 within 200 iterations", traj.termination.value == "residual_met",
              f"{traj.termination.value} after {traj.iterations} iterations"),
    ]


def bound_tightness(out: Path) -> list[Check]:
    gam = np.linspace(0.01, 1.0, 100)
    worst_q = 0.0
    for mu in (0.0, 0.5, 1.0, 2.0):
        lhs = q_of_gamma(mu, mu, gam)
        rhs = (1 + gam * mu + (gam * mu) ** 2) ** 2
        worst_q = max(worst_q, float(np.max(np.abs(lhs - rhs) / rhs)))
    F = named_operator("neg_identity")
    bc = one_step_bound_check(F, [0.0, 0.0], 0.5, 1.0, 1.0, n_samples=1000, radius=1.0, seed=0)
    (out / "bound_tightness.json").write_text(
        json.dumps({"q": bc.q, "worst_ratio": bc.worst_ratio, "fraction_satisfied": bc.fraction_satisfied,
                    "identity_max_rel_err": worst_q}, indent=2, sort_keys=True) + "\n"
    )
    return [
        Check("q = (1 + g mu + g^2 mu^2)^2 when L = mu", worst_q <= 1e-12, f"max rel err {worst_q:.3e}"),
        Check("neg_identity worst_ratio = 1", abs(bc.worst_ratio - 1.0) <= RATIO_TOL,
              f"worst_ratio {bc.worst_ratio!r}, fraction {bc.fraction_satisfied}"),
    ]


def q_claim_sweep(out: Path) -> list[Check]:
    grid = uniform_grid(1.0, 1000)
    weak = gamma_sweep(0.01, 1.0, grid)
    strong = gamma_sweep(1.0, 1.0, grid)
    write_sweep_csv(weak, out / "sweep_mu0.01_L1.csv")
    write_sweep_csv(strong, out / "sweep_mu1_L1.csv")
    at_half = next(r for r in weak if r.gamma == 0.5)
    return [
        Check("(0.01, 1): q(0.5) < 1", at_half.q < 1.0, f"q(0.5) = {at_half.q!r}"),
        Check("(1, 1): q > 1 on (0, 1]", all(r.q > 1.0 for r in strong), f"min q = {min(r.q for r in strong)!r}"),
    ]


CASES: dict[str, Callable[[Path], list[Check]]] = {
    "divergence": divergence,
    "monotone_control": monotone_control,
    "bound_tightness": bound_tightness,
    "q_claim_sweep": q_claim_sweep,
}


def reproduce(case: str, out: Path) -> list[Check]:
    if case not in CASES:
        raise KeyError(f"unknown case {case!r}; valid: {', '.join(CASES)}")
    out.mkdir(parents=True, exist_ok=True)
    checks = CASES[case](out)
    summary = {"case": case, "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks]}
    (out / f"{case}_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return checks
