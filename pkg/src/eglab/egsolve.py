"""Extragradient iteration, trajectories, and an empirical check of the one-step error bound.

    y_{k+1} = x_k - gamma F(x_k)
    x_{k+1} = x_k - gamma F(y_{k+1})
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .linop import LinearOperator
from .stepan import fmt_float, q_of_gamma
from .viclass import _uniform_ball

Operator = Callable[[np.ndarray], np.ndarray]

XSTAR_TOL = 1e-9
BOUND_RTOL = 1e-12


class NumericOverflowError(ArithmeticError):
    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration


class Termination(str, enum.Enum):
    RESIDUAL_MET = "residual_met"
    DIVERGED = "diverged"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass(frozen=True)
class SolverConfig:
    gamma: float
    max_iters: int = 1000
    residual_stop: float = 1e-10
    divergence_stop: float = 1e12
    keep_iterates: int = 100

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.residual_stop < 0:
            raise ValueError("residual_stop must be non-negative")
        if not self.divergence_stop > self.residual_stop:
            raise ValueError("divergence_stop must exceed residual_stop")
        if self.keep_iterates < 0:
            raise ValueError("keep_iterates must be non-negative")

    @property
    def outside_unit_interval(self) -> bool:
        """True when gamma is not in the open interval (0, 1)."""
        return not (0 < self.gamma < 1)


def _eval(F: Operator, x: np.ndarray, k: int | None) -> np.ndarray:
    fx = np.asarray(F(x), dtype=float)
    if not np.all(np.isfinite(fx)):
        where = "" if k is None else f" at iterate {k}"
        raise NumericOverflowError(f"non-finite operator value{where}", k)
    return fx


def eg_step(F: Operator, x, gamma: float, k: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """One extragradient step from x; returns (y_next, x_next)."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    x = np.asarray(x, dtype=float)
    y = x - gamma * _eval(F, x, k)
    x_next = x - gamma * _eval(F, y, k)
    if not np.all(np.isfinite(x_next)):
        raise NumericOverflowError(f"non-finite iterate at {k}", k)
    return y, x_next


@dataclass
class Trajectory:
    gamma: float
    xs: list[np.ndarray] = field(default_factory=list)
    ys: list[np.ndarray] = field(default_factory=list)
    error_norms: list[float] = field(default_factory=list)
    residual_norms: list[float] = field(default_factory=list)
    termination: Termination = Termination.BUDGET_EXHAUSTED
    outside_unit_interval: bool = False
    has_solution: bool = True

    @property
    def iterations(self) -> int:
        return len(self.error_norms) - 1

    def ratios(self) -> list[float | None]:
        """err[k]/err[k-1]; None at k = 0 or where the previous error is zero."""
        e = self.error_norms
        out: list[float | None] = [None]
        for k in range(1, len(e)):
            out.append(e[k] / e[k - 1] if e[k - 1] > 0 and math.isfinite(e[k - 1]) else None)
        return out

    def geometric_mean_ratio(self) -> float | None:
        return geometric_mean_ratio(self.error_norms)

    def verdict(self) -> str:
        """converged | diverged | non_convergent | converging | stalled."""
        if self.termination is Termination.RESIDUAL_MET:
            return "converged"
        if self.termination is Termination.DIVERGED:
            return "diverged"
        g = self.geometric_mean_ratio()
        if g is None:
            return "stalled"
        if g > 1 + 1e-12:
            return "non_convergent"
        if g < 1 - 1e-12:
            return "converging"
        return "stalled"

    def verify(self, F: Operator) -> bool:
        """Recompute every kept (x_k, y_{k+1}, x_{k+1}) triple and compare bit for bit."""
        for k in range(len(self.ys)):
            if k + 1 >= len(self.xs):
                break
            y, xn = eg_step(F, self.xs[k], self.gamma)
            if not (np.array_equal(y, self.ys[k]) and np.array_equal(xn, self.xs[k + 1])):
                return False
        return True

    def summary(self) -> dict:
        return {
            "termination": self.termination.value,
            "verdict": self.verdict(),
            "iterations": self.iterations,
            "final_error_norm": self.error_norms[-1] if self.has_solution else None,
            "final_residual_norm": self.residual_norms[-1],
            "geometric_mean_ratio": self.geometric_mean_ratio(),
            "gamma": self.gamma,
            "gamma_outside_unit_interval": self.outside_unit_interval,
        }


def geometric_mean_ratio(error_norms) -> float | None:
    """(e_K / e_0)^(1/K) over the finite, positive prefix of the error record."""
    e = [v for v in error_norms]
    if len(e) < 2 or not (e[0] > 0) or not math.isfinite(e[0]):
        return None
    K = len(e) - 1
    if not (e[K] > 0) or not math.isfinite(e[K]):
        return None
    return math.exp((math.log(e[K]) - math.log(e[0])) / K)


def run(F: Operator, x0, x_star=None, cfg: SolverConfig | None = None, **kw) -> Trajectory:
    """Run EG from x0 until the residual target, the divergence cutoff, or the budget.

    For a LinearOperator the solution defaults to the origin. Without a known
    solution the error norms are recorded as NaN.
    """
    if cfg is None:
        cfg = SolverConfig(**kw)
    x = np.array(x0, dtype=float).reshape(-1)
    if x_star is None and isinstance(F, LinearOperator):
        x_star = np.zeros_like(x)
    if x_star is not None:
        x_star = np.array(x_star, dtype=float).reshape(-1)
        r = float(np.linalg.norm(_eval(F, x_star, None)))
        if r > XSTAR_TOL:
            raise ValueError(f"x_star is not a zero of F (residual {r:.3e} > {XSTAR_TOL})")

    traj = Trajectory(gamma=cfg.gamma, outside_unit_interval=cfg.outside_unit_interval, has_solution=x_star is not None)
    m = cfg.keep_iterates

    def record(k, x, fx):
        traj.error_norms.append(float(np.linalg.norm(x - x_star)) if x_star is not None else math.nan)
        traj.residual_norms.append(float(np.linalg.norm(fx)))
        if k <= m:
            traj.xs.append(x.copy())

    try:
        fx = _eval(F, x, 0)
    except NumericOverflowError:
        traj.termination = Termination.DIVERGED
        return traj
    record(0, x, fx)
    for k in range(cfg.max_iters):
        if traj.residual_norms[-1] < cfg.residual_stop:
            traj.termination = Termination.RESIDUAL_MET
            return traj
        e = traj.error_norms[-1]
        if np.linalg.norm(x) > cfg.divergence_stop or (math.isfinite(e) and e > cfg.divergence_stop):
            traj.termination = Termination.DIVERGED
            return traj
        try:
            y = x - cfg.gamma * fx
            x_next = x - cfg.gamma * _eval(F, y, k)
            if not np.all(np.isfinite(x_next)):
                raise NumericOverflowError("non-finite iterate", k)
            fx = _eval(F, x_next, k + 1)
        except NumericOverflowError:
            traj.termination = Termination.DIVERGED
            return traj
        if k < m:
            traj.ys.append(y.copy())
        x = x_next
        record(k + 1, x, fx)
    if traj.residual_norms[-1] < cfg.residual_stop:
        traj.termination = Termination.RESIDUAL_MET
    elif np.linalg.norm(x) > cfg.divergence_stop:
        traj.termination = Termination.DIVERGED
    else:
        traj.termination = Termination.BUDGET_EXHAUSTED
    return traj


def asymptotic_rate(F: Operator, x0, gamma: float, iters: int = 20_000, tol: float = 1e-14) -> float:
    """Per-step error growth of EG on a linear F, by power iteration on the EG map.

    The iterate is renormalized after every step (valid because the EG map of a
    linear operator is homogeneous), so growth or decay never over/underflows.
    Stops early once the ratio changes by less than `tol` between steps.
    """
    x = np.array(x0, dtype=float).reshape(-1)
    x /= np.linalg.norm(x)
    prev = math.nan
    ratio = math.nan
    for k in range(iters):
        _, x = eg_step(F, x, gamma, k)
        ratio = float(np.linalg.norm(x))
        x /= ratio
        if abs(ratio - prev) < tol:
            break
        prev = ratio
    return ratio


def forward_step(F: Operator, x, gamma: float) -> np.ndarray:
    """Plain forward step x - gamma F(x); comparison baseline only."""
    x = np.asarray(x, dtype=float)
    return x - gamma * _eval(F, x, None)


@dataclass(frozen=True)
class BoundCheck:
    fraction_satisfied: float
    worst_ratio: float
    q: float
    n_samples: int


def one_step_bound_check(
    F: Operator,
    x_star,
    gamma: float,
    mu: float,
    L: float,
    n_samples: int = 1000,
    radius: float = 1.0,
    seed: int = 0,
) -> BoundCheck:
    """Test |e_{k+1}|^2 <= q(gamma) |e_k|^2 for one EG step from points sampled around x_star.

    worst_ratio is the largest |e_{k+1}|^2 / (q |e_k|^2) seen.
    """
    x_star = np.asarray(x_star, dtype=float).reshape(-1)
    r = float(np.linalg.norm(_eval(F, x_star, None)))
    if r > XSTAR_TOL:
        raise ValueError(f"x_star is not a zero of F (residual {r:.3e} > {XSTAR_TOL})")
    q = float(q_of_gamma(mu, L, gamma))
    rng = np.random.default_rng(seed)
    pts = _uniform_ball(rng, n_samples, x_star.size, radius)
    ok = 0
    worst = -math.inf
    for d in pts:
        e0 = float(d @ d)
        if e0 < 1e-24:
            continue
        _, xn = eg_step(F, x_star + d, gamma)
        e1 = xn - x_star
        e1 = float(e1 @ e1)
        ratio = e1 / (q * e0) if q > 0 else math.inf
        worst = max(worst, ratio)
        if e1 <= q * e0 * (1 + BOUND_RTOL):
            ok += 1
    return BoundCheck(fraction_satisfied=ok / n_samples, worst_ratio=worst, q=q, n_samples=n_samples)


TRAJECTORY_COLUMNS = ("iter", "err_norm", "resid_norm", "ratio")


def _cell(v: float | None) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return fmt_float(v)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_COLUMNS)
        for k, (e, r, q) in enumerate(zip(traj.error_norms, traj.residual_norms, traj.ratios())):
            w.writerow([k, _cell(e), _cell(r), _cell(q)])


def read_trajectory_csv(path) -> dict[str, list]:
    cols: dict[str, list] = {c: [] for c in TRAJECTORY_COLUMNS}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            cols["iter"].append(int(row["iter"]))
            for c in TRAJECTORY_COLUMNS[1:]:
                cols[c].append(float(row[c]) if row[c] != "" else None)
    return cols
