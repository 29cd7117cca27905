"""Command implementations behind the CLI. Each returns plain dicts and writes files."""

from __future__ import annotations

import json
import math
from datetime import datetime, timezone
from pathlib import Path

from .. import __version__
from ..egsolve import run, write_trajectory_csv
from ..linop import LinearOperator
from ..stepan import analyze, gamma_sweep, q_of_gamma, uniform_grid, write_sweep_csv
from ..viclass import certify_empirical, classify_linear
from .config import ExperimentConfig


def finite_json(obj):
    """Replace inf/nan floats by None so the output stays strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: finite_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [finite_json(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(finite_json(obj), indent=2, sort_keys=True, allow_nan=False)


def _dump(obj, path: Path) -> None:
    path.write_text(dumps(obj) + "\n")


def class_report(cfg: ExperimentConfig, F) -> dict:
    if isinstance(F, LinearOperator):
        rep = classify_linear(F).to_json()
        rep["source"] = "exact"
        return rep
    a = cfg.analysis
    cert = certify_empirical(F, 0.0, a.n_pairs, a.radius, cfg.seed, dim=cfg.operator.dim, vectorized=True)
    mu = cert.sampled_mu
    return {
        "monotone": not cert.violation_found,
        "mu": mu,
        "lipschitz": cert.max_lipschitz_quotient,
        "cohypo": None,
        "min_sym_eig": cert.min_quotient,
        "source": f"sampled({cert.samples} pairs, radius {a.radius})",
    }


def constants(cfg: ExperimentConfig, report: dict) -> tuple[float, float]:
    a = cfg.analysis
    if a.mode == "override":
        return a.mu, a.L
    return report["mu"], report["lipschitz"]


def cmd_classify(cfg: ExperimentConfig, out: Path | None = None) -> dict:
    F = cfg.operator.build(cfg.seed)
    rep = class_report(cfg, F)
    if out is not None and "json" in cfg.formats:
        out.mkdir(parents=True, exist_ok=True)
        _dump(rep, out / "classify.json")
    return rep


def cmd_solve(cfg: ExperimentConfig, out: Path | None = None) -> dict:
    """Run EG per the config; writes trajectory.csv and report.json."""
    F = cfg.operator.build(cfg.seed)
    rep = class_report(cfg, F)
    mu, L = constants(cfg, rep)
    traj = run(F, cfg.initial_point(), cfg.solution(), cfg.solver)
    gmax = max(cfg.analysis.gamma_max, cfg.solver.gamma)
    sa = analyze(mu, L, gmax)
    report = {
        "class_report": rep,
        "step_analysis": {
            "mu": mu,
            "L": L,
            "q_at_gamma": float(q_of_gamma(mu, L, cfg.solver.gamma)),
            **{k: v for k, v in sa.to_json().items() if k not in ("mu", "L")},
        },
        "trajectory": traj.summary(),
        "provenance": {
            "config_hash": cfg.config_hash(),
            "seed": cfg.seed,
            "tool_version": __version__,
            "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        },
    }
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        if "csv" in cfg.formats:
            write_trajectory_csv(traj, out / "trajectory.csv")
        if "json" in cfg.formats:
            _dump(report, out / "report.json")
    return report


def cmd_analyze(mu: float, L: float, gamma_max: float, grid_size: int, out: Path | None = None,
                formats=("csv", "json")) -> dict:
    sa = analyze(mu, L, gamma_max)
    rows = gamma_sweep(mu, L, uniform_grid(gamma_max, grid_size))
    result = sa.to_json()
    result["sweep_min_q"] = min(r.q for r in rows)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        if "csv" in formats:
            write_sweep_csv(rows, out / "sweep.csv")
        if "json" in formats:
            _dump(result, out / "analysis.json")
    return result


def cmd_sweep(mu: float, L: float, gamma_max: float, grid_size: int, out: Path | None = None):
    rows = gamma_sweep(mu, L, uniform_grid(gamma_max, grid_size))
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_sweep_csv(rows, out / "sweep.csv")
    return rows

