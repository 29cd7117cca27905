"""Experiment configs: a single JSON document describing operator, solver, analysis and outputs."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from ..egsolve import SolverConfig
from ..linop import LinearOperator, Spectrum, SpectrumError, make_normal_from_spectrum

NAMED_OPERATORS = ("neg_identity", "rotation", "damped_rotation", "cubic_saddle")
OPERATOR_KINDS = ("spectrum", "matrix", "named")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Malformed config; `where` names the field path or the line/column."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


def cubic_saddle(x: np.ndarray) -> np.ndarray:
    """F(u, v) = (v - u^3, -u - v^3). Zero only at the origin; hypomonotone on bounded sets."""
    x = np.asarray(x, dtype=float)
    u, v = x[..., 0], x[..., 1]
    return np.stack([v - u**3, -u - v**3], axis=-1)


@dataclass(frozen=True)
class OperatorSpec:
    kind: str
    name: str | None = None
    eigenvalues: tuple[tuple[float, float], ...] | None = None
    entries: tuple[tuple[float, ...], ...] | None = None
    seed: int | None = None
    params: dict = field(default_factory=dict)

    @property
    def linear(self) -> bool:
        return not (self.kind == "named" and self.name == "cubic_saddle")

    @property
    def dim(self) -> int:
        if self.kind == "spectrum":
            return len(self.eigenvalues)
        if self.kind == "matrix":
            return len(self.entries)
        if self.name == "neg_identity":
            return int(self.params.get("n", 2))
        return 2

    def build(self, default_seed: int = 0) -> LinearOperator | Callable[[np.ndarray], np.ndarray]:
        if self.kind == "spectrum":
            seed = self.seed if self.seed is not None else default_seed
            try:
                return make_normal_from_spectrum(Spectrum.from_pairs(self.eigenvalues), seed)
            except SpectrumError as exc:
                raise ConfigError("operator.eigenvalues", str(exc)) from exc
        if self.kind == "matrix":
            try:
                return LinearOperator(np.array(self.entries, dtype=float))
            except ValueError as exc:
                raise ConfigError("operator.entries", str(exc)) from exc
        return named_operator(self.name, **self.params)


def named_operator(name: str, **params):
    if name == "neg_identity":
        n = int(params.get("n", 2))
        return LinearOperator(-np.eye(n))
    if name == "rotation":
        return LinearOperator(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    if name == "damped_rotation":
        a = float(params.get("a", 0.1))
        b = float(params.get("b", 1.0))
        return LinearOperator(np.array([[-a, b], [-b, -a]]))
    if name == "cubic_saddle":
        return cubic_saddle
    raise ConfigError("operator.name", f"unknown named operator {name!r}; valid: {', '.join(NAMED_OPERATORS)}")


@dataclass(frozen=True)
class AnalysisSpec:
    mode: str = "certified"  # certified | sampled | override
    mu: float | None = None
    L: float | None = None
    gamma_max: float = 1.0
    grid_size: int = 1000
    n_pairs: int = 20_000
    radius: float = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    operator: OperatorSpec
    solver: SolverConfig
    x0: tuple[float, ...] | None = None
    x_star: tuple[float, ...] | None = None
    analysis: AnalysisSpec | None = None
    out_dir: str | None = None
    formats: tuple[str, ...] = FORMATS
    seed: int = 0
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    def config_hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def initial_point(self) -> np.ndarray:
        n = self.operator.dim
        if self.x0 is not None:
            return np.array(self.x0, dtype=float)
        x = np.zeros(n)
        x[0] = 1.0
        return x

    def solution(self) -> np.ndarray | None:
        if self.x_star is not None:
            return np.array(self.x_star, dtype=float)
        if self.operator.kind == "named":
            return np.zeros(self.operator.dim)
        return None


def _num(d: dict, key: str, where: str, default=None, kind=float):
    if key not in d:
        if default is None:
            raise ConfigError(f"{where}.{key}", "required field missing")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}", f"expected a number, got {v!r}")
    if kind is int:
        if isinstance(v, float) and not v.is_integer():
            raise ConfigError(f"{where}.{key}", f"expected an integer, got {v!r}")
        return int(v)
    return float(v)


def _vector(v, where: str) -> tuple[float, ...]:
    if not isinstance(v, list) or not v or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in v):
        raise ConfigError(where, "expected a non-empty list of numbers")
    return tuple(float(t) for t in v)


def _check_keys(d: dict, allowed: set, where: str):
    extra = set(d) - allowed
    if extra:
        raise ConfigError(where, f"unknown field(s): {', '.join(sorted(extra))}")


def parse_operator(d: Any) -> OperatorSpec:
    if not isinstance(d, dict):
        raise ConfigError("operator", "expected an object")
    kind = d.get("kind")
    if kind not in OPERATOR_KINDS:
        raise ConfigError("operator.kind", f"must be one of {', '.join(OPERATOR_KINDS)}, got {kind!r}")
    if kind == "spectrum":
        _check_keys(d, {"kind", "eigenvalues", "seed"}, "operator")
        ev = d.get("eigenvalues")
        if not isinstance(ev, list) or not ev:
            raise ConfigError("operator.eigenvalues", "expected a non-empty list of [re, im] pairs")
        pairs = []
        for i, p in enumerate(ev):
            if (
                not isinstance(p, list)
                or len(p) != 2
                or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in p)
            ):
                raise ConfigError(f"operator.eigenvalues[{i}]", f"expected [re, im], got {p!r}")
            pairs.append((float(p[0]), float(p[1])))
        try:
            Spectrum.from_pairs(pairs)
        except SpectrumError as exc:
            raise ConfigError("operator.eigenvalues", str(exc)) from exc
        seed = _num(d, "seed", "operator", default=0, kind=int) if "seed" in d else None
        return OperatorSpec(kind="spectrum", eigenvalues=tuple(pairs), seed=seed)
    if kind == "matrix":
        _check_keys(d, {"kind", "entries"}, "operator")
        ent = d.get("entries")
        if not isinstance(ent, list) or not ent:
            raise ConfigError("operator.entries", "expected a square list of rows")
        rows = []
        for i, row in enumerate(ent):
            rows.append(_vector(row, f"operator.entries[{i}]"))
            if len(rows[-1]) != len(ent):
                raise ConfigError(f"operator.entries[{i}]", f"row has {len(rows[-1])} entries, expected {len(ent)}")
        return OperatorSpec(kind="matrix", entries=tuple(rows))
    name = d.get("name")
    if name not in NAMED_OPERATORS:
        raise ConfigError("operator.name", f"must be one of {', '.join(NAMED_OPERATORS)}, got {name!r}")
    allowed = {"kind", "name"} | {"neg_identity": {"n"}, "damped_rotation": {"a", "b"}}.get(name, set())
    _check_keys(d, allowed, "operator")
    params = {}
    if name == "neg_identity" and "n" in d:
        params["n"] = _num(d, "n", "operator", kind=int)
        if params["n"] < 1:
            raise ConfigError("operator.n", "must be >= 1")
    if name == "damped_rotation":
        params["a"] = _num(d, "a", "operator", default=0.1)
        params["b"] = _num(d, "b", "operator", default=1.0)
    return OperatorSpec(kind="named", name=name, params=params)


def parse_analysis(d: Any, op: OperatorSpec) -> AnalysisSpec:
    if d is None:
        return AnalysisSpec(mode="certified" if op.linear else "sampled")
    if isinstance(d, str):
        d = {"constants": d}
    if not isinstance(d, dict):
        raise ConfigError("analysis", "expected an object or 'certified' / 'sampled'")
    _check_keys(d, {"constants", "mu", "L", "gamma_max", "grid_size", "n_pairs", "radius"}, "analysis")
    extra = dict(
        gamma_max=_num(d, "gamma_max", "analysis", default=1.0),
        grid_size=_num(d, "grid_size", "analysis", default=1000, kind=int),
        n_pairs=_num(d, "n_pairs", "analysis", default=20_000, kind=int),
        radius=_num(d, "radius", "analysis", default=1.0),
    )
    if extra["gamma_max"] <= 0 or extra["grid_size"] < 1 or extra["n_pairs"] < 1 or extra["radius"] <= 0:
        raise ConfigError("analysis", "gamma_max, radius must be > 0 and grid_size, n_pairs >= 1")
    if "mu" in d or "L" in d:
        if "constants" in d:
            raise ConfigError("analysis", "give either constants or explicit mu/L, not both")
        mu = _num(d, "mu", "analysis")
        L = _num(d, "L", "analysis")
        if mu < 0 or L < 0:
            raise ConfigError("analysis", "mu and L must be non-negative")
        return AnalysisSpec(mode="override", mu=mu, L=L, **extra)
    mode = d.get("constants", "certified" if op.linear else "sampled")
    if mode not in ("certified", "sampled"):
        raise ConfigError("analysis.constants", f"must be 'certified' or 'sampled', got {mode!r}")
    if mode == "certified" and not op.linear:
        raise ConfigError("analysis.constants", "'certified' constants require a linear operator")
    return AnalysisSpec(mode=mode, **extra)


def parse_config(doc: Any, seed_override: int | None = None) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    _check_keys(doc, {"operator", "solver", "analysis", "outputs", "seed"}, "<root>")
    if "operator" not in doc:
        raise ConfigError("operator", "required field missing")
    op = parse_operator(doc["operator"])
    s = doc.get("solver", {})
    if not isinstance(s, dict):
        raise ConfigError("solver", "expected an object")
    _check_keys(s, {"gamma", "max_iters", "residual_stop", "divergence_stop", "keep_iterates", "x0", "x_star"}, "solver")
    try:
        solver = SolverConfig(
            gamma=_num(s, "gamma", "solver"),
            max_iters=_num(s, "max_iters", "solver", default=1000, kind=int),
            residual_stop=_num(s, "residual_stop", "solver", default=1e-10),
            divergence_stop=_num(s, "divergence_stop", "solver", default=1e12),
            keep_iterates=_num(s, "keep_iterates", "solver", default=100, kind=int),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("solver", str(exc)) from exc
    x0 = _vector(s["x0"], "solver.x0") if "x0" in s else None
    x_star = _vector(s["x_star"], "solver.x_star") if "x_star" in s else None
    for nm, v in (("x0", x0), ("x_star", x_star)):
        if v is not None and len(v) != op.dim:
            raise ConfigError(f"solver.{nm}", f"length {len(v)} does not match operator dimension {op.dim}")
    analysis = parse_analysis(doc.get("analysis"), op)
    outputs = doc.get("outputs", {})
    if not isinstance(outputs, dict):
        raise ConfigError("outputs", "expected an object")
    _check_keys(outputs, {"directory", "formats"}, "outputs")
    out_dir = outputs.get("directory")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError("outputs.directory", "expected a path string")
    formats = outputs.get("formats", list(FORMATS))
    if not isinstance(formats, list) or not set(formats) <= set(FORMATS) or not formats:
        raise ConfigError("outputs.formats", f"expected a non-empty subset of {list(FORMATS)}")
    seed = _num(doc, "seed", "<root>", default=0, kind=int) if "seed" in doc else 0
    if seed_override is not None:
        seed = seed_override
    return ExperimentConfig(
        operator=op,
        solver=solver,
        x0=x0,
        x_star=x_star,
        analysis=analysis,
        out_dir=out_dir,
        formats=tuple(formats),
        seed=seed,
        raw=doc,
    )


def load_config(path: str | Path, seed_override: int | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from exc
    return parse_config(doc, seed_override)
