"""Monotonicity class and constants (mu, L, rho) of an operator.

Linear operators are classified exactly from the symmetric part and the
singular values; black-box maps only get a sampled certificate.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .linop import LinearOperator, min_singular_value, operator_norm, symmetric_part

MONOTONE_TOL = 1e-12
INVERTIBLE_TOL = 1e-12
NORMAL_TOL = 1e-10
CROSS_CHECK_TOL = 1e-9
VIOLATION_TOL = 1e-9


class SingularOperatorError(ValueError):
    pass


@dataclass(frozen=True)
class ClassReport:
    monotone: bool
    mu: float
    lipschitz: float
    min_sym_eig: float
    cohypo: float | None = None

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EmpiricalCertificate:
    samples: int
    min_quotient: float
    claimed_mu: float
    violation_found: bool
    max_lipschitz_quotient: float

    @property
    def sampled_mu(self) -> float:
        return max(0.0, -self.min_quotient)


def classify_linear(op: LinearOperator) -> ClassReport:
    """Exact class report for F(x) = A x.

    For normal A the smallest symmetric-part eigenvalue must coincide with the
    smallest real part of the spectrum; a mismatch raises rather than reports.
    """
    lam_min = float(op.sym_eigenvalues[0])
    scale = max(1.0, float(np.max(np.abs(op.entries))))
    if op.normality_residual() <= NORMAL_TOL * scale**2:
        re_min = float(np.min(op.eigenvalues.real))
        if abs(re_min - lam_min) > CROSS_CHECK_TOL * scale:
            raise RuntimeError(
                f"normal operator: min sym eigenvalue {lam_min!r} != min Re(eig) {re_min!r}"
            )
    rho = None
    if min_singular_value(op) > INVERTIBLE_TOL:
        rho = cohypo_modulus(op)
    return ClassReport(
        monotone=lam_min >= -MONOTONE_TOL,
        mu=max(0.0, -lam_min),
        lipschitz=operator_norm(op),
        min_sym_eig=lam_min,
        cohypo=rho,
    )


def cohypo_modulus(op: LinearOperator) -> float:
    """max(0, -lambda_min(sym(A^-1))), i.e. the hypomonotonicity modulus of the inverse."""
    smin = min_singular_value(op)
    if smin <= INVERTIBLE_TOL:
        raise SingularOperatorError(f"operator is singular (min singular value {smin:.3e})")
    inv = np.linalg.inv(op.entries)
    lam_min = float(np.linalg.eigvalsh(symmetric_part(inv))[0])
    return max(0.0, -lam_min)


def _uniform_ball(rng: np.random.Generator, m: int, n: int, radius: float) -> np.ndarray:
    g = rng.standard_normal((m, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(m) ** (1.0 / n)
    return g * r[:, None]


def sample_pairs(n: int, n_pairs: int, radius: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded (x, y) pairs uniform in the ball, resampling pairs closer than 1e-12."""
    rng = np.random.default_rng(seed)
    xs = _uniform_ball(rng, n_pairs, n, radius)
    ys = _uniform_ball(rng, n_pairs, n, radius)
    bad = np.linalg.norm(xs - ys, axis=1) < 1e-12
    while np.any(bad):
        k = int(bad.sum())
        xs[bad] = _uniform_ball(rng, k, n, radius)
        ys[bad] = _uniform_ball(rng, k, n, radius)
        bad = np.linalg.norm(xs - ys, axis=1) < 1e-12
    return xs, ys


def certify_empirical(
    F: Callable[[np.ndarray], np.ndarray],
    claimed_mu: float,
    n_pairs: int,
    radius: float,
    seed: int,
    dim: int | None = None,
    vectorized: bool = False,
) -> EmpiricalCertificate:
    """Sample <F(x) - F(y), x - y> / |x - y|^2 over pairs in a ball and compare with -claimed_mu.

    `dim` defaults to ``F.n`` for LinearOperator inputs. With ``vectorized=True``
    F is called once on an (m, n) stack of rows.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    if radius <= 0:
        raise ValueError("radius must be positive")
    if dim is None:
        if isinstance(F, LinearOperator):
            dim = F.n
            vectorized = True
        else:
            raise ValueError("dim is required for black-box operators")
    xs, ys = sample_pairs(dim, n_pairs, radius, seed)
    if vectorized:
        fx = np.asarray(F(xs), dtype=float)
        fy = np.asarray(F(ys), dtype=float)
    else:
        fx = np.array([F(x) for x in xs], dtype=float).reshape(n_pairs, dim)
        fy = np.array([F(y) for y in ys], dtype=float).reshape(n_pairs, dim)
    d = xs - ys
    df = fx - fy
    dd = np.einsum("ij,ij->i", d, d)
    quot = np.einsum("ij,ij->i", df, d) / dd
    lip = np.sqrt(np.einsum("ij,ij->i", df, df) / dd)
    qmin = float(np.min(quot))
    return EmpiricalCertificate(
        samples=n_pairs,
        min_quotient=qmin,
        claimed_mu=float(claimed_mu),
        violation_found=qmin < -claimed_mu - VIOLATION_TOL,
        max_lipschitz_quotient=float(np.max(lip)),
    )
