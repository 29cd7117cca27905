"""Real square linear operators, including normal matrices with a prescribed spectrum.

Everything is dense and small (n <= 64). Complex eigenvalue pairs a +/- bi are
realized as 2x2 blocks [[a, b], [-b, a]] so that all arithmetic stays real.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

MAX_DIM = 64
CONJ_TOL = 1e-12
SPECTRUM_MATCH_TOL = 1e-9


class DecompositionError(RuntimeError):
    """A dense decomposition failed or produced non-finite values."""


class SpectrumError(ValueError):
    """Spectrum is not closed under complex conjugation (or is empty)."""

    def __init__(self, message: str, eigenvalue: complex | None = None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


def _is_real(z: complex, tol: float = CONJ_TOL) -> bool:
    return abs(z.imag) <= tol * max(1.0, abs(z))


def _pair_conjugates(values: Sequence[complex]) -> tuple[list[float], list[complex]]:
    """Split into real eigenvalues and one representative (imag > 0) per conjugate pair."""
    reals: list[float] = []
    upper: list[complex] = []
    lower: list[complex] = []
    for z in values:
        if _is_real(z):
            reals.append(z.real)
        elif z.imag > 0:
            upper.append(z)
        else:
            lower.append(z)
    pairs: list[complex] = []
    unused = list(lower)
    for z in upper:
        if not unused:
            raise SpectrumError(f"eigenvalue {z} has no conjugate partner", z)
        dists = [abs(w - z.conjugate()) for w in unused]
        j = int(np.argmin(dists))
        if dists[j] > CONJ_TOL * max(1.0, abs(z)):
            raise SpectrumError(f"eigenvalue {z} has no conjugate partner", z)
        unused.pop(j)
        pairs.append(z)
    if unused:
        raise SpectrumError(f"eigenvalue {unused[0]} has no conjugate partner", unused[0])
    return reals, pairs


@dataclass(frozen=True)
class Spectrum:
    """Multiset of eigenvalues, closed under conjugation."""

    eigenvalues: tuple[complex, ...]

    def __post_init__(self):
        vals = tuple(complex(z) for z in self.eigenvalues)
        if not vals:
            raise SpectrumError("spectrum must be non-empty")
        if not all(np.isfinite(z.real) and np.isfinite(z.imag) for z in vals):
            raise SpectrumError("spectrum contains non-finite values")
        _pair_conjugates(vals)
        object.__setattr__(self, "eigenvalues", vals)

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> "Spectrum":
        """Build from the config form: a list of [re, im] pairs."""
        vals = []
        for p in pairs:
            if len(p) != 2:
                raise SpectrumError(f"expected [re, im] pair, got {p!r}")
            vals.append(complex(float(p[0]), float(p[1])))
        return cls(tuple(vals))

    def to_pairs(self) -> list[list[float]]:
        return [[z.real, z.imag] for z in self.eigenvalues]


def match_spectra(a: Sequence[complex], b: Sequence[complex], tol: float = SPECTRUM_MATCH_TOL) -> bool:
    """Greedy nearest-match multiset comparison of two eigenvalue lists."""
    if len(a) != len(b):
        return False
    remaining = [complex(z) for z in b]
    for z in sorted((complex(w) for w in a), key=lambda w: (w.real, w.imag)):
        dists = [abs(z - w) for w in remaining]
        j = int(np.argmin(dists))
        if dists[j] > tol:
            return False
        remaining.pop(j)
    return True


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """Dense real n x n matrix acting as F(x) = A x.

    Decompositions are computed lazily and cached; the entries are stored as
    a read-only copy so the cache can never go stale.
    """

    entries: np.ndarray
    seed: int | None = None
    spectrum: Spectrum | None = field(default=None, repr=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=float, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValueError(f"entries must be a non-empty square matrix, got shape {a.shape}")
        if a.shape[0] > MAX_DIM:
            raise ValueError(f"dimension {a.shape[0]} exceeds dense cap {MAX_DIM}")
        if not np.all(np.isfinite(a)):
            raise ValueError("entries must be finite")
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __call__(self, x):
        return apply(self, x)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        try:
            w = np.linalg.eigvals(self.entries)
        except np.linalg.LinAlgError as exc:
            raise DecompositionError(f"eigenvalue decomposition failed: {exc}") from exc
        if not np.all(np.isfinite(w)):
            raise DecompositionError("eigenvalue decomposition returned non-finite values")
        return w

    @cached_property
    def sym_eigenvalues(self) -> np.ndarray:
        try:
            w = np.linalg.eigvalsh(symmetric_part(self))
        except np.linalg.LinAlgError as exc:
            raise DecompositionError(f"symmetric eigendecomposition failed: {exc}") from exc
        if not np.all(np.isfinite(w)):
            raise DecompositionError("symmetric eigendecomposition returned non-finite values")
        return w

    @cached_property
    def singular_values(self) -> np.ndarray:
        try:
            s = np.linalg.svd(self.entries, compute_uv=False)
        except np.linalg.LinAlgError as exc:
            raise DecompositionError(f"SVD failed: {exc}") from exc
        if not np.all(np.isfinite(s)):
            raise DecompositionError("SVD returned non-finite values")
        return s

    def normality_residual(self) -> float:
        a = self.entries
        return float(np.max(np.abs(a @ a.T - a.T @ a)))


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix: QR of a Gaussian with the sign of diag(R) fixed."""
    g = rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def block_diagonal_form(spec: Spectrum) -> np.ndarray:
    """Real block-diagonal matrix whose eigenvalues are `spec`."""
    reals, pairs = _pair_conjugates(spec.eigenvalues)
    n = spec.n
    d = np.zeros((n, n))
    i = 0
    for lam in reals:
        d[i, i] = lam
        i += 1
    for z in pairs:
        a, b = z.real, z.imag
        d[i:i + 2, i:i + 2] = [[a, b], [-b, a]]
        i += 2
    return d


def make_normal_from_spectrum(spec: Spectrum | Sequence[complex], seed: int = 0) -> LinearOperator:
    """Real normal operator with eigenvalues `spec`, conjugated by a seeded random orthogonal matrix.

    A scalar real spectrum c*I is returned exactly, since every similarity fixes it.
    """
    if not isinstance(spec, Spectrum):
        spec = Spectrum(tuple(spec))
    core = block_diagonal_form(spec)
    vals = spec.eigenvalues
    if all(_is_real(z) for z in vals) and len({z.real for z in vals}) == 1:
        return LinearOperator(core, seed=seed, spectrum=spec)
    q = random_orthogonal(spec.n, np.random.default_rng(seed))
    a = q @ core @ q.T
    return LinearOperator(a, seed=seed, spectrum=spec)


def apply(op: LinearOperator, x) -> np.ndarray:
    """F(x) = A x. Accepts a vector of length n or a stack of row vectors of shape (m, n)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != op.n or x.ndim > 2:
        raise ValueError(f"dimension mismatch: operator is {op.n}x{op.n}, got input of shape {x.shape}")
    if x.ndim == 1:
        return op.entries @ x
    return x @ op.entries.T


def symmetric_part(op: LinearOperator | np.ndarray) -> np.ndarray:
    a = op.entries if isinstance(op, LinearOperator) else np.asarray(op, dtype=float)
    return 0.5 * (a + a.T)


def eigenvalues(op: LinearOperator) -> np.ndarray:
    return op.eigenvalues.copy()


def operator_norm(op: LinearOperator) -> float:
    """Largest singular value (the Lipschitz constant of x -> A x in the Euclidean norm)."""
    return float(op.singular_values[0])


def min_singular_value(op: LinearOperator) -> float:
    return float(op.singular_values[-1])


def random_spectrum(n: int, rng: np.random.Generator, scale: float = 1.0) -> Spectrum:
    """Conjugate-closed random spectrum of size n; real and imaginary parts uniform in [-scale, scale]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    n_pairs = int(rng.integers(0, n // 2 + 1))
    vals: list[complex] = []
    for _ in range(n_pairs):
        z = complex(rng.uniform(-scale, scale), rng.uniform(0.05 * scale, scale))
        vals += [z, z.conjugate()]
    vals += [complex(rng.uniform(-scale, scale), 0.0) for _ in range(n - 2 * n_pairs)]
    return Spectrum(tuple(vals))
