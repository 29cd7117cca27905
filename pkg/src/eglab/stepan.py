"""Step-size polynomials of the extragradient error bound, and exact EG amplification.

The one-step bound multiplier is

    q(g) = 1 + 2 g mu + 4 g^2 mu^2 - g^2 L^2 + 2 g^3 mu L^2 + g^4 L^4

and P(g) = q(g) - 1 = a1 g + a2 g^2 + a3 g^3 + a4 g^4 with
a1 = 2 mu, a2 = 4 mu^2 - L^2, a3 = 2 mu L^2, a4 = L^4.

For F(x) = A x one EG step is x -> (I - g A + g^2 A^2) x, so on the eigenspace
of lambda the exact error factor is |1 - g lambda + g^2 lambda^2|.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .linop import LinearOperator

COEFF_ZERO_TOL = 1e-14
ROOT_XTOL = 1e-10
TANGENT_TOL = 1e-8
ROUCHE_SAMPLES = 360


class RoucheUndefinedError(ValueError):
    pass


def q_coefficients(mu: float, L: float) -> list[float]:
    """Ascending coefficients of q."""
    return [1.0, 2 * mu, 4 * mu * mu - L * L, 2 * mu * L * L, L**4]


def p_coefficients(mu: float, L: float) -> list[float]:
    """[a1, a2, a3, a4] of P = q - 1 (ascending, constant term dropped)."""
    return q_coefficients(mu, L)[1:]


def _horner(asc: Sequence[float], x):
    acc = 0.0
    for c in reversed(asc):
        acc = acc * x + c
    return acc


def q_of_gamma(mu: float, L: float, gamma):
    """Horner evaluation of q. Works elementwise on numpy arrays."""
    return _horner(q_coefficients(mu, L), gamma)


def q_unsimplified(mu, L, gamma):
    """The un-expanded product form of q; kept as an independent evaluation route."""
    return 1 + 2 * gamma * mu * (1 + 2 * gamma * mu) + gamma**2 * L**2 * (-1 + L**2 * gamma**2 + 2 * gamma * mu)


def p_of_gamma(mu: float, L: float, gamma):
    return gamma * _horner(p_coefficients(mu, L), gamma)


def descartes_sign_changes(coeffs: Iterable[float], zero_tol: float = COEFF_ZERO_TOL) -> int:
    """Sign alternations between consecutive nonzero coefficients (|c| < zero_tol counts as zero)."""
    signs = [1 if c > 0 else -1 for c in coeffs if abs(c) >= zero_tol]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def p_sign_changes(mu: float, L: float) -> int:
    """Descartes count for P(g)/g, coefficients in descending order a4, a3, a2, a1."""
    return descartes_sign_changes(reversed(p_coefficients(mu, L)))


def _bisect(f, lo: float, hi: float, xtol: float) -> tuple[float, float]:
    flo = f(lo)
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid, 0.0
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi), hi - lo


def rouche_radius(mu: float, L: float) -> float:
    """Radius r at which the triangle-inequality bound on |g| meets |f| = 2 mu r.

    Solves (4 mu^2 + L^2) r + 2 mu L^2 r^2 + L^4 r^3 = 2 mu by bisection and
    returns the lower bracket end, so the bound holds strictly. The result is
    checked by sampling |g| on the circle |z| = r.
    """
    if mu <= 0:
        raise RoucheUndefinedError("f identically zero; Rouché comparison undefined")

    def h(r):
        return ((L**4 * r + 2 * mu * L * L) * r + (4 * mu * mu + L * L)) * r - 2 * mu

    hi = 1.0
    while h(hi) <= 0:
        hi *= 2.0
    lo = 0.0
    while hi - lo > ROOT_XTOL:
        mid = 0.5 * (lo + hi)
        if h(mid) < 0:
            lo = mid
        else:
            hi = mid
    r = lo
    gmax, fmin = rouche_circle_check(mu, L, r)
    if not gmax < fmin:
        raise RuntimeError(f"Rouché check failed at r={r!r}: max|g|={gmax!r} >= min|f|={fmin!r}")
    return r


def rouche_g(mu: float, L: float, z):
    """g(z) = P(z) - 2 mu z, evaluated on complex input."""
    return z * z * ((L**4 * z + 2 * mu * L * L) * z + (4 * mu * mu - L * L))


def rouche_circle_check(mu: float, L: float, r: float, n: int = ROUCHE_SAMPLES) -> tuple[float, float]:
    """(max |g|, min |f|) over n equally spaced points of the circle |z| = r."""
    z = r * np.exp(2j * np.pi * np.arange(n) / n)
    gmax = float(np.max(np.abs(rouche_g(mu, L, z))))
    fmin = float(np.min(np.abs(2 * mu * z)))
    return gmax, fmin


@dataclass(frozen=True)
class RootScan:
    roots: list[tuple[float, float]]
    tangential: list[float]


def scan_roots(asc: Sequence[float], gamma_max: float, n_grid: int = 10_000, near_zero: int = 200) -> RootScan:
    """Real roots of the ascending-coefficient polynomial in (0, gamma_max].

    A uniform grid of n_grid points is scanned for sign changes, each bracket is
    bisected to 1e-10. A geometric grid below the first uniform point catches
    roots squeezed against the origin. Sign-preserving local minima of |p|
    below 1e-8 are returned as tangential roots.
    """
    if gamma_max <= 0:
        raise ValueError("gamma_max must be positive")
    step = gamma_max / n_grid
    head = np.geomspace(step * 1e-8, step, near_zero, endpoint=False) if near_zero else np.empty(0)
    grid = np.concatenate([head, np.linspace(step, gamma_max, n_grid)])
    vals = _horner(asc, grid)
    # values within rounding noise of zero carry no sign information
    noise = 16 * np.finfo(float).eps * _horner([abs(c) for c in asc], grid)
    vals = np.where(np.abs(vals) <= noise, 0.0, vals)
    f = lambda x: _horner(asc, x)
    roots: list[tuple[float, float]] = []
    tangential: list[float] = []
    last = len(grid) - 1
    sgn = np.sign(vals)
    for i in np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]:
        roots.append(_bisect(f, float(grid[i]), float(grid[i + 1]), ROOT_XTOL))
    zero = np.flatnonzero(sgn == 0)
    if zero.size:
        runs = np.split(zero, np.flatnonzero(np.diff(zero) > 1) + 1)
        for run in runs:
            i, j = int(run[0]), int(run[-1])
            left = sgn[i - 1] if i > 0 else 0.0
            right = sgn[j + 1] if j < last else 0.0
            mid = float(grid[(i + j) // 2])
            if left * right < 0 or (j == last and left != 0):
                roots.append((mid, float(grid[j] - grid[i])))
            elif left * right > 0:
                tangential.append(mid)
    a = np.abs(vals)
    inner = np.arange(1, last)
    mask = (
        (a[inner] <= a[inner - 1]) & (a[inner] <= a[inner + 1])
        & (a[inner] > 0) & (a[inner] < TANGENT_TOL) & (sgn[inner - 1] * sgn[inner + 1] > 0)
    )
    tangential.extend(float(grid[k]) for k in inner[mask])
    roots.sort()
    tangential.sort()
    return RootScan(roots=roots, tangential=tangential)


def cauchy_root_bound(asc: Sequence[float]) -> float:
    """Every root of the polynomial has modulus below 1 + max |c_i / c_lead|."""
    coeffs = list(asc)
    while coeffs and coeffs[-1] == 0.0:
        coeffs.pop()
    if len(coeffs) < 2:
        return 1.0
    lead = coeffs[-1]
    return 1.0 + max(abs(c / lead) for c in coeffs[:-1])


def positive_roots(mu: float, L: float, gamma_max: float, n_grid: int = 10_000) -> list[tuple[float, float]]:
    """Sign-change roots of P in (0, gamma_max] as (root, bracket width) pairs."""
    return scan_roots([0.0] + p_coefficients(mu, L), gamma_max, n_grid).roots


@dataclass
class StepPolynomial:
    mu: float
    lipschitz: float
    q_coeffs: list[float] = field(init=False)
    p_coeffs: list[float] = field(init=False)

    def __post_init__(self):
        if self.mu < 0 or self.lipschitz < 0:
            raise ValueError("mu and L must be non-negative")
        self.q_coeffs = q_coefficients(self.mu, self.lipschitz)
        self.p_coeffs = p_coefficients(self.mu, self.lipschitz)

    def q(self, gamma):
        return q_of_gamma(self.mu, self.lipschitz, gamma)

    def p(self, gamma):
        return p_of_gamma(self.mu, self.lipschitz, gamma)


@dataclass
class StepAnalysis:
    mu: float
    lipschitz: float
    gamma_max: float
    sign_changes: int
    positive_roots: list[tuple[float, float]]
    tangential_roots: list[float]
    rouche_radius: float | None
    rouche_note: str | None
    contractive_gammas: list[tuple[float, float]]

    def to_json(self) -> dict:
        return {
            "mu": self.mu,
            "L": self.lipschitz,
            "gamma_max": self.gamma_max,
            "sign_changes": self.sign_changes,
            "positive_roots": [{"root": r, "bracket": w} for r, w in self.positive_roots],
            "tangential_roots": self.tangential_roots,
            "rouche_radius": self.rouche_radius,
            "rouche_note": self.rouche_note,
            "contractive_intervals": [list(iv) for iv in self.contractive_gammas],
            "q_ge_1_on_interval": not self.contractive_gammas,
        }


def analyze(mu: float, L: float, gamma_max: float, n_grid: int = 10_000) -> StepAnalysis:
    """Descartes count, positive roots, Rouché radius and contractive step sizes for (mu, L)."""
    if mu < 0 or L < 0:
        raise ValueError("mu and L must be non-negative")
    scan = scan_roots([0.0] + p_coefficients(mu, L), gamma_max, n_grid)
    try:
        r, note = rouche_radius(mu, L), None
    except RoucheUndefinedError as exc:
        r, note = None, str(exc)
    edges = [0.0] + [root for root, _ in scan.roots] + [gamma_max]
    intervals = []
    for lo, hi in zip(edges, edges[1:]):
        if hi > lo and q_of_gamma(mu, L, 0.5 * (lo + hi)) < 1.0:
            intervals.append((lo, hi))
    return StepAnalysis(
        mu=mu,
        lipschitz=L,
        gamma_max=gamma_max,
        sign_changes=p_sign_changes(mu, L),
        positive_roots=scan.roots,
        tangential_roots=scan.tangential,
        rouche_radius=r,
        rouche_note=note,
        contractive_gammas=intervals,
    )


def eg_amplification(lam: complex, gamma: float) -> float:
    """|1 - gamma*lam + gamma^2*lam^2|."""
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    lam = complex(lam)
    return abs(1 - gamma * lam + gamma * gamma * lam * lam)


def eg_spectral_radius(op: LinearOperator, gamma: float) -> float:
    """Largest EG amplification over the spectrum of op."""
    return max(eg_amplification(complex(z), gamma) for z in op.eigenvalues)


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    q: float
    P: float
    contractive: bool
    amp_witness: float


def gamma_sweep(mu: float, L: float, grid: Iterable[float]) -> list[SweepRow]:
    """One row per step size; the witness eigenvalue is lambda = -mu."""
    rows = []
    for g in grid:
        g = float(g)
        if g <= 0:
            raise ValueError(f"grid values must be positive, got {g}")
        qv = float(q_of_gamma(mu, L, g))
        rows.append(SweepRow(g, qv, float(p_of_gamma(mu, L, g)), qv < 1.0, eg_amplification(-mu, g)))
    return rows


SWEEP_COLUMNS = ("gamma", "q", "P", "contractive", "amp_witness")


def fmt_float(x: float) -> str:
    return "%.17g" % x


def write_sweep_csv(rows: Sequence[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([fmt_float(r.gamma), fmt_float(r.q), fmt_float(r.P), str(r.contractive).lower(), fmt_float(r.amp_witness)])


def read_sweep_csv(path) -> list[SweepRow]:
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        return [
            SweepRow(float(d["gamma"]), float(d["q"]), float(d["P"]), d["contractive"] == "true", float(d["amp_witness"]))
            for d in rd
        ]


def uniform_grid(gamma_max: float, n: int) -> list[float]:
    """n equally spaced points in (0, gamma_max], excluding 0."""
    return [gamma_max * (i + 1) / n for i in range(n)]

