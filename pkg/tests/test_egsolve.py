import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from eglab.egsolve import (
    NumericOverflowError,
    SolverConfig,
    Termination,
    asymptotic_rate,
    eg_step,
    forward_step,
    geometric_mean_ratio,
    one_step_bound_check,
    read_trajectory_csv,
    run,
    write_trajectory_csv,
)
from eglab.linop import LinearOperator, make_normal_from_spectrum, random_spectrum
from eglab.stepan import eg_amplification, eg_spectral_radius, q_of_gamma

ROT = LinearOperator([[0.0, 1.0], [-1.0, 0.0]])
DAMPED = LinearOperator([[-0.1, 1.0], [-1.0, -0.1]])
neg = lambda x: -x
ident = lambda x: x


class TestStep:
    def test_neg_identity(self):
        y, xn = eg_step(neg, np.array([1.0]), 0.5)
        assert y[0] == 1.5 and xn[0] == 1.75

    def test_identity(self):
        y, xn = eg_step(ident, np.array([1.0]), 0.5)
        assert y[0] == 0.5 and xn[0] == 0.75

    def test_zero_operator_fixed_point(self):
        x = np.array([0.3, -2.0])
        y, xn = eg_step(lambda v: np.zeros_like(v), x, 0.9)
        assert np.array_equal(y, x) and np.array_equal(xn, x)

    def test_rejects_nonpositive_gamma(self):
        with pytest.raises(ValueError):
            eg_step(neg, np.ones(1), 0.0)

    def test_overflow_carries_index(self):
        with pytest.raises(NumericOverflowError) as info:
            eg_step(lambda v: v * np.inf, np.ones(2), 0.5, k=7)
        assert info.value.iteration == 7

    def test_forward_baseline(self):
        assert forward_step(neg, np.array([1.0]), 0.5)[0] == 1.5


class TestConfig:
    @pytest.mark.parametrize(
        "kw",
        [dict(gamma=0.0), dict(gamma=0.5, max_iters=0), dict(gamma=0.5, residual_stop=1.0, divergence_stop=1.0)],
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SolverConfig(**kw)

    def test_unit_interval_flag(self):
        assert not SolverConfig(gamma=0.5).outside_unit_interval
        assert SolverConfig(gamma=1.5).outside_unit_interval
        traj = run(ROT, [1.0, 0.0], cfg=SolverConfig(gamma=1.2, max_iters=3))
        assert traj.outside_unit_interval


class TestRun:
    def test_neg_identity_ratio(self):
        traj = run(neg, [1.0], [0.0], SolverConfig(gamma=0.5, max_iters=20))
        r = traj.ratios()
        assert r[0] is None and len(r) == 21
        assert all(v == pytest.approx(1.75, abs=1e-12) for v in r[1:])
        assert traj.termination is Termination.BUDGET_EXHAUSTED
        assert traj.verdict() == "non_convergent"

    def test_divergence_cutoff(self):
        traj = run(neg, [1.0], [0.0], SolverConfig(gamma=0.5, max_iters=1000))
        assert traj.termination is Termination.DIVERGED
        assert traj.error_norms[-1] > 1e12
        assert len(traj.error_norms) < 100

    def test_overflow_truncates(self):
        def blowup(x):
            with np.errstate(over="ignore"):
                return x * 1e200

        traj = run(blowup, [1.0], [0.0], SolverConfig(gamma=0.5, max_iters=10, divergence_stop=1e300))
        assert traj.termination is Termination.DIVERGED

    def test_rotation(self):
        traj = run(ROT, [1.0, 0.0], cfg=SolverConfig(gamma=0.5, max_iters=500, residual_stop=1e-12))
        assert traj.termination is Termination.RESIDUAL_MET
        assert all(v == pytest.approx(math.sqrt(0.8125), abs=1e-12) for v in traj.ratios()[1:])

    def test_damped_rotation_converges(self):
        traj = run(DAMPED, [1.0, 0.0], cfg=SolverConfig(gamma=0.5, max_iters=2000))
        expected = eg_amplification(-0.1 + 1j, 0.5)
        assert all(v == pytest.approx(expected, abs=1e-12) for v in traj.ratios()[1:])
        assert traj.termination is Termination.RESIDUAL_MET

    def test_default_solution_is_origin(self):
        traj = run(DAMPED, [1.0, 1.0], cfg=SolverConfig(gamma=0.5, max_iters=2))
        assert traj.error_norms[0] == pytest.approx(math.sqrt(2))

    def test_invalid_x_star(self):
        with pytest.raises(ValueError, match="not a zero"):
            run(neg, [1.0], [0.5], SolverConfig(gamma=0.5))

    def test_unknown_solution_records_nan(self):
        traj = run(lambda x: x**3 - 1.0, [2.0], None, SolverConfig(gamma=0.1, max_iters=5))
        assert all(math.isnan(e) for e in traj.error_norms)
        assert len(traj.error_norms) == len(traj.residual_norms)

    def test_lengths_and_storage_cap(self):
        traj = run(DAMPED, [1.0, 0.0], cfg=SolverConfig(gamma=0.5, max_iters=300, residual_stop=0, keep_iterates=10))
        assert len(traj.error_norms) == len(traj.residual_norms) == 301
        assert len(traj.xs) == 11 and len(traj.ys) == 10

    def test_recomputation_bit_exact(self):
        op = make_normal_from_spectrum([0.2 + 1j, 0.2 - 1j, -0.3], seed=3)
        traj = run(op, [1.0, -0.5, 0.25], cfg=SolverConfig(gamma=0.4, max_iters=50))
        assert traj.verify(op)
        traj.xs[5] = traj.xs[5] + 1e-16
        assert not traj.verify(op)

    def test_geometric_mean(self):
        assert geometric_mean_ratio([1.0, 2.0, 4.0]) == pytest.approx(2.0)
        assert geometric_mean_ratio([1.0]) is None

    def test_csv_round_trip(self, tmp_path):
        traj = run(neg, [1.0], [0.0], SolverConfig(gamma=0.5, max_iters=5))
        write_trajectory_csv(traj, tmp_path / "t.csv")
        cols = read_trajectory_csv(tmp_path / "t.csv")
        assert cols["iter"] == list(range(6))
        assert cols["err_norm"] == traj.error_norms
        assert cols["ratio"][0] is None and cols["ratio"][1:] == traj.ratios()[1:]
        assert (tmp_path / "t.csv").read_text().splitlines()[0] == "iter,err_norm,resid_norm,ratio"


class TestSpectralEquivalence:
    @settings(max_examples=50, deadline=None)
    @given(st.floats(-2, 2), st.floats(0.05, 2), st.floats(0.01, 0.99))
    def test_block_operator_matches_amplification(self, a, b, g):
        # normal 2x2 block with eigenvalues a +/- bi: every EG step scales the error by the same factor
        lam = complex(a, b)
        assume(abs(lam) <= 2)
        A = LinearOperator([[lam.real, lam.imag], [-lam.imag, lam.real]])
        traj = run(A, [0.6, -0.8], cfg=SolverConfig(gamma=g, max_iters=3, residual_stop=0))
        for r in traj.ratios()[1:]:
            assert r == pytest.approx(eg_amplification(lam, g), abs=1e-9)

    @pytest.mark.parametrize("seed", range(8))
    def test_asymptotic_rate(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 7))
        op = make_normal_from_spectrum(random_spectrum(n, rng), seed)
        g = float(rng.uniform(0.1, 0.9))
        assert asymptotic_rate(op, rng.standard_normal(n), g) == pytest.approx(eg_spectral_radius(op, g), abs=1e-6)

    @pytest.mark.parametrize("b", [0.3, 0.7, 1.0, 1.5])
    def test_monotone_rotations_residual_nonincreasing(self, b):
        op = LinearOperator([[0.0, b], [-b, 0.0]])
        g = 0.9 / b
        traj = run(op, [1.0, 0.0], cfg=SolverConfig(gamma=g, max_iters=200))
        r = traj.residual_norms
        assert all(r[k + 1] <= r[k] for k in range(len(r) - 1))


class TestBoundCheck:
    def test_neg_identity_tight(self):
        bc = one_step_bound_check(neg, [0.0, 0.0], 0.5, 1.0, 1.0, n_samples=500, seed=1)
        assert bc.q == 3.0625
        assert bc.fraction_satisfied == 1.0
        assert bc.worst_ratio == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("mu,L", [(1.0, 1.0), (0.0, 0.0)])
    def test_zero_operator(self, mu, L):
        bc = one_step_bound_check(lambda x: np.zeros_like(x), [0.0, 0.0], 0.5, mu, L, n_samples=200, seed=0)
        assert bc.fraction_satisfied == 1.0
        assert bc.worst_ratio == pytest.approx(1 / q_of_gamma(mu, L, 0.5))

    def test_rotation_golden(self):
        # golden: eg_amplification(i, 0.5)^2 / q(0.5) = 0.8125 / 0.8125
        bc = one_step_bound_check(ROT, [0.0, 0.0], 0.5, 0.0, 1.0, n_samples=1000, seed=0)
        assert bc.worst_ratio == pytest.approx(1.0, abs=1e-12)
        assert bc.worst_ratio == pytest.approx(eg_amplification(1j, 0.5) ** 2 / q_of_gamma(0, 1, 0.5), abs=1e-12)

    def test_damped_rotation_tight(self):
        bc = one_step_bound_check(DAMPED, [0.0, 0.0], 0.5, 0.1, math.sqrt(1.01), n_samples=500, seed=0)
        assert bc.q == pytest.approx(eg_amplification(-0.1 + 1j, 0.5) ** 2, abs=1e-14)
        assert bc.worst_ratio == pytest.approx(1.0, abs=1e-9)

    def test_mixed_moduli_violate(self):
        # diag(0, 1): mu = 0, L = 1, q(0.5) = 0.8125, yet the kernel direction never moves,
        # so the ratio approaches 1 / 0.8125 along e1
        op = LinearOperator(np.diag([0.0, 1.0]))
        bc = one_step_bound_check(op, [0.0, 0.0], 0.5, 0.0, 1.0, n_samples=1000, seed=0)
        assert bc.fraction_satisfied < 1.0
        assert 1.0 < bc.worst_ratio <= 1 / 0.8125 + 1e-12

    def test_rejects_bad_solution(self):
        with pytest.raises(ValueError):
            one_step_bound_check(neg, [1.0], 0.5, 1.0, 1.0)

    def test_deterministic(self):
        a = one_step_bound_check(DAMPED, [0.0, 0.0], 0.3, 0.1, 1.01, n_samples=100, seed=5)
        b = one_step_bound_check(DAMPED, [0.0, 0.0], 0.3, 0.1, 1.01, n_samples=100, seed=5)
        assert a == b
