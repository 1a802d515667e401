import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from whitham import asymptotics
from whitham.spectral import CosineSpectrum, DispersionModel, collocation_grid, cosine_analysis, operator_matrix
from whitham.steady import (
    SingularJacobianError,
    WaveProfile,
    _lu_solve,
    galilean_shift,
    height_functional,
    jacobian,
    newton_fixed_height,
    newton_fixed_speed,
    residual,
    residual_mu_derivative,
    waveheight,
)
from whitham.continuation import solve_at_height, solve_at_speed

W, KDV = DispersionModel.WHITHAM, DispersionModel.KDV
MU1 = math.sqrt(math.tanh(1.0))
small = st.floats(-0.5, 0.5, allow_nan=False)


def _fd_jacobian(values, mu, model, h=1e-6):
    n = values.size
    out = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        out[:, j] = (residual(values + e, mu, model) - residual(values - e, mu, model)) / (2 * h)
    return out


class TestResidual:
    def test_zero_is_a_solution(self):
        assert np.all(residual(np.zeros(8), 0.7) == 0)
        assert np.all(residual(np.zeros(8), 0.7, KDV) == 0)

    @pytest.mark.parametrize("mu", [0.3, 0.9, 1.4])
    def test_constant_solutions(self, mu):
        assert np.max(np.abs(residual(np.full(12, mu - 1.0), mu))) < 1e-14

    def test_linear_terms_cancel_at_bifurcation(self):
        x = collocation_grid(16)
        eps = 1e-3
        r = residual(eps * np.cos(x), MU1)
        assert np.max(np.abs(r - eps**2 * np.cos(x) ** 2)) < 1e-15

    def test_pointwise_square_is_alias_free_for_band_limited_data(self):
        rng = np.random.default_rng(5)
        n = 16
        coeffs = np.zeros(n)
        coeffs[: n // 2] = rng.standard_normal(n // 2)
        spec = CosineSpectrum(coeffs)
        coarse = cosine_analysis(spec(collocation_grid(n)) ** 2).amplitudes
        fine = cosine_analysis(spec(collocation_grid(2 * n)) ** 2).amplitudes
        assert np.max(np.abs(coarse - fine[:n])) < 1e-12
        assert np.max(np.abs(fine[n:])) < 1e-12


class TestJacobian:
    def test_at_zero(self):
        jac = jacobian(np.zeros(10), 0.8)
        assert np.allclose(jac, operator_matrix(W, 10) - 0.8 * np.eye(10), atol=1e-15)

    @given(arrays(float, 32, elements=small), st.floats(0.3, 1.2))
    def test_whitham_finite_differences(self, values, mu):
        assert np.max(np.abs(jacobian(values, mu) - _fd_jacobian(values, mu, W))) < 1e-6

    @given(arrays(float, st.integers(4, 40), elements=small), st.floats(0.3, 1.2))
    def test_kdv_finite_differences(self, values, mu):
        assert np.max(np.abs(jacobian(values, mu, KDV) - _fd_jacobian(values, mu, KDV))) < 1e-6

    @pytest.mark.parametrize("model", [W, KDV])
    def test_mu_derivative(self, model):
        phi = 0.2 * np.cos(collocation_grid(16)) - 0.05
        h = 1e-6
        fd = (residual(phi, 0.7 + h, model) - residual(phi, 0.7 - h, model)) / (2 * h)
        assert np.max(np.abs(fd - residual_mu_derivative(phi, 0.7, model))) < 1e-8

    def test_singular_at_bifurcation(self):
        n = 16
        jac = jacobian(np.zeros(n), MU1)
        assert np.linalg.svd(jac, compute_uv=False)[-1] < 1e-10
        assert np.max(np.abs(jac @ np.cos(collocation_grid(n)))) < 1e-12

    def test_singular_solve_raises(self):
        with pytest.raises(SingularJacobianError):
            _lu_solve(np.ones((3, 3)), np.ones(3))


class TestNewton:
    def test_constant_root(self):
        prof, rep = newton_fixed_speed(np.full(16, 0.9 - 1.0), 0.9)
        assert rep.converged and rep.iterations <= 1

    def test_trivial_branch_is_attracting(self):
        x = collocation_grid(16)
        prof, rep = newton_fixed_speed(0.01 * np.cos(x), 0.5)
        assert rep.converged
        assert np.max(np.abs(prof.values)) < 1e-12

    def test_small_amplitude_order(self):
        x = collocation_grid(32)
        errs = []
        for eps in (0.01, 0.005):
            guess, mu = asymptotics.whitham_expansion(eps, x)
            prof, rep = newton_fixed_speed(guess, mu)
            assert rep.converged
            errs.append(np.max(np.abs(prof.values - guess)))
        assert math.log2(errs[0] / errs[1]) >= 2.5

    def test_residual_norms_decrease_at_the_end(self):
        x = collocation_grid(32)
        guess, mu = asymptotics.whitham_expansion(0.05, x)
        _, rep = newton_fixed_speed(guess, mu)
        assert rep.converged
        norms = rep.residual_norms
        assert norms[-1] < norms[-2] < norms[-3]
        assert rep.condition_estimate is not None and rep.condition_estimate >= 1

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            newton_fixed_speed(np.zeros(4), 0.5, tol=0)
        with pytest.raises(ValueError):
            newton_fixed_speed(np.zeros(4), 0.5, max_iter=0)
        with pytest.raises(ValueError):
            newton_fixed_height(np.zeros(4), 0.5, -1.0)

    def test_nonconvergence_is_reported(self):
        x = collocation_grid(16)
        guess, mu = asymptotics.whitham_expansion(0.1, x)
        _, rep = newton_fixed_speed(guess, mu, max_iter=1)
        assert not rep.converged and rep.iterations == 1

    def test_fixed_height_consistency(self):
        x = collocation_grid(32)
        guess, mu = asymptotics.whitham_expansion(0.05, x)
        prof, _ = newton_fixed_speed(guess, mu)
        again, rep = newton_fixed_height(prof.values, prof.mu, prof.height)
        assert rep.converged and rep.iterations <= 2
        assert abs(again.mu - prof.mu) < 1e-12

    def test_line_search_flag(self):
        x = collocation_grid(32)
        guess, mu = asymptotics.whitham_expansion(0.05, x)
        prof, rep = newton_fixed_speed(guess, mu, line_search=True)
        assert rep.converged

    def test_figure1_height(self):
        prof, rep = solve_at_speed(W, 0.789, n=16)
        assert rep.converged
        assert abs(prof.height - 0.3368) < 5e-3

    def test_figure1_speed_from_height(self):
        prof, _ = solve_at_height(W, 0.3368, n=16)
        assert abs(prof.mu - 0.789) < 5e-3

    def test_figure2_speed(self):
        prof, _ = solve_at_height(W, 0.4152, n=64)
        assert abs(prof.mu - 0.7715) < 5e-3


class TestWaveProperties:
    @pytest.fixture(scope="class")
    @classmethod
    def waves(cls):
        return [solve_at_height(W, h, n=64)[0] for h in (0.05, 0.2, 0.4)]

    def test_mean_identity(self, waves):
        for p in waves:
            phi = p.values
            assert abs((1 - p.mu) * phi.mean() + (phi**2).mean()) <= 10 * 1e-12

    def test_negative_mean(self, waves):
        assert all(p.values.mean() < 0 for p in waves)

    def test_sup_bound_and_solution_set(self, waves):
        for p in waves:
            assert np.max(np.abs(p.values)) <= p.mu + 1.1
            assert np.max(p.values) < p.mu / 2

    def test_resampling_keeps_the_wave(self, waves):
        p = waves[1]
        x = np.linspace(0, 2 * np.pi, 17)
        assert np.allclose(p.resampled(128)(x), p(x), atol=1e-14)


class TestHeightAndShift:
    def test_height_of_constant(self):
        assert waveheight(WaveProfile.from_values(np.full(8, 0.3), 0.5, W)) == pytest.approx(0, abs=1e-14)

    def test_height_of_cosine(self):
        prof = WaveProfile.from_values(0.07 * np.cos(collocation_grid(8)), 0.5, W)
        assert prof.height == pytest.approx(0.14, abs=1e-15)

    def test_height_functional_is_linear_height(self):
        rng = np.random.default_rng(2)
        v = rng.standard_normal(12)
        for k in (1, 2):
            prof = WaveProfile.from_values(v, 0.5, W, k=k)
            assert height_functional(12, k) @ v == pytest.approx(prof.height, abs=1e-13)

    def test_zero_shift(self):
        v = np.arange(4.0)
        out, mu, b = galilean_shift(v, 0.8, 0.0)
        assert np.all(out == v) and mu == 0.8 and b == 0.0

    def test_second_root(self):
        assert galilean_shift(np.zeros(3), 0.8, 0.2)[2] == pytest.approx(0.0, abs=1e-16)

    @given(arrays(float, 32, elements=small), st.floats(0.2, 1.5), st.floats(-1, 1))
    def test_residual_identity(self, values, mu, gamma):
        shifted, mu2, b = galilean_shift(values, mu, gamma)
        diff = residual(shifted, mu2) - residual(values, mu)
        assert np.max(np.abs(diff - b)) < 1e-12

    def test_residual_identity_example(self):
        v = np.random.default_rng(4).uniform(-0.3, 0.3, 32)
        shifted, mu2, b = galilean_shift(v, 0.8, 0.1)
        assert np.max(np.abs(residual(shifted, mu2) - residual(v, 0.8) - b)) < 1e-12
