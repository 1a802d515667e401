import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from whitham.continuation import solve_at_speed
from whitham.evolution import (
    EvolutionConfig,
    EvolutionState,
    StepNonconvergenceError,
    _phase_shift,
    evolution_rhs,
    evolve,
    midpoint_step,
    traveling_wave_metrics,
)
from whitham.spectral import DispersionModel, symbol

M1 = math.sqrt(math.tanh(1.0))


def _smooth(n=32, amp=0.2):
    x = 2 * np.pi * np.arange(n) / n
    return EvolutionState.from_values(amp * np.exp(np.cos(x)) * np.cos(2 * x + 0.3) + amp * np.sin(x))


@pytest.fixture(scope="module")
def fig1_wave():
    return solve_at_speed("whitham", 0.789, n=64)[0]


class TestState:
    def test_nyquist_is_zero(self):
        state = EvolutionState(np.ones(8, dtype=complex))
        assert state.coeffs[4] == 0

    def test_odd_size_rejected(self):
        with pytest.raises(ValueError):
            EvolutionState(np.zeros(7))

    def test_values_roundtrip(self):
        x = 2 * np.pi * np.arange(16) / 16
        values = np.cos(x) + 0.3 * np.sin(3 * x) + 0.1
        assert np.allclose(EvolutionState.from_values(values).values, values, atol=1e-14)

    def test_from_profile_is_exact_for_band_limited_waves(self):
        from whitham.spectral import CosineSpectrum
        from whitham.steady import WaveProfile

        coeffs = np.zeros(16)
        coeffs[:5] = [0.1, -0.4, 0.2, 0.05, 0.01]
        wave = WaveProfile("whitham", CosineSpectrum(coeffs), 0.8)
        state = EvolutionState.from_profile(wave, 32)
        assert np.allclose(state.values, wave(state.grid), atol=1e-15)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            EvolutionConfig(dt=0)
        with pytest.raises(ValueError):
            EvolutionConfig(max_inner_iters=0)


class TestRhs:
    def test_constant(self):
        rhs = evolution_rhs(EvolutionState.from_values(np.full(8, 0.7)))
        assert np.max(np.abs(rhs)) < 1e-15

    def test_cosine_by_hand(self):
        n = 8
        x = 2 * np.pi * np.arange(n) / n
        rhs = evolution_rhs(EvolutionState.from_values(np.cos(x)))
        expected = np.zeros(n, dtype=complex)
        # -(cos^2)_x = sin 2x  and  -K (cos x)_x = m(1) sin x
        expected[1], expected[-1] = -0.5j * M1, 0.5j * M1
        expected[2], expected[-2] = -0.5j, 0.5j
        assert np.max(np.abs(rhs - expected)) < 1e-14

    def test_linear_dispersion(self):
        n, delta = 16, 1e-3
        x = 2 * np.pi * np.arange(n) / n
        rhs = evolution_rhs(EvolutionState.from_values(delta * np.cos(x)))
        # remove the quadratic part, (delta cos x)^2 contributes only to k = +-2
        linear = rhs.copy()
        linear[2] += 0.5j * delta**2
        linear[-2] -= 0.5j * delta**2
        assert set(np.flatnonzero(np.abs(linear) > 1e-15)) == {1, n - 1}
        speed = linear[1] / (-1j * delta / 2)
        assert speed.real == pytest.approx(symbol(DispersionModel.WHITHAM, 1), abs=1e-12)


class TestStep:
    def test_zero_stays_zero(self):
        state = EvolutionState(np.zeros(16, dtype=complex))
        out, _ = evolve(state, 0.1, EvolutionConfig(dt=0.01))
        assert np.all(out.coeffs == 0)

    def test_mass_and_symmetry(self):
        state = _smooth()
        out, _ = evolve(state, 2.0, EvolutionConfig(dt=2**-8))
        assert abs(out.coeffs[0] - state.coeffs[0]) < 1e-12
        half = out.coeffs[1:16]
        assert np.max(np.abs(half - np.conj(out.coeffs[17:][::-1]))) < 1e-13
        assert out.coeffs[16] == 0

    def test_time_reversal(self):
        cfg = EvolutionConfig(dt=2**-8)
        state = _smooth()
        back = midpoint_step(midpoint_step(state, cfg), cfg, backward=True)
        assert np.max(np.abs(back.coeffs - state.coeffs)) < 10 * cfg.fixed_point_tol
        assert back.time == pytest.approx(0.0, abs=1e-15)

    def test_linear_step_is_cayley(self):
        dt, n = 0.01, 16
        cfg = EvolutionConfig(dt=dt, nonlinear=False)
        for k in (1, 3, 5):
            x = 2 * np.pi * np.arange(n) / n
            out = midpoint_step(EvolutionState.from_values(np.cos(k * x)), cfg)
            omega = k * symbol(DispersionModel.WHITHAM, k)
            cayley = (1 - 0.5j * dt * omega) / (1 + 0.5j * dt * omega)
            assert out.coeffs[k] / 0.5 == pytest.approx(cayley, abs=1e-14)
            phase_err = abs(np.angle(out.coeffs[k] / 0.5) + dt * omega)
            assert phase_err < (dt * omega) ** 3 / 12 * 1.1

    def test_second_order_in_time(self):
        state, t = _smooth(amp=0.3), 0.1
        ref, _ = evolve(state, t, EvolutionConfig(dt=0.01 / 8))
        errs = [np.max(np.abs(evolve(state, t, EvolutionConfig(dt=dt))[0].coeffs - ref.coeffs))
                for dt in (0.01, 0.005)]
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.2)

    def test_inner_iterations_bounded(self, fig1_wave):
        m = traveling_wave_metrics(fig1_wave, 0.25, 32)
        assert 1 <= m["inner_iters_max"] <= 3

    def test_nonconvergence(self):
        with pytest.raises(StepNonconvergenceError):
            midpoint_step(_smooth(amp=2.0), EvolutionConfig(dt=0.1, max_inner_iters=1))


class TestEvolve:
    def test_identity(self):
        state = _smooth()
        out, snaps = evolve(state, state.time, EvolutionConfig())
        assert np.array_equal(out.coeffs, state.coeffs)

    def test_backwards_rejected(self):
        with pytest.raises(ValueError):
            evolve(_smooth(), -1.0, EvolutionConfig())

    def test_lands_on_final_time(self):
        cfg = EvolutionConfig(dt=0.03)
        out, snaps = evolve(_smooth(amp=0.05), 0.1, cfg, snapshot_every=0.05)
        assert out.time == 0.1
        assert snaps[0].time == 0.0 and snaps[-1].time == 0.1
        assert len(snaps) >= 3

    def test_partial_step_matches_direct_step(self):
        state = _smooth()
        direct = midpoint_step(state, EvolutionConfig(dt=0.01))
        out, _ = evolve(state, 0.01, EvolutionConfig(dt=0.04))
        assert np.max(np.abs(out.coeffs - direct.coeffs)) < 1e-14

    def test_mass_after_many_steps(self, fig1_wave):
        state = EvolutionState.from_profile(fig1_wave, 32)
        out, _ = evolve(state, 1e5 * 2**-10, EvolutionConfig(dt=2**-10))
        assert abs(out.coeffs[0] - state.coeffs[0]) < 1e-12


class TestMetrics:
    def test_zero_periods(self, fig1_wave):
        m = traveling_wave_metrics(fig1_wave, 0, 32)
        assert m["l2_error"] == m["height_error"] == m["phase_shift"] == 0

    def test_odd_grid_rejected(self, fig1_wave):
        with pytest.raises(ValueError):
            traveling_wave_metrics(fig1_wave, 1, 31)

    def test_one_period_is_small(self, fig1_wave):
        m = traveling_wave_metrics(fig1_wave, 1, 32)
        assert m["l2_error"] < 1e-3 and m["height_error"] < m["l2_error"]
        assert abs(m["phase_shift"]) < 1e-3

    @given(st.floats(-3.0, 3.0))
    def test_phase_shift_recovers_translation(self, s):
        n = 32
        x = 2 * np.pi * np.arange(n) / n
        f = lambda y: np.exp(np.cos(y))
        got = _phase_shift(EvolutionState.from_values(f(x)), EvolutionState.from_values(f(x - s)))
        assert got == pytest.approx(s, abs=1e-9)
