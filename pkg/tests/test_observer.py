import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    PRINTED_GAIN_POLES,
    TABLE_A,
    TABLE_C,
    observability_rank_exact,
    printed_gain_roots,
)
from scrubber_ftc.lti import rk4_transition
from scrubber_ftc.model import StateSpace, plant_state_space, reference_elements
from scrubber_ftc.observer import (
    AUGMENTED_A,
    AUGMENTED_B,
    AUGMENTED_C,
    DEFAULT_OBSERVER_POLES,
    PRINTED_OBSERVER_GAIN,
    ObserverDesignError,
    ObserverState,
    augment,
    build_observer_matrices,
    design_observer,
    observability_rank,
    observer_step,
    place_observer_poles,
    printed_gain_report,
    printed_gain_spectrum,
    reference_design,
    residual,
)


def sorted_poles(p):
    return sorted(np.asarray(p, dtype=complex), key=lambda z: (round(z.real, 9), z.imag))


class TestAugment:
    def test_tabulated_round_trip(self):
        aug = augment(plant_state_space(*reference_elements()), np.eye(2))
        A_g, B_g, C_g = build_observer_matrices(aug)
        np.testing.assert_allclose(A_g, AUGMENTED_A, atol=1e-4)
        np.testing.assert_allclose(B_g, AUGMENTED_B, atol=1e-4)
        np.testing.assert_array_equal(C_g, AUGMENTED_C)

    def test_filter_rows_and_fault_column(self):
        aug = augment(plant_state_space(*reference_elements()), np.eye(2))
        np.testing.assert_array_equal(aug.A_e[2], [1, 0, -1, 0])
        np.testing.assert_array_equal(aug.A_e[3], [0, 1, 0, -1])
        np.testing.assert_array_equal(aug.F_e[:, 0], [0, 0, 1, 0])

    def test_scalar_blocks(self):
        ss = StateSpace([[-3.0]], [[2.0]], [[5.0]], [[1.0]])
        aug = augment(ss, [[0.5]])
        np.testing.assert_array_equal(aug.A_e, [[-3.0, 0.0], [2.5, -0.5]])
        np.testing.assert_array_equal(aug.C_e, [[0.0, 1.0]])

    def test_unstable_filter_rejected(self):
        ss = plant_state_space(*reference_elements())
        with pytest.raises(ObserverDesignError):
            augment(ss, np.zeros((2, 2)))
        with pytest.raises(ObserverDesignError):
            augment(ss, -np.eye(2))

    def test_dimension_mismatch(self):
        with pytest.raises(ObserverDesignError):
            augment(plant_state_space(*reference_elements()), np.eye(3))

    def test_zero_plant_keeps_only_filter_coupling(self):
        ss = StateSpace(np.zeros((2, 2)), np.zeros((2, 1)), np.eye(2), [[1], [0]])
        A_g, B_g, _ = build_observer_matrices(augment(ss, np.eye(2)))
        assert not B_g.any()
        np.testing.assert_array_equal(A_g[:2], 0.0)
        np.testing.assert_array_equal(A_g[4], 0.0)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-1e3, 1e3), min_size=5, max_size=5))
    def test_output_selects_filter_states(self, z):
        _, _, C_g = build_observer_matrices(augment(plant_state_space(*reference_elements()), np.eye(2)))
        np.testing.assert_array_equal(C_g @ np.array(z), z[2:4])


class TestObservability:
    def test_rank_matches_exact_oracle(self):
        assert observability_rank_exact(TABLE_A, TABLE_C) == 5
        assert observability_rank(AUGMENTED_A, AUGMENTED_C) == (5, True)

    def test_trivial_cases(self):
        assert observability_rank(np.eye(3), np.zeros((1, 3))) == (0, False)
        assert observability_rank(np.eye(3), np.eye(3)) == (3, True)


class TestPlacement:
    def test_scalar(self):
        L = place_observer_poles([[-1.0]], [[1.0]], [-2.0])
        assert L[0, 0] == pytest.approx(1.0, rel=1e-12)

    def test_listed_poles(self):
        L = place_observer_poles(AUGMENTED_A, AUGMENTED_C, DEFAULT_OBSERVER_POLES)
        got = sorted_poles(np.linalg.eigvals(AUGMENTED_A - L @ AUGMENTED_C))
        want = sorted_poles(DEFAULT_OBSERVER_POLES)
        for g, w in zip(got, want):
            assert abs(g - w) / abs(w) < 1e-6

    def test_reference_design_hurwitz(self):
        d = reference_design()
        assert d.L.shape == (5, 2)
        assert np.max(d.achieved_poles().real) < 0
        assert d.L_x.shape == (4, 2) and d.L_f.shape == (1, 2)

    def test_missing_conjugate(self):
        poles = (complex(-1, 1), complex(-1, 2), -2, -3, -4)
        with pytest.raises(ObserverDesignError, match="conjugate"):
            place_observer_poles(AUGMENTED_A, AUGMENTED_C, poles)

    def test_unstable_or_wrong_count(self):
        with pytest.raises(ObserverDesignError):
            place_observer_poles(AUGMENTED_A, AUGMENTED_C, (-1, -2, -3, -4, 0.5))
        with pytest.raises(ObserverDesignError):
            place_observer_poles(AUGMENTED_A, AUGMENTED_C, (-1, -2, -3))

    def test_unobservable(self):
        C = np.zeros((2, 5))
        C[0, 4] = 1.0
        with pytest.raises(ObserverDesignError, match="observable"):
            place_observer_poles(AUGMENTED_A, C, DEFAULT_OBSERVER_POLES)

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.floats(0.05, 60.0), min_size=5, max_size=5, unique=True))
    def test_any_real_target_set(self, mags):
        targets = [-m for m in mags]
        if min(abs(a - b) for i, a in enumerate(mags) for b in mags[i + 1:]) < 1e-2:
            return
        d = design_observer(plant_state_space(*reference_elements()), None, targets)
        assert np.max(d.achieved_poles().real) < 0


class TestPrintedGain:
    def test_oracle_characteristic_polynomial(self):
        for got, want in zip(sorted_poles(printed_gain_roots()), sorted_poles(PRINTED_GAIN_POLES)):
            assert abs(got - want) < 1e-6

    def test_library_spectrum_matches_fixture(self):
        for got, want in zip(sorted_poles(printed_gain_spectrum()), sorted_poles(PRINTED_GAIN_POLES)):
            assert abs(got - want) < 1e-6

    def test_recorded_outcome_is_mismatch(self):
        _, matches, err = printed_gain_report()
        assert not matches
        assert err > 1.0

    def test_fixture_shape(self):
        assert PRINTED_OBSERVER_GAIN.shape == (2, 5)


class TestObserverDynamics:
    def test_equilibrium(self):
        d = reference_design()
        obs = ObserverState.zeros(4)
        for _ in range(10):
            obs = observer_step(obs, d, 0.0, np.zeros(2), 1e-3)
        assert not obs.x_hat_e.any() and obs.f_hat_s == 0.0

    def test_error_envelope(self):
        d = reference_design()
        E = d.error_matrix
        eig, V = np.linalg.eig(E)
        slowest = np.max(eig.real)
        assert slowest == pytest.approx(-0.1951, rel=1e-6)
        kappa = np.linalg.cond(V)
        dt = 1e-2
        M, _ = rk4_transition(E, np.zeros((5, 1)), dt)
        horizon = 20 / abs(slowest)
        steps = int(np.ceil(horizon / dt))
        for e0 in np.eye(5):
            e = e0.copy()
            for k in range(1, steps + 1):
                e = M @ e
                if k % 100 == 0:
                    assert np.linalg.norm(e) <= kappa * np.exp(slowest * k * dt) * (1 + 1e-6)
            assert np.linalg.norm(e) < 1e-8

    def test_constant_fault_is_recovered(self):
        d = reference_design()
        aug = d.aug
        u, F = 3.0, -25.0
        x_e = -np.linalg.solve(aug.A_e, aug.B_e[:, 0] * u + aug.F_e[:, 0] * F)
        y_e = aug.C_e @ x_e
        obs = ObserverState.zeros(4)
        dt = 1e-2
        peak = 0.0
        for _ in range(int(120 / dt)):
            obs = observer_step(obs, d, u, y_e, dt)
            peak = max(peak, np.linalg.norm(residual(obs, d, y_e)))
        assert abs(obs.f_hat_s - F) < 1e-3 * abs(F)
        assert np.linalg.norm(residual(obs, d, y_e)) < 1e-6 * peak
        np.testing.assert_allclose(obs.x_hat_e, x_e, rtol=1e-6, atol=1e-6)
