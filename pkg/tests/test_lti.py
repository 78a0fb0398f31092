import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scrubber_ftc.lti import SimulationError, dc_gain, integrate_step, rk4_stable, rk4_transition
from scrubber_ftc.model import plant_state_space, reference_elements
from scrubber_ftc.observer import reference_design

finite = st.floats(-10, 10, allow_nan=False)


def test_constant_derivative_is_exact():
    x = integrate_step(np.zeros((2, 2)), np.eye(2), [1.0, -2.0], [3.0, 0.5], 0.25)
    np.testing.assert_array_equal(x, [1.75, -1.875])


def test_scalar_decay_matches_rk4_polynomial():
    x = integrate_step([[-1.0]], [[0.0]], [1.0], [0.0], 0.1)
    # 1 - h + h^2/2 - h^3/6 + h^4/24 at h = 0.1
    assert x[0] == pytest.approx(0.9048375, abs=1e-12)
    assert abs(x[0] - math.exp(-0.1)) < 1e-7


def test_observer_spectrum_in_stability_region_at_default_dt():
    design = reference_design()
    assert rk4_stable(design.error_matrix, 1e-3)
    fastest = np.max(np.abs(design.achieved_poles()))
    assert fastest * 1e-3 == pytest.approx(0.0640, abs=5e-4)


def test_stability_region_edge():
    # the real-axis RK4 boundary sits near -2.785
    assert rk4_stable([[-2.7]], 1.0)
    assert not rk4_stable([[-2.9]], 1.0)


def test_nonfinite_state_raises():
    with pytest.raises(SimulationError):
        integrate_step([[1.0]], [[1.0]], [1e308], [1e308], 10.0)


@pytest.mark.parametrize("dt", [0.0, -1e-3])
def test_nonpositive_dt_rejected(dt):
    with pytest.raises(ValueError):
        integrate_step([[-1.0]], [[1.0]], [0.0], [0.0], dt)


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        integrate_step(np.eye(2), np.ones((3, 1)), [0.0, 0.0], [1.0], 0.1)


@settings(max_examples=50, deadline=None)
@given(
    a=st.lists(finite, min_size=4, max_size=4),
    b=st.lists(finite, min_size=2, max_size=2),
    x=st.lists(finite, min_size=2, max_size=2),
    u=finite,
    dt=st.floats(1e-4, 0.2),
)
def test_transition_matches_explicit_stages(a, b, x, u, dt):
    A = np.array(a).reshape(2, 2)
    B = np.array(b).reshape(2, 1)
    M, N = rk4_transition(A, B, dt)
    direct = integrate_step(A, B, x, [u], dt)
    np.testing.assert_allclose(M @ x + N[:, 0] * u, direct, rtol=1e-12, atol=1e-12)


def test_dc_gain_identity():
    np.testing.assert_allclose(dc_gain(-np.eye(3), np.eye(3), np.eye(3)), np.eye(3))


def test_dc_gain_of_tabulated_plant():
    ss = plant_state_space(*reference_elements())
    g = dc_gain(ss.A, ss.B, ss.C)
    # triangular inversion: [K_s K_v; K_v] with K_s = 277.45/5.025, K_v = 0.992/3.968
    np.testing.assert_allclose(g[:, 0], [277.45 / 5.025 * 0.25, 0.25], rtol=1e-12)
    assert g[0, 0] == pytest.approx(13.8034826, abs=1e-6)


def test_dc_gain_singular():
    with pytest.raises(np.linalg.LinAlgError):
        dc_gain(np.zeros((2, 2)), np.ones((2, 1)), np.eye(2))
