"""Fixed-step integration helpers for linear time-invariant blocks.

All blocks in the loop (plant, measurement filter, observer) are linear, so
one classical RK4 step under a zero-order-hold input is itself a linear map
``x' = M x + N u``.  :func:`rk4_transition` builds that map once per
configuration; :func:`integrate_step` applies the four stages explicitly.
"""

import numpy as np


class SimulationError(RuntimeError):
    """Raised when a run diverges (non-finite state) or cannot be set up."""


def integrate_step(A, B, x, u, dt):
    """Advance ``xdot = A x + B u`` by one classical RK4 step.

    The input ``u`` is held constant over the step (zero-order hold).

    Parameters
    ----------
    A : (n, n) array_like
    B : (n, m) array_like
    x : (n,) array_like
        State at the start of the step.
    u : (m,) array_like or float
    dt : float
        Step length in seconds, strictly positive.

    Returns
    -------
    numpy.ndarray
        State after ``dt``.

    Raises
    ------
    SimulationError
        If the new state contains NaN or inf.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    x = np.asarray(x, dtype=float)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    n = A.shape[0]
    if A.shape != (n, n) or x.shape != (n,) or B.shape != (n, u.shape[0]):
        raise ValueError(
            f"inconsistent shapes A{A.shape}, B{B.shape}, x{x.shape}, u{u.shape}"
        )

    # overflow is reported through the finiteness check below
    with np.errstate(over="ignore", invalid="ignore"):
        bu = B @ u
        k1 = A @ x + bu
        k2 = A @ (x + 0.5 * dt * k1) + bu
        k3 = A @ (x + 0.5 * dt * k2) + bu
        k4 = A @ (x + dt * k3) + bu
        x_next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    if not np.all(np.isfinite(x_next)):
        raise SimulationError("non-finite state after integration step")
    return x_next


def rk4_transition(A, B, dt):
    """Return ``(M, N)`` such that one RK4 step equals ``M @ x + N @ u``.

    ``M`` is the degree-4 Taylor polynomial of ``exp(A dt)`` and
    ``N = dt * (I + hA/2 + (hA)^2/6 + (hA)^3/24) @ B``.  The result agrees
    with :func:`integrate_step` to rounding.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    n = A.shape[0]
    eye = np.eye(n)
    hA = dt * A
    hA2 = hA @ hA
    hA3 = hA2 @ hA
    M = eye + hA + hA2 / 2.0 + hA3 / 6.0 + hA3 @ hA / 24.0
    N = dt * (eye + hA / 2.0 + hA2 / 6.0 + hA3 / 24.0) @ B
    return M, N


def rk4_stable(A, dt):
    """True if every ``eig(A) * dt`` lies in the RK4 absolute-stability region."""
    z = np.linalg.eigvals(np.asarray(A, dtype=float)) * dt
    amp = np.abs(1 + z + z**2 / 2 + z**3 / 6 + z**4 / 24)
    return bool(np.all(amp <= 1.0))


def dc_gain(A, B, C):
    """Steady-state gain ``-C A^{-1} B`` of a stable LTI system.

    Raises
    ------
    numpy.linalg.LinAlgError
        If ``A`` is singular.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    C = np.asarray(C, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    return -C @ np.linalg.solve(A, B)
