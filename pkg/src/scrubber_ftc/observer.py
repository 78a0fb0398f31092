"""Augmented plant and joint state / sensor-fault observer.

The measured outputs are passed through a first-order filter
``xi_dot = Phi (y - xi)``.  Stacking filter states onto the plant moves an
additive sensor fault from the output equation into the state equation,
where a constant-fault internal model ``f_dot = 0`` makes it observable:

    [x_e; f]' = [[A_e, F_e], [0, 0]] [x_e; f] + [B_e; 0] u
    y_e       = [C_e, 0] [x_e; f]

The observer gain ``L = [L_x; L_f]`` is placed on the dual pair.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import place_poles

from .lti import integrate_step
from .model import StateSpace, plant_state_space, reference_elements


class ObserverDesignError(ValueError):
    """Unobservable pair, bad pole set, or failed placement."""


# Tabulated composite model (states p, m_dot_i, xi_1, xi_2, f_s).
AUGMENTED_A = np.array(
    [
        [-5.0250, 277.4500, 0, 0, 0],
        [0, -3.9680, 0, 0, 0],
        [1, 0, -1, 0, 1],
        [0, 1, 0, -1, 0],
        [0, 0, 0, 0, 0],
    ],
    dtype=float,
)
AUGMENTED_B = np.array([[0], [0.9920], [0], [0], [0]], dtype=float)
AUGMENTED_C = np.array([[0, 0, 1, 0, 0], [0, 0, 0, 1, 0]], dtype=float)

DEFAULT_OBSERVER_POLES = (
    complex(-54.4047, 33.5101),
    complex(-54.4047, -33.5101),
    -2.7588,
    -0.1951,
    -0.5291,
)

# Gain printed alongside the pole list, 2 x 5.  The same symbol is also used
# for the fault-input column of the composite model; here it is the gain.
# Read as L^T it does NOT produce DEFAULT_OBSERVER_POLES (see
# printed_gain_spectrum), so shipped designs use a freshly placed gain.
PRINTED_OBSERVER_GAIN = np.array(
    [
        [-80.0016, 0.6563, 8.4656, -0.2843, 0.2234],
        [18.9379, -0.2651, 3.4306, 0.0377, 0.0301],
    ]
)


@dataclass(frozen=True)
class AugmentedSystem:
    A_e: np.ndarray
    B_e: np.ndarray
    F_e: np.ndarray
    C_e: np.ndarray
    Phi: np.ndarray

    @property
    def n_states(self):
        return self.A_e.shape[0]

    @property
    def n_outputs(self):
        return self.C_e.shape[0]


@dataclass(frozen=True)
class ObserverDesign:
    """Composite observer matrices and the placed gain ``L`` (stacked L_x over L_f)."""

    A_g: np.ndarray
    B_g: np.ndarray
    C_g: np.ndarray
    L: np.ndarray
    target_poles: tuple
    aug: AugmentedSystem

    @property
    def L_x(self):
        return self.L[:-1]

    @property
    def L_f(self):
        return self.L[-1:]

    @property
    def error_matrix(self):
        """``A_g - L C_g``, the estimation-error dynamics."""
        return self.A_g - self.L @ self.C_g

    def achieved_poles(self):
        return np.linalg.eigvals(self.error_matrix)


@dataclass(frozen=True)
class ObserverState:
    x_hat_e: np.ndarray
    f_hat_s: float = 0.0

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n), 0.0)

    @property
    def stacked(self):
        return np.concatenate([self.x_hat_e, (self.f_hat_s,)])


def augment(ss: StateSpace, phi) -> AugmentedSystem:
    """Append measurement-filter states ``xi`` to the plant.

    ``A_e = [[A, 0], [Phi C, -Phi]]``, ``B_e = [B; 0]``,
    ``F_e = [0; Phi F]``, ``C_e = [0, I]``.
    """
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    n, q = ss.n_states, ss.n_outputs
    if phi.shape != (q, q):
        raise ObserverDesignError(f"Phi must be {q}x{q}, got {phi.shape}")
    if not np.all(np.linalg.eigvals(phi).real > 0):
        raise ObserverDesignError("filter is not stable: -Phi must be Hurwitz")

    A_e = np.block([[ss.A, np.zeros((n, q))], [phi @ ss.C, -phi]])
    B_e = np.vstack([ss.B, np.zeros((q, ss.B.shape[1]))])
    F_e = np.vstack([np.zeros((n, 1)), phi @ ss.F])
    C_e = np.hstack([np.zeros((q, n)), np.eye(q)])
    return AugmentedSystem(A_e, B_e, F_e, C_e, phi)


def build_observer_matrices(aug: AugmentedSystem):
    """Composite ``(A_g, B_g, C_g)`` with the fault appended as a constant state."""
    ne = aug.n_states
    A_g = np.block([[aug.A_e, aug.F_e], [np.zeros((1, ne + 1))]])
    B_g = np.vstack([aug.B_e, np.zeros((1, aug.B_e.shape[1]))])
    C_g = np.hstack([aug.C_e, np.zeros((aug.n_outputs, 1))])
    return A_g, B_g, C_g


def observability_matrix(A, C):
    A = np.asarray(A, dtype=float)
    C = np.atleast_2d(np.asarray(C, dtype=float))
    blocks = [C]
    for _ in range(A.shape[0] - 1):
        blocks.append(blocks[-1] @ A)
    return np.vstack(blocks)


def observability_rank(A, C):
    """Return ``(rank, observable)`` of the stacked ``[C; CA; ...; CA^(n-1)]``."""
    n = np.asarray(A).shape[0]
    rank = int(np.linalg.matrix_rank(observability_matrix(A, C)))
    return rank, rank == n


def _check_targets(targets, n):
    targets = np.asarray(targets, dtype=complex)
    if targets.size != n:
        raise ObserverDesignError(f"need {n} target poles, got {targets.size}")
    if np.any(targets.real >= 0):
        raise ObserverDesignError("target poles must have negative real part")
    for p in targets[np.abs(targets.imag) > 0]:
        if not np.any(np.isclose(targets, np.conj(p), rtol=1e-12, atol=0)):
            raise ObserverDesignError(f"pole {p} has no conjugate partner")
    return targets


def _match_error(achieved, targets):
    """Largest relative distance after matching achieved poles to targets."""
    remaining = list(achieved)
    worst = 0.0
    for t in targets:
        d = [abs(a - t) for a in remaining]
        i = int(np.argmin(d))
        worst = max(worst, d[i] / abs(t))
        remaining.pop(i)
    return worst


def place_observer_poles(A_g, C_g, targets, rtol=1e-6):
    """Observer gain ``L`` such that ``eig(A_g - L C_g)`` equals ``targets``.

    Solved as state-feedback placement on the dual ``(A_g^T, C_g^T)``.
    Multi-output placement is not unique; only the spectrum is guaranteed.
    """
    A_g = np.asarray(A_g, dtype=float)
    C_g = np.atleast_2d(np.asarray(C_g, dtype=float))
    n = A_g.shape[0]
    targets = _check_targets(targets, n)
    rank, observable = observability_rank(A_g, C_g)
    if not observable:
        raise ObserverDesignError(f"pair is not observable (rank {rank} < {n})")

    best = None
    # YT first; KNV0 is more accurate on tightly clustered real poles.  The
    # convergence warning concerns the robustness objective, not the
    # spectrum, which is checked here directly.
    for method in ("YT", "KNV0"):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            res = place_poles(A_g.T, C_g.T, targets, method=method, maxiter=100)
        L = res.gain_matrix.T
        err = _match_error(np.linalg.eigvals(A_g - L @ C_g), targets)
        if best is None or err < best[1]:
            best = (L, err)
        if err <= rtol:
            break
    L, err = best
    if err > rtol:
        raise ObserverDesignError(f"placement missed targets by {err:.3g} (relative)")
    return L


def design_observer(ss: StateSpace, phi=None, poles=DEFAULT_OBSERVER_POLES) -> ObserverDesign:
    """Augment ``ss``, build the composite model and place ``poles``."""
    if phi is None:
        phi = np.eye(ss.n_outputs)
    aug = augment(ss, phi)
    A_g, B_g, C_g = build_observer_matrices(aug)
    L = place_observer_poles(A_g, C_g, poles)
    return ObserverDesign(A_g, B_g, C_g, L, tuple(complex(p) for p in poles), aug)


def reference_design(poles=DEFAULT_OBSERVER_POLES) -> ObserverDesign:
    """Observer for the tabulated plant with identity filter."""
    return design_observer(plant_state_space(*reference_elements()), None, poles)


def printed_gain_spectrum():
    """Eigenvalues of ``A - K^T C`` for the printed 2 x 5 gain."""
    return np.linalg.eigvals(AUGMENTED_A - PRINTED_OBSERVER_GAIN.T @ AUGMENTED_C)


def printed_gain_report(rtol=1e-3):
    """Compare the printed gain's spectrum with the listed poles.

    Returns ``(spectrum, matches, worst_relative_error)``.
    """
    spec = printed_gain_spectrum()
    err = _match_error(spec, np.asarray(DEFAULT_OBSERVER_POLES, dtype=complex))
    return spec, err <= rtol, err


def observer_step(obs: ObserverState, design: ObserverDesign, u, y_e, dt) -> ObserverState:
    """Advance the observer one RK4 step with ``u`` and ``y_e`` held constant.

        x_hat_e' = A_e x_hat_e + B_e u + F_e f_hat + L_x (y_e - C_e x_hat_e)
        f_hat'   = L_f (y_e - C_e x_hat_e)
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    y_e = np.atleast_1d(np.asarray(y_e, dtype=float))
    A = design.error_matrix
    B = np.hstack([design.B_g, design.L])
    z = integrate_step(A, B, obs.stacked, np.concatenate([u, y_e]), dt)
    return ObserverState(z[:-1], float(z[-1]))


def residual(obs: ObserverState, design: ObserverDesign, y_e):
    """Output residual ``y_e - C_e x_hat_e``."""
    return np.asarray(y_e, dtype=float) - design.aug.C_e @ obs.x_hat_e
