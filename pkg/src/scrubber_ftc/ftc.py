"""Sensor-fault injection and active fault-tolerant reconfiguration.

Sensor model and compensation::

    y_m = y + f_s          (measured)
    y_t = y_m - f_hat_s    (compensated, fed back when FTC is on)
    e   = r - y_t          (r - y_m when FTC is off)

A sensitivity fault ``y_m = alpha y`` is carried through the additive
channel as ``f_s = (alpha - 1) y``.  The observer always sees the raw
filtered measurement, never the compensated one.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .control import ControllerState, PIGains, pi_step
from .lti import SimulationError, rk4_transition
from .model import StateSpace
from .observer import ObserverDesign, ObserverState

FAULT_KINDS = ("none", "sensitivity", "bias")


def fault_problems(kind, alpha, value, onset_step, output):
    """Every violated fault-profile invariant, as messages."""
    out = []
    if kind not in FAULT_KINDS:
        out.append(f"fault kind must be one of {FAULT_KINDS}, got {kind!r}")
    if kind == "sensitivity" and not 0.0 < alpha <= 1.0:
        out.append(f"alpha must satisfy 0 < alpha <= 1, got {alpha}")
    if not np.isfinite(value):
        out.append(f"bias value must be finite, got {value}")
    if int(onset_step) != onset_step or onset_step < 0:
        out.append(f"onset_step must be an integer >= 0, got {onset_step}")
    if output < 0:
        out.append(f"output index must be >= 0, got {output}")
    return out


@dataclass(frozen=True)
class FaultProfile:
    """Sensor fault on one output, active from ``onset_step`` on.

    ``alpha`` is the remaining sensitivity (1.0 = healthy) for
    ``kind="sensitivity"``; ``value`` is the offset for ``kind="bias"``.
    """

    kind: str = "none"
    alpha: float = 1.0
    value: float = 0.0
    onset_step: int = 0
    output: int = 0

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ValueError("; ".join(problems))

    def problems(self):
        return fault_problems(self.kind, self.alpha, self.value, self.onset_step, self.output)

    def active(self, step):
        return self.kind != "none" and step >= self.onset_step

    def affine(self, step, q):
        """Per-output ``(scale, offset)`` with ``y_m = scale * y + offset``."""
        return _affine(self, self.active(step), q)


@lru_cache(maxsize=64)
def _affine(profile, active, q):
    scale = np.ones(q)
    offset = np.zeros(q)
    if active:
        if profile.kind == "sensitivity":
            scale[profile.output] = profile.alpha
        else:
            offset[profile.output] = profile.value
    scale.setflags(write=False)
    offset.setflags(write=False)
    return scale, offset


NO_FAULT = FaultProfile()


def apply_sensor_fault(y, profile: FaultProfile, step):
    """Measured output and the equivalent additive fault.

    ``y`` may be a scalar (taken as the affected output) or an output
    vector.  Returns ``(y_m, f_s)`` with ``f_s`` the scalar fault on the
    affected channel.  ``f_s`` is formed first and ``y_m = y + F f_s``, so
    the identity holds bit for bit.
    """
    y_arr = np.asarray(y, dtype=float)
    scalar = y_arr.ndim == 0
    y_k = float(y_arr) if scalar else float(y_arr[profile.output])
    f_s = 0.0
    if profile.active(step):
        f_s = (profile.alpha - 1.0) * y_k if profile.kind == "sensitivity" else float(profile.value)
    if scalar:
        return y_k + f_s, f_s
    y_m = y_arr.copy()
    y_m[profile.output] = y_k + f_s
    return y_m, f_s


def compensate(y_m, f_hat_s):
    """Remove the estimated fault from the measurement: ``y_t = y_m - f_hat_s``."""
    return y_m - f_hat_s


@dataclass(frozen=True)
class LoopSignals:
    """One logged loop iteration; ``y``, ``y_m``, ``y_t`` are the controlled output."""

    t: float
    r: float
    e: float
    u: float
    y: float
    y_m: float
    y_t: float
    f_s: float
    f_hat_s: float
    x: np.ndarray
    xi: np.ndarray
    x_hat_e: np.ndarray


def joint_dynamics(ss: StateSpace, design: ObserverDesign, scale, offset):
    """Plant + measurement filter + observer as one linear system.

    State ``[x, xi, x_hat_e, f_hat]``, input ``[u, 1]`` (the constant input
    carries the bias fault).  The filter sees ``y_m = diag(scale) C x + offset``.
    """
    n, q = ss.n_states, ss.n_outputs
    m = ss.B.shape[1]
    phi = design.aug.Phi
    ng = design.A_g.shape[0]
    Z = np.zeros
    M = np.block(
        [
            [ss.A, Z((n, q)), Z((n, ng))],
            [phi @ np.diag(scale) @ ss.C, -phi, Z((q, ng))],
            [Z((ng, n)), design.L, design.error_matrix],
        ]
    )
    N = np.block(
        [
            [ss.B, Z((n, 1))],
            [Z((q, m)), (phi @ offset)[:, None]],
            [design.B_g, Z((ng, 1))],
        ]
    )
    return M, N


@dataclass
class LoopConfig:
    """Everything a loop iteration needs besides the evolving states."""

    ss: StateSpace
    design: ObserverDesign
    gains: PIGains
    dt: float
    setpoint: Callable[[float], float]
    fault: FaultProfile = NO_FAULT
    ftc_enabled: bool = True
    output_clamp: tuple | None = None
    controlled_output: int = 0
    _transitions: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        q = self.ss.n_outputs
        if self.fault.kind != "none":
            if self.fault.output >= q:
                raise ValueError(f"fault output {self.fault.output} out of range (q={q})")
            if self.ss.F[self.fault.output, 0] == 0:
                raise ValueError(
                    f"fault on output {self.fault.output} is outside the observer's fault direction"
                )

    def transition(self, step):
        key = self.fault.active(step)
        if key not in self._transitions:
            scale, offset = self.fault.affine(step, self.ss.n_outputs)
            M, N = joint_dynamics(self.ss, self.design, scale, offset)
            self._transitions[key] = rk4_transition(M, N, self.dt)
        return self._transitions[key]


def closed_loop_step(plant_state, controller_state: ControllerState,
                     observer_state: ObserverState, config: LoopConfig, step):
    """One loop iteration: measure, estimate, compensate, control, integrate.

    ``plant_state`` holds the plant states followed by the filter states.
    The observer estimate used at ``step`` is the one aligned with the plant
    at ``t = step * dt``; plant, filter and observer are then advanced
    together over ``[t, t + dt]`` with ``u`` held.

    Returns ``(plant_state, controller_state, observer_state, signals)``.
    """
    ss = config.ss
    n, q = ss.n_states, ss.n_outputs
    x = plant_state[:n]
    xi = plant_state[n:]
    t = step * config.dt
    r = float(config.setpoint(t))
    k = config.controlled_output

    y = ss.C @ x
    y_m, f_s = apply_sensor_fault(y, config.fault, step)
    f_hat = observer_state.f_hat_s
    y_t = compensate(y_m, ss.F[:, 0] * f_hat)

    e = r - (y_t[k] if config.ftc_enabled else y_m[k])
    u, controller_state = pi_step(controller_state, e, config.dt, config.gains)
    if config.output_clamp is not None:
        u = min(max(u, config.output_clamp[0]), config.output_clamp[1])

    M, N = config.transition(step)
    z = np.concatenate([plant_state, observer_state.x_hat_e, (f_hat,)])
    z = M @ z + N[:, 0] * u + N[:, 1]
    if not math.isfinite(z.sum()):
        raise SimulationError(f"state diverged at step {step} (t={t:g} s)")

    signals = LoopSignals(
        t=t, r=r, e=e, u=u,
        y=float(y[k]), y_m=float(y_m[k]), y_t=float(y_t[k]),
        f_s=f_s if config.fault.output == k else 0.0,
        f_hat_s=f_hat,
        x=x, xi=xi, x_hat_e=observer_state.x_hat_e,
    )
    nx = n + q
    new_obs = ObserverState(z[nx:-1], float(z[-1]))
    return z[:nx], controller_state, new_obs, signals
