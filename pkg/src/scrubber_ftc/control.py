"""Discrete PI(D) law and second-order transient-response analytics."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PIGains:
    """Ideal-form gains: ``u = K_p [e + (1/T_i) int e + T_d de/dt]``."""

    K_p: float
    T_i: float
    T_d: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.K_p):
            raise ValueError(f"K_p must be finite, got {self.K_p}")
        if not (math.isfinite(self.T_i) and self.T_i > 0):
            raise ValueError(f"T_i must be > 0, got {self.T_i}")
        if not (math.isfinite(self.T_d) and self.T_d >= 0):
            raise ValueError(f"T_d must be >= 0, got {self.T_d}")


#: Gains of the V-100 pressure loop.
SCRUBBER_PI = PIGains(K_p=0.1396, T_i=0.3294)


@dataclass(frozen=True)
class ControllerState:
    integral: float = 0.0
    previous_error: float = 0.0
    started: bool = False

    def reset(self):
        return ControllerState()


def pi_step(state: ControllerState, e, dt, gains: PIGains):
    """One controller update.

    The integral is advanced by ``e * dt`` before it is used (forward
    rectangle), the derivative is the backward difference and is zero on the
    first call.

    Returns
    -------
    u : float
    new_state : ControllerState
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    integral = state.integral + e * dt
    derivative = (e - state.previous_error) / dt if state.started else 0.0
    u = gains.K_p * (e + integral / gains.T_i + gains.T_d * derivative)
    return u, ControllerState(integral, e, True)


@dataclass(frozen=True)
class TransientSpec:
    """Underdamped second-order pair ``s^2 + 2 zeta w_n s + w_n^2``."""

    zeta: float
    omega_n: float

    def __post_init__(self):
        if not 0.0 < self.zeta < 1.0:
            raise ValueError(
                f"closed-form metrics need 0 < zeta < 1, got zeta={self.zeta}"
            )
        if not self.omega_n > 0:
            raise ValueError(f"omega_n must be > 0, got {self.omega_n}")

    @property
    def omega_d(self):
        return self.omega_n * math.sqrt(1.0 - self.zeta**2)

    @property
    def sigma(self):
        return self.zeta * self.omega_n


@dataclass(frozen=True)
class TransientMetrics:
    rise_time: float
    peak_time: float
    settling_time_2pct: float
    settling_time_5pct: float
    overshoot_pct: float


def transient_metrics(spec: TransientSpec) -> TransientMetrics:
    """Closed-form rise, peak and settling times and peak overshoot (%)."""
    wd, sigma = spec.omega_d, spec.sigma
    beta = math.atan(wd / sigma)
    return TransientMetrics(
        rise_time=(math.pi - beta) / wd,
        peak_time=math.pi / wd,
        settling_time_2pct=4.0 / sigma,
        settling_time_5pct=3.0 / sigma,
        overshoot_pct=100.0 * math.exp(-(sigma / wd) * math.pi),
    )


@dataclass(frozen=True)
class StepMetrics:
    """Metrics measured on a sampled response; ``None`` when not defined."""

    rise_time: float | None
    peak_time: float | None
    settling_time_2pct: float | None
    overshoot_pct: float | None


def measure_step_response(trace, setpoint, band=0.02) -> StepMetrics:
    """Empirical step metrics of ``trace.y`` sampled at ``trace.t``.

    Times are measured from ``trace.t[0]``.  Rise time is 10 % -> 90 % of the
    final value; settling time is the first sample after the last one outside
    ``+-band`` of the final value; overshoot is ``(max - final) / final`` in
    percent.  If the output never reaches 10 % of ``setpoint`` every metric
    is ``None``.
    """
    t = np.asarray(trace.t, dtype=float)
    y = np.asarray(trace.y, dtype=float)
    if t.size == 0:
        raise ValueError("empty trace")
    if setpoint == 0:
        raise ValueError("setpoint must be nonzero")

    sign = math.copysign(1.0, setpoint)
    ys = sign * y
    if not np.any(ys >= 0.1 * abs(setpoint)):
        return StepMetrics(None, None, None, None)

    t = t - t[0]
    final = ys[-1]
    i10 = np.argmax(ys >= 0.1 * final)
    i90 = np.argmax(ys >= 0.9 * final)
    rise = t[i90] - t[i10] if ys[i90] >= 0.9 * final else None

    ipk = int(np.argmax(ys))
    overshoot = max(0.0, (ys[ipk] - final) / final) * 100.0

    outside = np.flatnonzero(np.abs(ys - final) > band * abs(final))
    if outside.size == 0:
        settle = 0.0
    else:
        settle = t[min(outside[-1] + 1, t.size - 1)]

    return StepMetrics(rise, t[ipk], settle, overshoot)
