"""Scrubber pressure plant, control valve and transmitter models.

Every element is a first-order lag ``K / (tau s + 1)``.  Two routes build
the plant constants:

* :func:`reference_elements` reads them off the tabulated augmented matrix
  (canonical model used by the shipped scenarios);
* :func:`physical_elements` evaluates the linearised pressure balance from
  vessel and fluid properties.

The two routes do not agree (gain ~47.3 vs ~55.2); :func:`constant_discrepancy`
reports the gap instead of hiding it.
"""

import math
from dataclasses import dataclass, field

import numpy as np

#: Default gravitational acceleration (m/s^2); cancels in the plant gain.
GRAVITY = 9.81

#: Ratio of inherent time over stroke, same value for diaphragm and piston.
DEFAULT_STROKE_RATIO = 0.03


@dataclass(frozen=True)
class PhysicalPlantParams:
    """Vessel geometry and fluid properties of the scrubber.

    ``A`` (cross-section, m^2) is computed from the diameter ``d`` when not
    given.  ``V``, ``H`` and the specific gravities are carried for
    documentation only; the dynamics never use them.
    """

    V: float
    d: float
    H: float
    rho_i: float
    rho_o: float
    h_i: float
    h_o: float
    k: float
    p_o: float
    g: float = GRAVITY
    A: float | None = None
    gamma_l: float | None = None
    gamma_g: float | None = None

    def __post_init__(self):
        if self.A is None:
            object.__setattr__(self, "A", math.pi * self.d**2 / 4.0)
        bad = [
            name
            for name in ("V", "d", "H", "A", "rho_i", "rho_o", "h_i", "h_o", "g", "k", "p_o")
            if not (math.isfinite(getattr(self, name)) and getattr(self, name) > 0)
        ]
        if bad:
            raise ValueError(f"parameters must be finite and > 0: {', '.join(bad)}")


#: V-100 scrubber data (p_o in psi, densities kg/m^3, enthalpies J/kg).
SCRUBBER_PARAMS = PhysicalPlantParams(
    V=2.5,
    d=1.07,
    H=2.4,
    rho_i=5.2,
    rho_o=4.9,
    h_i=4.9,
    h_o=4.1,
    k=1.0,
    p_o=348.091,
    gamma_l=0.726,
    gamma_g=1.173,
)

#: Pressure set of the vessel as quoted by the operator, in bar.
NAMEPLATE_PRESSURE_BAR = 24.0

# Entries of the tabulated plant block: A = [[-5.0250, 277.45], [0, -3.9680]],
# B = [0, 0.9920].
TABULATED_PLANT_POLE = 5.0250
TABULATED_COUPLING = 277.45
TABULATED_VALVE_POLE = 3.9680
TABULATED_VALVE_INPUT = 0.9920

# Instrument spans of PT-0105 / PV-0105.
CURRENT_SPAN_MA = (4.0, 20.0)
PNEUMATIC_SPAN_PSI = (3.0, 15.0)
GAS_SPAN_MMSCFD = (12.0, 16.0)
VALVE_FACTOR_YC = 0.68
VALVE_COEFFICIENT_CV = 117.0


@dataclass(frozen=True)
class FirstOrderTF:
    """Transfer function ``gain / (tau s + 1)``."""

    gain: float
    tau: float

    def __post_init__(self):
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"tau must be finite and > 0, got {self.tau}")
        if not math.isfinite(self.gain) or self.gain == 0:
            raise ValueError(f"gain must be finite and nonzero, got {self.gain}")

    @property
    def pole(self):
        return -1.0 / self.tau


@dataclass(frozen=True)
class StateSpace:
    """``xdot = A x + B u``, ``y = C x + F f_s``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    F: np.ndarray
    state_labels: tuple = field(default=("p", "m_dot_i"))

    def __post_init__(self):
        A, B, C, F = (np.array(m, dtype=float) for m in (self.A, self.B, self.C, self.F))
        if B.ndim == 1:
            B = B[:, None]
        if F.ndim == 1:
            F = F[:, None]
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got {A.shape}")
        if B.shape[0] != n:
            raise ValueError(f"B has {B.shape[0]} rows, expected {n}")
        if C.ndim != 2 or C.shape[1] != n:
            raise ValueError(f"C must be q x {n}, got {C.shape}")
        if F.shape != (C.shape[0], 1):
            raise ValueError(f"F must be {C.shape[0]} x 1, got {F.shape}")
        for name, m in zip("ABCF", (A, B, C, F)):
            m.setflags(write=False)
            object.__setattr__(self, name, m)

    @property
    def n_states(self):
        return self.A.shape[0]

    @property
    def n_outputs(self):
        return self.C.shape[0]


def _span(span, what):
    lo, hi = span
    if not hi > lo:
        raise ValueError(f"{what} span must satisfy max > min, got {span}")
    return hi - lo


def scrubber_tf(params: PhysicalPlantParams) -> FirstOrderTF:
    """Linearised pressure response to inlet flow, ``P(s)/M_i(s)``.

    ``gain = (2 sqrt(p_o) / k) * (rho_i h_i g) / (rho_o h_o g)`` and
    ``tau = 2 A sqrt(p_o) / (rho_o h_o g k)``.
    """
    p = params
    if p.p_o <= 0 or p.k <= 0 or p.rho_o * p.h_o <= 0:
        raise ValueError("p_o, k and rho_o*h_o must be positive")
    root = math.sqrt(p.p_o)
    out_term = p.rho_o * p.h_o * p.g
    gain = (2.0 * root / p.k) * (p.rho_i * p.h_i * p.g) / out_term
    tau = 2.0 * p.A * root / (out_term * p.k)
    return FirstOrderTF(gain, tau)


def transmitter_tf(out_span, in_span, tau_t) -> FirstOrderTF:
    """Transmitter model with gain equal to output span over input span."""
    gain = _span(out_span, "output") / _span(in_span, "input")
    return FirstOrderTF(gain, tau_t)


def valve_gain(gas_span, ip_out_span, ip_in_span):
    """Control-valve gain K_v (mmscfd/mA) through the I/P converter.

    The I/P stage maps the current span to the pneumatic span, the valve maps
    the pneumatic span to the gas-flow span; K_v is the product.
    """
    g_ip = _span(ip_out_span, "I/P output") / _span(ip_in_span, "I/P input")
    g_v = _span(gas_span, "gas") / _span(ip_out_span, "I/P output")
    return g_v * g_ip


def flow_change_fraction(q_max, q_min):
    """Fractional flow change ``(q_max - q_min) / q_max``."""
    if q_max == 0:
        raise ValueError("q_max must be nonzero")
    return (q_max - q_min) / q_max


def valve_time_constant(T_v, delta_V, R_v=DEFAULT_STROKE_RATIO):
    """``tau_v = T_v (delta_V + R_v)`` with T_v the full stroking time."""
    if T_v <= 0:
        raise ValueError(f"T_v must be positive, got {T_v}")
    if not 0.0 <= delta_V <= 1.0:
        raise ValueError(f"delta_V must lie in [0, 1], got {delta_V}")
    if R_v < 0:
        raise ValueError(f"R_v must be non-negative, got {R_v}")
    return T_v * (delta_V + R_v)


def linearized_outflow(p, k, p_o):
    """First-order Taylor expansion of ``k sqrt(p)`` about ``p_o``."""
    if p_o <= 0:
        raise ValueError(f"p_o must be positive, got {p_o}")
    root = math.sqrt(p_o)
    return k * root + k / (2.0 * root) * (np.asarray(p, dtype=float) - p_o)


def nonlinear_pressure_rate(p, m_dot_i, params: PhysicalPlantParams):
    """Pressure derivative with the exact square-root outflow ``k sqrt(p)``."""
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr < 0):
        raise ValueError("pressure must be non-negative")
    inflow = params.rho_i * params.h_i * params.g * np.asarray(m_dot_i, dtype=float)
    outflow = params.rho_o * params.h_o * params.g * params.k * np.sqrt(p_arr)
    return (inflow - outflow) / params.A


def linearized_pressure_rate(p, m_dot_i, params: PhysicalPlantParams):
    """Pressure derivative with the outflow linearised about ``p_o``."""
    inflow = params.rho_i * params.h_i * params.g * np.asarray(m_dot_i, dtype=float)
    outflow = params.rho_o * params.h_o * params.g * linearized_outflow(p, params.k, params.p_o)
    return (inflow - outflow) / params.A


def plant_state_space(plant: FirstOrderTF, valve: FirstOrderTF) -> StateSpace:
    """Series connection valve -> scrubber with states ``(p, m_dot_i)``.

    Both states are measured (``C = I``); the sensor fault enters the
    pressure channel only (``F = [1, 0]^T``).
    """
    A = np.array(
        [
            [-1.0 / plant.tau, plant.gain / plant.tau],
            [0.0, -1.0 / valve.tau],
        ]
    )
    B = np.array([[0.0], [valve.gain / valve.tau]])
    return StateSpace(A, B, np.eye(2), np.array([[1.0], [0.0]]))


def reference_elements():
    """Scrubber and valve lags recovered from the tabulated matrix entries."""
    tau_s = 1.0 / TABULATED_PLANT_POLE
    tau_v = 1.0 / TABULATED_VALVE_POLE
    plant = FirstOrderTF(TABULATED_COUPLING * tau_s, tau_s)
    valve = FirstOrderTF(TABULATED_VALVE_INPUT * tau_v, tau_v)
    return plant, valve


def physical_elements(params: PhysicalPlantParams = SCRUBBER_PARAMS):
    """Scrubber lag from the pressure balance, valve from instrument spans.

    The stroking-time relation does not reproduce the tabulated valve pole
    with Y_c = 0.68, C_v = 117, so tau_v is taken from the tabulated matrix.
    """
    plant = scrubber_tf(params)
    k_v = valve_gain(GAS_SPAN_MMSCFD, PNEUMATIC_SPAN_PSI, CURRENT_SPAN_MA)
    valve = FirstOrderTF(k_v, 1.0 / TABULATED_VALVE_POLE)
    return plant, valve


def constant_discrepancy(params: PhysicalPlantParams = SCRUBBER_PARAMS):
    """Rows ``(name, tabulated, physical, relative_difference)`` for K_s, tau_s, K_v, tau_v."""
    ref_plant, ref_valve = reference_elements()
    phy_plant, phy_valve = physical_elements(params)
    rows = []
    for name, a, b in (
        ("K_s", ref_plant.gain, phy_plant.gain),
        ("tau_s", ref_plant.tau, phy_plant.tau),
        ("K_v", ref_valve.gain, phy_valve.gain),
        ("tau_v", ref_valve.tau, phy_valve.tau),
    ):
        rows.append((name, a, b, (b - a) / a))
    return rows
