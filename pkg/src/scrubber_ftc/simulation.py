"""Scenario definition, closed-loop runs and open-loop steady-state tables."""

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .control import SCRUBBER_PI, ControllerState, PIGains
from .ftc import NO_FAULT, FaultProfile, LoopConfig, closed_loop_step
from .lti import SimulationError, dc_gain, integrate_step, rk4_transition  # noqa: F401
from .model import (
    SCRUBBER_PARAMS,
    PhysicalPlantParams,
    physical_elements,
    plant_state_space,
    reference_elements,
)
from .observer import DEFAULT_OBSERVER_POLES, ObserverState, design_observer

MODEL_SOURCES = ("paper_matrices", "physical_params")

DEFAULT_DT = 1e-3
SHORT_DURATION = 5.0
STEADY_DURATION = 60.0
DEFAULT_SETPOINT = 348.091
FAULT_ONSET_STEP = 100

CSV_COLUMNS = (
    "t", "r", "e", "u", "m_dot_i", "p", "y", "f_s", "y_m", "f_hat_s", "y_t",
    "xhat_p", "xhat_m", "xi1_hat", "xi2_hat",
)


class ScenarioError(ValueError):
    """Scenario validation failure; ``problems`` lists every violation."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid scenario:\n  " + "\n  ".join(self.problems))


@dataclass(frozen=True)
class Scenario:
    """One closed-loop experiment.

    ``setpoint_profile`` is a sequence of ``(time_s, value)`` breakpoints;
    the reference is piecewise constant and zero before the first one.
    ``plant_params`` is only used when ``model_source == "physical_params"``.
    """

    duration: float = STEADY_DURATION
    dt: float = DEFAULT_DT
    setpoint_profile: tuple = ((0.0, DEFAULT_SETPOINT),)
    fault: FaultProfile = NO_FAULT
    ftc_enabled: bool = True
    gains: PIGains = SCRUBBER_PI
    model_source: str = "paper_matrices"
    observer_poles: tuple = DEFAULT_OBSERVER_POLES
    output_clamp: tuple | None = None
    plant_params: PhysicalPlantParams = SCRUBBER_PARAMS
    name: str = ""

    def __post_init__(self):
        object.__setattr__(
            self, "setpoint_profile",
            tuple((float(t), float(v)) for t, v in self.setpoint_profile),
        )
        object.__setattr__(self, "observer_poles", tuple(complex(p) for p in self.observer_poles))
        if self.output_clamp is not None:
            object.__setattr__(self, "output_clamp", tuple(float(c) for c in self.output_clamp))
        problems = self.problems()
        if problems:
            raise ScenarioError(problems)

    def problems(self):
        out = []
        if not (math.isfinite(self.duration) and self.duration > 0):
            out.append(f"duration must be > 0, got {self.duration}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            out.append(f"dt must be > 0, got {self.dt}")
        elif self.dt > self.duration:
            out.append(f"dt ({self.dt}) must not exceed duration ({self.duration})")
        if not self.setpoint_profile:
            out.append("setpoint profile needs at least one (time, value) pair")
        times = [t for t, _ in self.setpoint_profile]
        if any(b < a for a, b in zip(times, times[1:])):
            out.append("setpoint times must be non-decreasing")
        if any(t < 0 or t > self.duration for t in times):
            out.append("setpoint times must lie within [0, duration]")
        if self.model_source not in MODEL_SOURCES:
            out.append(f"model source must be one of {MODEL_SOURCES}, got {self.model_source!r}")
        if len(self.observer_poles) != 5:
            out.append(f"observer needs 5 poles, got {len(self.observer_poles)}")
        if self.output_clamp is not None:
            lo, hi = self.output_clamp
            if not lo < hi:
                out.append(f"output clamp needs min < max, got {self.output_clamp}")
        if self.fault.kind != "none" and self.fault.output != 0:
            out.append("only the pressure output (index 0) can carry a sensor fault")
        return out

    @property
    def n_steps(self):
        return int(math.floor(self.duration / self.dt + 1e-9))

    @property
    def onset_time(self):
        return self.fault.onset_step * self.dt

    def setpoint(self, t):
        r = 0.0
        for tb, v in self.setpoint_profile:
            if t + 1e-12 >= tb:
                r = v
            else:
                break
        return r

    def elements(self):
        if self.model_source == "physical_params":
            return physical_elements(self.plant_params)
        return reference_elements()

    def state_space(self):
        return plant_state_space(*self.elements())

    def digest(self):
        d = asdict(self)
        d["observer_poles"] = [repr(p) for p in self.observer_poles]
        text = json.dumps(d, sort_keys=True, default=repr)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def preset_scenario(name, ftc=True, duration=STEADY_DURATION, dt=DEFAULT_DT):
    """Shipped experiments: ``baseline`` (no fault), ``sens85``, ``sens70``."""
    faults = {
        "baseline": NO_FAULT,
        "sens85": FaultProfile("sensitivity", alpha=0.85, onset_step=FAULT_ONSET_STEP),
        "sens70": FaultProfile("sensitivity", alpha=0.70, onset_step=FAULT_ONSET_STEP),
    }
    if name not in faults:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(faults)}")
    label = f"{name}_{'ftc' if ftc else 'noftc'}"
    return Scenario(duration=duration, dt=dt, fault=faults[name], ftc_enabled=ftc, name=label)


PRESET_NAMES = ("baseline", "sens85", "sens70")


@dataclass
class Trace:
    """Uniformly sampled record of a run.

    Column arrays follow :data:`CSV_COLUMNS`.  ``xi1``/``xi2`` (true filter
    states) are kept for diagnostics but not serialised.
    """

    t: np.ndarray
    r: np.ndarray
    e: np.ndarray
    u: np.ndarray
    m_dot_i: np.ndarray
    p: np.ndarray
    y: np.ndarray
    f_s: np.ndarray
    y_m: np.ndarray
    f_hat_s: np.ndarray
    y_t: np.ndarray
    xhat_p: np.ndarray
    xhat_m: np.ndarray
    xi1_hat: np.ndarray
    xi2_hat: np.ndarray
    xi1: np.ndarray | None = None
    xi2: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def dt(self):
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0

    def column(self, name):
        return getattr(self, name)

    def as_array(self):
        return np.column_stack([getattr(self, c) for c in CSV_COLUMNS])

    def estimation_error(self):
        """Columns ``x_gamma - x_hat_gamma`` for (p, m_dot_i, xi_1, xi_2, f_s)."""
        if self.xi1 is None:
            raise ValueError("trace has no true filter states")
        return np.column_stack([
            self.p - self.xhat_p,
            self.m_dot_i - self.xhat_m,
            self.xi1 - self.xi1_hat,
            self.xi2 - self.xi2_hat,
            self.f_s - self.f_hat_s,
        ])

    def residual(self):
        """Filtered-output residual ``y_e - y_e_hat``."""
        if self.xi1 is None:
            raise ValueError("trace has no true filter states")
        return np.column_stack([self.xi1 - self.xi1_hat, self.xi2 - self.xi2_hat])


def run_scenario(scenario: Scenario) -> Trace:
    """Simulate ``scenario`` from rest; deterministic for identical inputs."""
    ss = scenario.state_space()
    design = design_observer(ss, None, scenario.observer_poles)
    config = LoopConfig(
        ss=ss,
        design=design,
        gains=scenario.gains,
        dt=scenario.dt,
        setpoint=scenario.setpoint,
        fault=scenario.fault,
        ftc_enabled=scenario.ftc_enabled,
        output_clamp=scenario.output_clamp,
    )

    n = scenario.n_steps + 1
    cols = {c: np.empty(n) for c in CSV_COLUMNS}
    xi = np.empty((n, ss.n_outputs))

    plant = np.zeros(ss.n_states + ss.n_outputs)
    ctrl = ControllerState()
    obs = ObserverState.zeros(design.aug.n_states)
    # overflow on the way to divergence is reported by the step's finiteness guard
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n):
            plant, ctrl, obs, s = closed_loop_step(plant, ctrl, obs, config, k)
            cols["t"][k] = s.t
            cols["r"][k] = s.r
            cols["e"][k] = s.e
            cols["u"][k] = s.u
            cols["p"][k], cols["m_dot_i"][k] = s.x
            cols["y"][k] = s.y
            cols["f_s"][k] = s.f_s
            cols["y_m"][k] = s.y_m
            cols["f_hat_s"][k] = s.f_hat_s
            cols["y_t"][k] = s.y_t
            (cols["xhat_p"][k], cols["xhat_m"][k],
             cols["xi1_hat"][k], cols["xi2_hat"][k]) = s.x_hat_e
            xi[k] = s.xi

    plant_tf, valve_tf = scenario.elements()
    metadata = {
        "scenario": scenario.name,
        "scenario_hash": scenario.digest(),
        "model_source": scenario.model_source,
        "K_s": plant_tf.gain,
        "tau_s": plant_tf.tau,
        "K_v": valve_tf.gain,
        "tau_v": valve_tf.tau,
        "observer_gain": design.L,
        "achieved_poles": design.achieved_poles(),
        "onset_time": scenario.onset_time,
    }
    return Trace(**cols, xi1=xi[:, 0], xi2=xi[:, 1], metadata=metadata)


def run_pair(scenario: Scenario):
    """Run ``scenario`` with FTC on and off; returns ``(trace_ftc, trace_noftc)``."""
    on = run_scenario(replace(scenario, ftc_enabled=True))
    off = run_scenario(replace(scenario, ftc_enabled=False))
    return on, off


def percent_error(real, sim):
    """``(sim - real) / real * 100``."""
    return (sim - real) / real * 100.0


# Open-loop comparison against plant data: (real, simulated, error %) as
# published; the driving inputs were not given.
OPEN_LOOP_REFERENCE = (
    (346.113, 349.6, 1.01),
    (347.235, 351.0, 1.08),
    (348.091, 352.1, 1.15),
    (346.702, 350.2, 1.01),
    (344.805, 347.9, 0.90),
    (345.921, 349.9, 1.15),
    (347.000, 350.7, 1.07),
    (345.065, 349.0, 1.14),
    (342.186, 345.1, 0.85),
    (344.237, 347.7, 1.01),
)


def simulate_open_loop(ss, u, duration, dt=DEFAULT_DT):
    """Pressure output after holding ``u`` constant from rest for ``duration``."""
    M, N = rk4_transition(ss.A, ss.B, dt)
    x = np.zeros(ss.n_states)
    uu = np.atleast_1d(float(u))
    for _ in range(int(round(duration / dt))):
        x = M @ x + N @ uu
    if not np.all(np.isfinite(x)):
        raise SimulationError("open-loop run diverged")
    return ss.C @ x


def open_loop_table(inputs, ss=None, reference=None, dt=DEFAULT_DT, settle_factor=20.0):
    """Steady-state pressure for each constant input.

    Each run lasts ``settle_factor`` times the slowest time constant.  Rows
    are ``(u, p_sim, p_ref, error_pct)``; the last two are ``None`` without
    a reference column.
    """
    if ss is None:
        ss = plant_state_space(*reference_elements())
    eig = np.linalg.eigvals(ss.A)
    if np.any(eig.real >= 0):
        raise SimulationError("open-loop model is not stable")
    duration = settle_factor / np.min(np.abs(eig.real))
    if reference is not None and len(reference) != len(inputs):
        raise ValueError("reference column must match inputs")
    rows = []
    for i, u in enumerate(inputs):
        p_sim = float(simulate_open_loop(ss, u, duration, dt)[0])
        if reference is None:
            rows.append((u, p_sim, None, None))
        else:
            ref = reference[i]
            rows.append((u, p_sim, ref, percent_error(ref, p_sim)))
    return rows
