"""Scrubber pressure loop with observer-based sensor-fault-tolerant control.

Typical use::

    from scrubber_ftc import preset_scenario, run_scenario
    trace = run_scenario(preset_scenario("sens85", ftc=True))
"""

from .control import PIGains, SCRUBBER_PI, TransientSpec, pi_step, transient_metrics
from .ftc import FaultProfile, apply_sensor_fault, compensate
from .lti import SimulationError, dc_gain, integrate_step
from .model import (
    SCRUBBER_PARAMS,
    FirstOrderTF,
    PhysicalPlantParams,
    StateSpace,
    plant_state_space,
    reference_elements,
    physical_elements,
)
from .observer import (
    DEFAULT_OBSERVER_POLES,
    ObserverDesignError,
    design_observer,
    place_observer_poles,
    reference_design,
)
from .simulation import Scenario, ScenarioError, Trace, preset_scenario, run_pair, run_scenario

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_OBSERVER_POLES", "FaultProfile", "FirstOrderTF", "ObserverDesignError",
    "PIGains", "PhysicalPlantParams", "SCRUBBER_PARAMS", "SCRUBBER_PI", "Scenario",
    "ScenarioError", "SimulationError", "StateSpace", "Trace", "TransientSpec",
    "apply_sensor_fault", "compensate", "dc_gain", "design_observer", "integrate_step",
    "physical_elements", "pi_step", "place_observer_poles", "plant_state_space",
    "preset_scenario", "reference_design", "reference_elements", "run_pair",
    "run_scenario", "transient_metrics",
]
