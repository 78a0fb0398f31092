"""
Building the pressure-loop plant
================================

Two first-order lags in series: the control valve turns a 4-20 mA signal
into gas inflow, the scrubber turns inflow into vessel pressure.
"""

import math

import numpy as np

from scrubber_ftc.lti import dc_gain
from scrubber_ftc.model import (
    SCRUBBER_PARAMS,
    constant_discrepancy,
    linearized_outflow,
    plant_state_space,
    reference_elements,
    scrubber_tf,
    valve_gain,
)

# The canonical constants come straight from the tabulated matrix entries.
plant, valve = reference_elements()
print(f"scrubber: K_s = {plant.gain:.4f}, tau_s = {plant.tau:.4f} s")
print(f"valve:    K_v = {valve.gain:.4f}, tau_v = {valve.tau:.4f} s")

ss = plant_state_space(plant, valve)
print("\nA =\n", ss.A)
print("B =\n", ss.B)
print("eigenvalues:", np.linalg.eigvals(ss.A))

# Steady state: psi of pressure per mA of valve signal.
print("\nDC gain [p; m_dot_i] per unit u:", dc_gain(ss.A, ss.B, ss.C)[:, 0])

# The same constants can be built from vessel data and instrument spans.
print("\nvalve gain from spans:", valve_gain((12, 16), (3, 15), (4, 20)), "mmscfd/mA")
tf = scrubber_tf(SCRUBBER_PARAMS)
print(f"scrubber from vessel data: K_s = {tf.gain:.4f}, tau_s = {tf.tau:.4f} s")

# The two routes disagree on the scrubber; the gap is reported, not hidden.
print("\nname      tabulated     physical   rel diff")
for name, tab, phys, rel in constant_discrepancy():
    print(f"{name:<6} {tab:>12.5g} {phys:>12.5g} {rel:>10.2%}")

# The linear model rests on a first-order expansion of k sqrt(p).
p_o = SCRUBBER_PARAMS.p_o
for p in (0.9 * p_o, p_o, 1.1 * p_o):
    exact = math.sqrt(p)
    approx = linearized_outflow(p, 1.0, p_o)
    print(f"p = {p:8.3f}: sqrt {exact:.5f}, linear {approx:.5f}, gap {approx - exact:+.2e}")
