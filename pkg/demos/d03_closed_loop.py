"""
PI pressure loop without faults
===============================

The loop tracks a step to the operating pressure with some overshoot and
no steady-state error.  Compare the measured metrics with the second-order
formulas.
"""

from scrubber_ftc.control import TransientSpec, measure_step_response, transient_metrics
from scrubber_ftc.report import divergence_step
from scrubber_ftc.simulation import preset_scenario, run_scenario

trace = run_scenario(preset_scenario("baseline", duration=20.0))
m = measure_step_response(trace, trace.r[-1])
print(f"rise time {m.rise_time:.3f} s, peak at {m.peak_time:.3f} s, "
      f"2% settling {m.settling_time_2pct:.3f} s, overshoot {m.overshoot_pct:.2f} %")
print(f"final pressure {trace.y[-1]:.6f} psi for a set-point of {trace.r[-1]} psi")

# A textbook underdamped pair for orientation.
ref = transient_metrics(TransientSpec(zeta=0.5, omega_n=2.0))
print(f"\nzeta 0.5, w_n 2: t_r {ref.rise_time:.4f}, t_p {ref.peak_time:.4f}, "
      f"t_s {ref.settling_time_2pct:.1f}, M_p {ref.overshoot_pct:.2f} %")

# Without a fault the compensation path has nothing to remove.
off = run_scenario(preset_scenario("baseline", ftc=False, duration=20.0))
print("\nFTC on vs off, fault-free: first differing step =", divergence_step(trace, off, 1e-9))
print(f"largest fault estimate {abs(trace.f_hat_s).max():.2e} psi")
