"""
Open-loop steady states and trace files
=======================================

Plant data for the open-loop comparison lists measured and simulated
pressures but not the valve signals, so the inputs are back-solved through
the DC gain.  The second half writes a run to CSV and reads it back.
"""

import tempfile
from pathlib import Path

from scrubber_ftc.fileio import read_trace_csv, write_trace_csv
from scrubber_ftc.lti import dc_gain
from scrubber_ftc.model import plant_state_space, reference_elements
from scrubber_ftc.report import steady_state_error
from scrubber_ftc.simulation import (
    OPEN_LOOP_REFERENCE,
    open_loop_table,
    percent_error,
    preset_scenario,
    run_scenario,
)

ss = plant_state_space(*reference_elements())
gain = dc_gain(ss.A, ss.B, ss.C)[0, 0]
inputs = [sim / gain for _, sim, _ in OPEN_LOOP_REFERENCE]
rows = open_loop_table(inputs, ss, reference=[real for real, _, _ in OPEN_LOOP_REFERENCE])

print("    real   listed   listed%   recomputed%   u (mA)   model p")
for (real, sim, err), (u, p, _, _) in zip(OPEN_LOOP_REFERENCE, rows):
    print(f"{real:8.3f} {sim:8.1f} {err:9.2f} {percent_error(real, sim):13.2f} {u:8.4f} {p:9.3f}")

trace = run_scenario(preset_scenario("sens85", duration=5.0))
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "sens85.csv"
    write_trace_csv(trace, path)
    print(f"\nwrote {len(trace)} rows, {path.stat().st_size / 1e6:.1f} MB")
    print(path.read_text().splitlines()[0])
    back = read_trace_csv(path)
    print("steady-state error from the file:", steady_state_error(back))
    print("same as in memory:", steady_state_error(back) == steady_state_error(trace))
