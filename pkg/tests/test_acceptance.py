"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -s`` to see the lines inline; they are
also collected into a summary section at the end of any pytest run.
"""

import time
from dataclasses import replace

import numpy as np

from oracles import (
    PRINTED_GAIN_POLES,
    TABLE_A,
    TABLE_C,
    observability_rank_exact,
    printed_gain_roots,
)
from scrubber_ftc.control import TransientSpec, measure_step_response, transient_metrics
from scrubber_ftc.ftc import FaultProfile
from scrubber_ftc.lti import dc_gain
from scrubber_ftc.model import plant_state_space, reference_elements
from scrubber_ftc.observer import (
    AUGMENTED_A,
    AUGMENTED_B,
    AUGMENTED_C,
    DEFAULT_OBSERVER_POLES,
    augment,
    build_observer_matrices,
    observability_rank,
    place_observer_poles,
    printed_gain_report,
)
from scrubber_ftc.simulation import (
    OPEN_LOOP_REFERENCE,
    Scenario,
    percent_error,
    preset_scenario,
    run_scenario,
    simulate_open_loop,
)
from test_control import second_order_trace


def timed(scenario):
    t0 = time.perf_counter()
    trace = run_scenario(scenario)
    return trace, time.perf_counter() - t0


def rel_tracking_error(trace):
    return abs(trace.y[-1] - trace.r[-1]) / abs(trace.r[-1])


def final_state(trace):
    return np.array([trace.p[-1], trace.m_dot_i[-1], trace.xi1[-1], trace.xi2[-1],
                     trace.xhat_p[-1], trace.xhat_m[-1], trace.xi1_hat[-1],
                     trace.xi2_hat[-1], trace.f_hat_s[-1]])


def test_criterion_1_matrix_reconstruction(record_criterion):
    t0 = time.perf_counter()
    aug = augment(plant_state_space(*reference_elements()), np.eye(2))
    A_g, B_g, C_g = build_observer_matrices(aug)
    elapsed = time.perf_counter() - t0
    err = max(np.max(np.abs(A_g - AUGMENTED_A)), np.max(np.abs(B_g - AUGMENTED_B)),
              np.max(np.abs(C_g - AUGMENTED_C)))
    ok = err <= 1e-4 and elapsed < 0.1
    record_criterion("1 matrix reconstruction", ok,
                     f"max entry error {err:.2e} (tol 1e-4), {elapsed * 1e3:.1f} ms")
    assert ok


def test_criterion_2_pole_placement(record_criterion):
    L = place_observer_poles(AUGMENTED_A, AUGMENTED_C, DEFAULT_OBSERVER_POLES)
    key = lambda p: (round(p.real, 9), p.imag)
    got = sorted(np.linalg.eigvals(AUGMENTED_A - L @ AUGMENTED_C), key=key)
    want = sorted(np.asarray(DEFAULT_OBSERVER_POLES, dtype=complex), key=key)
    worst = max(abs(g - w) / abs(w) for g, w in zip(got, want))
    rank, observable = observability_rank(AUGMENTED_A, AUGMENTED_C)
    exact = observability_rank_exact(TABLE_A, TABLE_C)

    # printed gain: oracle outcome is recorded, a mismatch is acceptable
    oracle = sorted(printed_gain_roots(), key=key)
    fixture_ok = all(abs(a - b) < 1e-6 for a, b in zip(oracle, sorted(PRINTED_GAIN_POLES, key=key)))
    spec, matches, miss = printed_gain_report()
    library_ok = all(abs(a - b) < 1e-6 for a, b in zip(sorted(spec, key=key), oracle))

    ok = worst < 1e-6 and rank == 5 and observable and exact == 5 and fixture_ok and library_ok
    record_criterion(
        "2 pole placement", ok,
        f"worst relative pole error {worst:.1e} (tol 1e-6), rank {rank} (exact {exact}); "
        f"printed gain recorded as {'MATCH' if matches else 'MISMATCH'} "
        f"(worst relative miss {miss:.2f})",
    )
    assert ok


def test_criterion_3_closed_loop_tracking(record_criterion):
    trace, elapsed = timed(preset_scenario("baseline", duration=20.0))
    step = measure_step_response(trace, trace.r[-1])
    settled = trace.t >= step.settling_time_2pct
    err = np.max(np.abs(trace.y[settled] - trace.r[settled]) / trace.r[-1])
    final = rel_tracking_error(trace)
    tail = np.max(np.abs(trace.y[trace.t >= 10.0] - trace.r[-1]) / trace.r[-1])
    ok = (final < 5e-3 and tail < 5e-3 and np.isfinite(step.overshoot_pct)
          and step.overshoot_pct > 0 and elapsed < 5.0)
    record_criterion(
        "3 closed-loop tracking", ok,
        f"final |y-r|/r {final:.1e}, max over t>=10 s {tail:.1e} (tol 5e-3); "
        f"overshoot {step.overshoot_pct:.2f} %, 2 % settling {step.settling_time_2pct:.3f} s "
        f"(max error after it {err:.2%}); {elapsed:.2f} s",
    )
    assert ok


def test_criterion_4_ftc_vs_pi_only(record_criterion):
    lines, ok = [], True
    offsets = {}
    for alpha in (0.85, 0.70):
        fault = FaultProfile("sensitivity", alpha=alpha, onset_step=100)
        on, t_on = timed(Scenario(fault=fault, ftc_enabled=True))
        off, t_off = timed(Scenario(fault=fault, ftc_enabled=False))
        e_on = rel_tracking_error(on)
        ratio = off.y[-1] / off.r[-1]
        ratio_err = abs(ratio * alpha - 1)
        offsets[alpha] = abs(ratio - 1)
        this = e_on < 0.01 and ratio_err < 5e-3 and t_on < 10 and t_off < 10
        ok &= this
        lines.append(f"alpha {alpha}: FTC on |y-r|/r {e_on:.1e}, FTC off y/r {ratio:.6f} "
                     f"vs 1/alpha {1 / alpha:.6f}, runs {t_on:.1f}/{t_off:.1f} s")
    fault = FaultProfile("sensitivity", alpha=0.95, onset_step=100)
    offsets[0.95] = abs(run_scenario(Scenario(fault=fault, ftc_enabled=False)).y[-1] / 348.091 - 1)
    monotone = offsets[0.95] < offsets[0.85] < offsets[0.70]
    ok &= monotone
    lines.append("PI-only error over alpha 0.95/0.85/0.70: "
                 + " < ".join(f"{offsets[a]:.4f}" for a in (0.95, 0.85, 0.70))
                 + ("" if monotone else " NOT monotone"))
    record_criterion("4 FTC vs PI-only", ok, "; ".join(lines))
    assert ok


def test_criterion_5_fault_estimate_convergence(record_criterion):
    F = 10.0
    trace, elapsed = timed(Scenario(duration=120.0, fault=FaultProfile("bias", value=F, onset_step=100)))
    f_err = abs(trace.f_hat_s[-1] - F) / abs(F)
    res = np.linalg.norm(trace.residual(), axis=1)
    ratio = res[-1] / res.max()
    ok = f_err < 1e-3 and ratio < 1e-6 and elapsed < 10
    record_criterion(
        "5 fault-estimate convergence", ok,
        f"|f_hat-F|/|F| {f_err:.1e} (tol 1e-3), residual end/peak {ratio:.1e} (tol 1e-6), "
        f"peak {res.max():.2e} at t={trace.t[res.argmax()]:.3f} s; {elapsed:.1f} s",
    )
    assert ok


def test_criterion_6_numerical_hygiene(record_criterion):
    worst = 0.0
    for name in ("baseline", "sens85"):
        coarse = run_scenario(preset_scenario(name))
        s = preset_scenario(name, dt=5e-4)
        if s.fault.kind != "none":
            # same onset time, twice the steps
            s = replace(s, fault=replace(s.fault, onset_step=2 * s.fault.onset_step))
        fine = run_scenario(s)
        a, b = final_state(coarse), final_state(fine)
        worst = max(worst, np.linalg.norm(a - b) / np.linalg.norm(a))

    on = run_scenario(preset_scenario("baseline", ftc=True))
    off = run_scenario(preset_scenario("baseline", ftc=False))
    agree = np.max(np.abs(on.as_array() - off.as_array()))

    zero = run_scenario(Scenario(setpoint_profile=((0.0, 0.0),)))
    zero_max = np.max(np.abs(zero.as_array()[:, 1:]))

    ok = worst < 1e-6 and agree < 1e-9 and zero_max == 0.0
    record_criterion(
        "6 numerical hygiene", ok,
        f"dt-halving final-state change {worst:.1e} (tol 1e-6), FTC on/off fault-free "
        f"max diff {agree:.1e} (tol 1e-9), zero-input max |signal| {zero_max}",
    )
    assert ok


def test_criterion_7_open_loop_substitute(record_criterion):
    ss = plant_state_space(*reference_elements())
    gain = dc_gain(ss.A, ss.B, ss.C)[:, 0]
    slowest = 1 / np.min(np.abs(np.linalg.eigvals(ss.A).real))
    worst = 0.0
    for _, sim, _ in OPEN_LOOP_REFERENCE:
        u = sim / gain[0]
        y = simulate_open_loop(ss, u, duration=20 * slowest)
        worst = max(worst, np.max(np.abs(y - gain * u) / np.abs(gain * u)))
    rows_ok = [round(percent_error(real, sim), 2) == printed for real, sim, printed in OPEN_LOOP_REFERENCE]
    first = percent_error(346.113, 349.6)
    ok = worst < 1e-3 and all(rows_ok) and round(first, 2) == 1.01
    record_criterion(
        "7 open-loop substitute", ok,
        f"dc gain vs long run worst {worst:.1e} (tol 1e-3); percent-error rows "
        f"reproduced {sum(rows_ok)}/{len(rows_ok)} (346.113 vs 349.6 -> {first:.2f} %)",
    )
    assert ok


def test_criterion_8_transient_formulas(record_criterion):
    m = transient_metrics(TransientSpec(0.5, 2.0))
    # overshoot compared as a fraction (0.1630); the 1e-3 tolerance applies to
    # the same scale as the times
    got = dict(rise_time=m.rise_time, peak_time=m.peak_time,
               settling_time_2pct=m.settling_time_2pct, overshoot=m.overshoot_pct / 100)
    hand = dict(rise_time=1.2092, peak_time=1.8138, settling_time_2pct=4.0, overshoot=0.1630)
    worst = max(abs(got[k] - v) for k, v in hand.items())
    measured = measure_step_response(second_order_trace(0.5, 2.0), 1.0)
    gap = abs(measured.overshoot_pct - m.overshoot_pct)
    ok = worst < 1e-3 and gap < 1.0
    record_criterion(
        "8 transient formulas", ok,
        f"closed-form worst deviation {worst:.1e} (tol 1e-3); simulated M_p "
        f"{measured.overshoot_pct:.3f} % vs analytic {m.overshoot_pct:.3f} % (tol 1 % abs)",
    )
    assert ok
