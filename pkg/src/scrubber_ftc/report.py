"""Run reports built only from trace columns and model constants."""

from dataclasses import asdict, dataclass

import numpy as np

from .control import StepMetrics, measure_step_response
from .model import constant_discrepancy
from .simulation import Scenario, Trace


def steady_state_error(trace: Trace):
    """Relative tracking error ``(y - r) / r`` at the last sample."""
    r = trace.r[-1]
    if r == 0:
        return float(trace.y[-1])
    return float((trace.y[-1] - r) / r)


def divergence_step(a: Trace, b: Trace, epsilon=1e-6):
    """First step at which any column differs by more than ``epsilon``, else None."""
    if len(a) != len(b) or not np.array_equal(a.t, b.t):
        raise ValueError("traces are on different time grids")
    diff = np.abs(a.as_array() - b.as_array()).max(axis=1)
    idx = np.flatnonzero(diff > epsilon)
    return int(idx[0]) if idx.size else None


def observer_convergence_time(trace: Trace, tol=0.01):
    """Time after which ``|f_hat_s - f_s|`` stays within ``tol * max|f_s|``.

    Returns None for a fault-free trace and ``inf`` if it never settles.
    """
    scale = np.max(np.abs(trace.f_s))
    if scale == 0:
        return None
    bad = np.flatnonzero(np.abs(trace.f_hat_s - trace.f_s) > tol * scale)
    if bad.size == 0:
        return float(trace.t[0])
    if bad[-1] == len(trace) - 1:
        return float("inf")
    return float(trace.t[bad[-1] + 1])


def inferred_sensitivity(trace: Trace):
    """``y_m / y`` at the last sample (1.0 when the output is zero)."""
    y = trace.y[-1]
    return float(trace.y_m[-1] / y) if y != 0 else 1.0


@dataclass(frozen=True)
class Comparison:
    steady_error_ftc: float
    steady_error_noftc: float
    divergence_step: int | None
    divergence_time: float | None
    alpha: float
    predicted_ratio: float
    observed_ratio: float
    prediction_error: float


def compare_runs(trace_ftc: Trace, trace_noftc: Trace, epsilon=1e-6, alpha=None):
    """Contrast FTC and PI-only runs of the same scenario.

    With FTC off the integrator drives the *measured* output to the
    reference, so a sensitivity ``alpha`` leaves ``y / r = 1 / alpha``.
    ``alpha`` defaults to the ratio ``y_m / y`` read off the PI-only trace.
    """
    step = divergence_step(trace_ftc, trace_noftc, epsilon)
    if alpha is None:
        alpha = inferred_sensitivity(trace_noftc)
    predicted = 1.0 / alpha
    observed = float(trace_noftc.y[-1] / trace_noftc.r[-1])
    return Comparison(
        steady_error_ftc=steady_state_error(trace_ftc),
        steady_error_noftc=steady_state_error(trace_noftc),
        divergence_step=step,
        divergence_time=None if step is None else float(trace_ftc.t[step]),
        alpha=alpha,
        predicted_ratio=predicted,
        observed_ratio=observed,
        prediction_error=(observed - predicted) / predicted,
    )


@dataclass(frozen=True)
class RunReport:
    scenario: dict
    step: StepMetrics
    steady_error: float
    convergence_time: float | None
    comparison: Comparison
    provenance: tuple

    def numbers(self):
        """Flat ``{key: value}`` of every trace-derived number."""
        out = {f"step.{k}": v for k, v in asdict(self.step).items()}
        out["steady_error"] = self.steady_error
        out["observer_convergence_time"] = self.convergence_time
        out.update({f"compare.{k}": v for k, v in asdict(self.comparison).items()})
        return out


def build_report(scenario: Scenario, trace: Trace, counterpart: Trace) -> RunReport:
    """Report for ``trace`` (run of ``scenario``) and its FTC-toggled twin."""
    if scenario.ftc_enabled:
        on, off = trace, counterpart
    else:
        on, off = counterpart, trace
    summary = {
        "name": scenario.name,
        "duration_s": scenario.duration,
        "dt_s": scenario.dt,
        "ftc": scenario.ftc_enabled,
        "fault": scenario.fault.kind,
        "alpha": scenario.fault.alpha,
        "bias": scenario.fault.value,
        "onset_step": scenario.fault.onset_step,
        "onset_time_s": scenario.onset_time,
        "model_source": scenario.model_source,
        "K_p": scenario.gains.K_p,
        "T_i": scenario.gains.T_i,
    }
    r_final = float(trace.r[-1])
    step = measure_step_response(trace, r_final) if r_final else StepMetrics(None, None, None, None)
    return RunReport(
        scenario=summary,
        step=step,
        steady_error=steady_state_error(trace),
        convergence_time=observer_convergence_time(trace),
        comparison=compare_runs(on, off),
        provenance=tuple(constant_discrepancy(scenario.plant_params)),
    )


def _v(x):
    if x is None:
        return "n/a"
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def format_report(report: RunReport, machine=False):
    """Plain-text report, or ``key=value`` lines when ``machine`` is set."""
    if machine:
        lines = [f"scenario.{k}={_v(v)}" for k, v in report.scenario.items()]
        lines += [f"{k}={_v(v)}" for k, v in report.numbers().items()]
        for name, tab, phys, rel in report.provenance:
            lines.append(f"provenance.{name}.tabulated={_v(tab)}")
            lines.append(f"provenance.{name}.physical={_v(phys)}")
            lines.append(f"provenance.{name}.rel_diff={_v(rel)}")
        return "\n".join(lines) + "\n"

    s = report.scenario
    c = report.comparison
    st = report.step
    out = [
        f"Scenario {s['name'] or '(unnamed)'}",
        f"  duration {s['duration_s']:g} s, dt {s['dt_s']:g} s, FTC {'on' if s['ftc'] else 'off'}",
        f"  fault {s['fault']} (alpha {s['alpha']:g}, bias {s['bias']:g}) "
        f"at step {s['onset_step']} = {s['onset_time_s']:g} s",
        f"  model {s['model_source']}, K_p {s['K_p']:g}, T_i {s['T_i']:g}",
        "",
        "Step response",
        f"  rise time (10-90%)   {_v(st.rise_time):>14} s",
        f"  peak time            {_v(st.peak_time):>14} s",
        f"  settling time (2%)   {_v(st.settling_time_2pct):>14} s",
        f"  overshoot            {_v(st.overshoot_pct):>14} %",
        "",
        "Tracking",
        f"  steady-state error (this run)   {_v(report.steady_error):>14}",
        f"  steady-state error, FTC on      {_v(c.steady_error_ftc):>14}",
        f"  steady-state error, FTC off     {_v(c.steady_error_noftc):>14}",
        f"  traces diverge at step          {_v(c.divergence_step):>14}",
        f"  PI-only y/r observed            {_v(c.observed_ratio):>14}",
        f"  PI-only y/r predicted (1/alpha) {_v(c.predicted_ratio):>14}",
        f"  observer convergence time       {_v(report.convergence_time):>14} s",
        "",
        "Model constants (tabulated vs physical-parameter route)",
        f"  {'name':<6} {'tabulated':>14} {'physical':>14} {'rel diff':>10}",
    ]
    for name, tab, phys, rel in report.provenance:
        out.append(f"  {name:<6} {tab:>14.6g} {phys:>14.6g} {rel:>10.3%}")
    return "\n".join(out) + "\n"

