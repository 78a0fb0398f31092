"""Command-line entry point.

Exit codes: 0 success, 1 validation / usage error, 2 runtime error.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import fileio
from .lti import SimulationError, dc_gain
from .model import constant_discrepancy
from .observer import (
    DEFAULT_OBSERVER_POLES,
    ObserverDesignError,
    design_observer,
    observability_rank,
    printed_gain_report,
)
from .report import build_report, format_report
from .simulation import (
    MODEL_SOURCES,
    OPEN_LOOP_REFERENCE,
    Scenario,
    ScenarioError,
    open_loop_table,
    percent_error,
    run_scenario,
)

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _matrix(name, M):
    rows = [" ".join(f"{v + 0.0:>12.6g}" for v in row) for row in np.atleast_2d(M)]
    return f"{name} =\n  " + "\n  ".join(rows)


def _pole(p):
    p = complex(p)
    if abs(p.imag) < 1e-12:
        return f"{p.real:.6f}"
    return f"{p.real:.6f} {'+' if p.imag >= 0 else '-'} {abs(p.imag):.6f}i"


def cmd_run(args):
    path = fileio.resolve_scenario_path(args.scenario)
    scenario = fileio.parse_scenario(path)
    if not scenario.name:
        scenario = replace(scenario, name=path.stem)
    trace = run_scenario(scenario)
    counterpart = run_scenario(replace(scenario, ftc_enabled=not scenario.ftc_enabled))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    on, off = (trace, counterpart) if scenario.ftc_enabled else (counterpart, trace)
    fileio.write_trace_csv(on, out / f"{scenario.name}.ftc_on.csv")
    fileio.write_trace_csv(off, out / f"{scenario.name}.ftc_off.csv")

    report = build_report(scenario, trace, counterpart)
    text = format_report(report, machine=args.machine)
    (out / f"{scenario.name}.report.txt").write_text(text)
    print(text, end="")
    print(f"\nwrote {out}/{scenario.name}.{{ftc_on.csv,ftc_off.csv,report.txt}}")
    return EXIT_OK


def cmd_presets(args):
    for name in fileio.list_presets():
        s = fileio.parse_scenario(fileio.PRESET_DIR / f"{name}.cfg")
        fault = s.fault.kind if s.fault.kind != "sensitivity" else f"sensitivity {s.fault.alpha:g}"
        print(f"{name:<16} {fault:<18} FTC {'on ' if s.ftc_enabled else 'off'}  "
              f"{s.duration:g} s @ dt {s.dt:g}")
    return EXIT_OK


def cmd_design(args):
    scenario = Scenario(model_source=args.model)
    ss = scenario.state_space()
    design = design_observer(ss, None, DEFAULT_OBSERVER_POLES)
    rank, observable = observability_rank(design.A_g, design.C_g)

    print(f"Plant model ({args.model})")
    for name, tab, phys, rel in constant_discrepancy():
        print(f"  {name:<6} tabulated {tab:>12.6g}   physical {phys:>12.6g}   diff {rel:>8.3%}")
    print(_matrix("A_g", design.A_g))
    print(_matrix("B_g", design.B_g))
    print(_matrix("C_g", design.C_g))
    print(f"pressure DC gain {dc_gain(ss.A, ss.B, ss.C)[0, 0]:.6g}")
    print(f"observability rank {rank} ({'observable' if observable else 'NOT observable'})")
    print(_matrix("L = [L_x; L_f]", design.L))
    print("achieved observer poles:")
    achieved = sorted(design.achieved_poles(), key=lambda p: (p.real, p.imag))
    for p in achieved:
        print(f"  {_pole(p)}")

    spec, matches, err = printed_gain_report()
    print("printed 2x5 gain, read as L^T, gives poles:")
    for p in sorted(spec, key=lambda p: (p.real, p.imag)):
        print(f"  {_pole(p)}")
    print(f"  -> {'matches' if matches else 'does NOT match'} the target list "
          f"(worst relative miss {err:.3g})")
    return EXIT_OK


def cmd_table3(args):
    scenario = Scenario(model_source=args.model)
    ss = scenario.state_space()
    gain = dc_gain(ss.A, ss.B, ss.C)[0, 0]
    inputs = [sim / gain for _, sim, _ in OPEN_LOOP_REFERENCE]
    real = [r for r, _, _ in OPEN_LOOP_REFERENCE]
    rows = open_loop_table(inputs, ss, reference=real)

    print("Open-loop steady pressure vs plant data (psi)")
    print("Inputs are back-solved from the published simulated pressures "
          f"(u = p_sim / DC gain, DC gain {gain:.6g}); the original inputs are not available.")
    print(f"{'real':>10} {'pub. sim':>10} {'pub. err%':>10} {'recomp.%':>10} "
          f"{'u':>10} {'model p':>10} {'model err%':>10}")
    for (r, sim, err), (u, p, _, e) in zip(OPEN_LOOP_REFERENCE, rows):
        print(f"{r:>10.3f} {sim:>10.1f} {err:>10.2f} {percent_error(r, sim):>10.2f} "
              f"{u:>10.4f} {p:>10.3f} {e:>10.2f}")
    return EXIT_OK


def build_parser():
    p = _Parser(prog="scrubber-ftc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    run = sub.add_parser("run", help="simulate a scenario, write CSV traces and a report")
    run.add_argument("scenario", help="scenario file, or the name of a shipped preset")
    run.add_argument("--out", default="out", help="output directory (default: ./out)")
    run.add_argument("--machine", action="store_true", help="key=value report")
    run.set_defaults(func=cmd_run)

    pre = sub.add_parser("presets", help="list shipped scenarios")
    pre.set_defaults(func=cmd_presets)

    des = sub.add_parser("design", help="print model matrices and observer design")
    des.add_argument("--model", choices=MODEL_SOURCES, default="paper_matrices")
    des.set_defaults(func=cmd_design)

    tab = sub.add_parser("table3", help="open-loop steady-state comparison table")
    tab.add_argument("--model", choices=MODEL_SOURCES, default="paper_matrices")
    tab.set_defaults(func=cmd_table3)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_VALIDATION

    try:
        return args.func(args)
    except (ScenarioError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SimulationError, ObserverDesignError, np.linalg.LinAlgError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
