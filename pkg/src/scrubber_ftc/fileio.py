"""Scenario files and trace CSV serialisation.

Scenario files are INI-style with four sections.  Units per key::

    [loop]
    duration      s         run length
    dt            s         controller / integrator step
    setpoint      s:psi     comma-separated time:value breakpoints
    ftc           bool      compensate the fed-back measurement
    kp            -         proportional gain
    ti            s         integral time
    td            s         derivative time              (optional, 0)
    output_clamp  -         "min,max" on u or "none"      (optional, none)
    name          -         label                         (optional)

    [fault]
    kind          -         none | sensitivity | bias
    alpha         fraction  remaining sensitivity         (sensitivity only)
    value         psi       additive offset               (bias only)
    onset_step    steps     first faulty iteration        (not for none)
    output        index     faulty output, 0 = pressure   (optional, 0)

    [model]                                               (optional section)
    source        -         paper_matrices | physical_params (optional)
    V d H A rho_i rho_o h_i h_o g k p_o gamma_l gamma_g
                            physical parameters; V..p_o required for
                            physical_params, A/g/gamma_* optional

    [observer]
    poles         1/s       five comma-separated (complex) poles
"""

import configparser
import re
from dataclasses import fields
from decimal import Decimal
from pathlib import Path

import numpy as np

from .control import PIGains
from .ftc import FaultProfile, fault_problems
from .model import SCRUBBER_PARAMS, PhysicalPlantParams
from .simulation import CSV_COLUMNS, NO_FAULT, Scenario, ScenarioError, Trace

PRESET_DIR = Path(__file__).parent / "presets"

_ALLOWED = {
    "loop": {"duration", "dt", "setpoint", "ftc", "kp", "ti", "td", "output_clamp", "name"},
    "fault": {"kind", "alpha", "value", "onset_step", "output"},
    "model": {"source"} | {f.name for f in fields(PhysicalPlantParams)},
    "observer": {"poles"},
}
_PHYSICAL_REQUIRED = ("V", "d", "H", "rho_i", "rho_o", "h_i", "h_o", "k", "p_o")
_BOOLS = {"true": True, "yes": True, "on": True, "1": True,
          "false": False, "no": False, "off": False, "0": False}


def _key_lines(text):
    """Map ``(section, key)`` to its 1-based line number."""
    where = {}
    section = None
    for i, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            continue
        m = re.match(r"\s*([^#;=\s][^=]*?)\s*=", line)
        if m and section is not None:
            where[(section, m.group(1))] = i
    return where


class _Reader:
    """Collects every conversion / presence problem instead of stopping at the first."""

    def __init__(self, cp, lines):
        self.cp = cp
        self.lines = lines
        self.problems = []

    def _where(self, section, key):
        line = self.lines.get((section, key))
        return f"line {line}: [{section}] {key}" if line else f"[{section}] {key}"

    def has(self, section, key):
        return self.cp.has_option(section, key)

    def get(self, section, key, convert, required=True, default=None):
        if not self.has(section, key):
            if required:
                self.problems.append(f"[{section}] {key}: required key missing")
            return default
        raw = self.cp.get(section, key)
        try:
            return convert(raw)
        except (ValueError, TypeError) as exc:
            self.problems.append(f"{self._where(section, key)}: cannot parse {raw!r} ({exc})")
            return default


def _float(raw):
    return float(raw)


def _int(raw):
    return int(raw)


def _bool(raw):
    try:
        return _BOOLS[raw.strip().lower()]
    except KeyError:
        raise ValueError("expected true/false") from None


def _setpoints(raw):
    pairs = []
    for item in raw.split(","):
        t, sep, v = item.partition(":")
        if not sep:
            raise ValueError("expected time:value pairs")
        pairs.append((float(t), float(v)))
    return tuple(pairs)


def _clamp(raw):
    if raw.strip().lower() == "none":
        return None
    lo, hi = raw.split(",")
    return (float(lo), float(hi))


def _poles(raw):
    return tuple(complex(p.strip().replace(" ", "")) for p in raw.split(","))


def parse_scenario_text(text, source="<string>"):
    """Parse scenario text; raises :class:`ScenarioError` listing all problems."""
    cp = configparser.ConfigParser(
        inline_comment_prefixes=("#", ";"), comment_prefixes=("#", ";"),
        interpolation=None,
    )
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ScenarioError([f"{source}: {exc}".replace("\n", " ")]) from None

    lines = _key_lines(text)
    problems = []
    for section in cp.sections():
        if section not in _ALLOWED:
            problems.append(f"unknown section [{section}]")
            continue
        for key in cp.options(section):
            if key not in _ALLOWED[section]:
                where = lines.get((section, key))
                prefix = f"line {where}: " if where else ""
                problems.append(f"{prefix}[{section}] unknown key {key!r}")
    for section in ("loop", "fault", "observer"):
        if not cp.has_section(section):
            problems.append(f"missing section [{section}]")
            cp.add_section(section)
    if not cp.has_section("model"):
        cp.add_section("model")

    rd = _Reader(cp, lines)
    duration = rd.get("loop", "duration", _float)
    dt = rd.get("loop", "dt", _float)
    setpoints = rd.get("loop", "setpoint", _setpoints)
    ftc = rd.get("loop", "ftc", _bool)
    kp = rd.get("loop", "kp", _float)
    ti = rd.get("loop", "ti", _float)
    td = rd.get("loop", "td", _float, required=False, default=0.0)
    clamp = rd.get("loop", "output_clamp", _clamp, required=False, default=None)
    name = rd.get("loop", "name", str, required=False, default="")

    kind = rd.get("fault", "kind", lambda s: s.strip().lower())
    alpha = rd.get("fault", "alpha", _float, required=(kind == "sensitivity"), default=1.0)
    value = rd.get("fault", "value", _float, required=(kind == "bias"), default=0.0)
    onset = rd.get("fault", "onset_step", _int,
                   required=(kind not in (None, "none")), default=0)
    output = rd.get("fault", "output", _int, required=False, default=0)

    source_kind = rd.get("model", "source", lambda s: s.strip(), required=False,
                         default="paper_matrices")
    physical = source_kind == "physical_params"
    pvals = {}
    for f in fields(PhysicalPlantParams):
        if rd.has("model", f.name) or (physical and f.name in _PHYSICAL_REQUIRED):
            pvals[f.name] = rd.get("model", f.name, _float)

    poles = rd.get("observer", "poles", _poles)
    problems += rd.problems

    fault = NO_FAULT
    if kind is not None and onset is not None:
        fp = fault_problems(kind, alpha, value, onset, output)
        if fp:
            problems += [f"[fault] {p}" for p in fp]
        else:
            fault = FaultProfile(kind, alpha, value, onset, output)

    gains = None
    if kp is not None and ti is not None:
        try:
            gains = PIGains(kp, ti, td)
        except ValueError as exc:
            problems.append(f"[loop] {exc}")

    params = SCRUBBER_PARAMS
    if pvals and None not in pvals.values():
        try:
            params = PhysicalPlantParams(**pvals)
        except (TypeError, ValueError) as exc:
            problems.append(f"[model] {exc}")

    # Build even when some pieces failed, substituting defaults for those, so
    # the cross-field checks still report (already-listed gaps stay listed).
    given = dict(duration=duration, dt=dt, setpoint_profile=setpoints, ftc_enabled=ftc,
                 gains=gains, observer_poles=poles)
    complete = None not in given.values()
    scenario = None
    try:
        scenario = Scenario(
            fault=fault, model_source=source_kind, output_clamp=clamp,
            plant_params=params, name=name,
            **{k: v for k, v in given.items() if v is not None},
        )
    except ScenarioError as exc:
        problems += exc.problems
    if problems or not complete:
        raise ScenarioError([f"{source}: {p}" for p in problems])
    return scenario


def parse_scenario(path):
    """Read and validate a scenario file."""
    path = Path(path)
    return parse_scenario_text(path.read_text(), source=str(path))


def resolve_scenario_path(arg):
    """``arg`` itself if it exists, else the shipped preset with the same stem."""
    path = Path(arg)
    if path.exists():
        return path
    candidate = PRESET_DIR / f"{path.stem}.cfg"
    if candidate.exists():
        return candidate
    raise FileNotFoundError(f"no scenario file {arg!r} and no preset named {path.stem!r}")


def list_presets():
    return sorted(p.stem for p in PRESET_DIR.glob("*.cfg"))


def _fmt_pole(p):
    p = complex(p)
    return repr(p.real) if p.imag == 0 else repr(p)


def format_scenario(s: Scenario):
    """Serialise a scenario; ``parse_scenario_text`` inverts it exactly."""
    out = ["[loop]"]
    out.append(f"duration = {s.duration!r}")
    out.append(f"dt = {s.dt!r}")
    out.append("setpoint = " + ", ".join(f"{t!r}:{v!r}" for t, v in s.setpoint_profile))
    out.append(f"ftc = {'true' if s.ftc_enabled else 'false'}")
    out.append(f"kp = {s.gains.K_p!r}")
    out.append(f"ti = {s.gains.T_i!r}")
    out.append(f"td = {s.gains.T_d!r}")
    clamp = "none" if s.output_clamp is None else f"{s.output_clamp[0]!r},{s.output_clamp[1]!r}"
    out.append(f"output_clamp = {clamp}")
    if s.name:
        out.append(f"name = {s.name}")

    f = s.fault
    out += ["", "[fault]", f"kind = {f.kind}"]
    if f.kind == "sensitivity":
        out.append(f"alpha = {f.alpha!r}")
    if f.kind == "bias":
        out.append(f"value = {f.value!r}")
    if f.kind != "none":
        out.append(f"onset_step = {f.onset_step}")
    out.append(f"output = {f.output}")

    out += ["", "[model]", f"source = {s.model_source}"]
    if s.model_source == "physical_params" or s.plant_params != SCRUBBER_PARAMS:
        for fld in fields(PhysicalPlantParams):
            v = getattr(s.plant_params, fld.name)
            if v is not None:
                out.append(f"{fld.name} = {v!r}")

    out += ["", "[observer]", "poles = " + ", ".join(_fmt_pole(p) for p in s.observer_poles)]
    return "\n".join(out) + "\n"


def write_scenario(scenario, path):
    Path(path).write_text(format_scenario(scenario))


_SIG_DIGITS = 9


def _num(x):
    """Positional decimal, exact round trip, padded to 9 significant digits."""
    d = Decimal(repr(float(x)))
    if d == 0:
        return "0." + "0" * (_SIG_DIGITS - 1)
    if len(d.as_tuple().digits) < _SIG_DIGITS:
        d = d.quantize(Decimal(1).scaleb(d.adjusted() - _SIG_DIGITS + 1))
    return format(d, "f")


def write_trace_csv(trace: Trace, path):
    """Write the trace columns as CSV in plain positional notation.

    Each value is the shortest decimal string that reads back to the same
    double, zero-padded to at least nine significant digits, so files are
    byte-identical for identical traces.
    """
    data = trace.as_array()
    if not np.all(np.isfinite(data)):
        raise ValueError("trace contains non-finite values")
    rows = [",".join(CSV_COLUMNS)]
    for row in data.tolist():
        rows.append(",".join(_num(v) for v in row))
    Path(path).write_text("\n".join(rows) + "\n")


def read_trace_csv(path) -> Trace:
    """Load a CSV written by :func:`write_trace_csv`."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header in {path}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    cols = {name: data[:, i].copy() for i, name in enumerate(CSV_COLUMNS)}
    return Trace(**cols, metadata={"source_csv": str(path)})

