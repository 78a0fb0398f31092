from functools import lru_cache

import pytest

from scrubber_ftc.ftc import FaultProfile
from scrubber_ftc.simulation import Scenario, preset_scenario, run_scenario

ACCEPTANCE_LINES = []


@lru_cache(maxsize=None)
def preset_trace(name, ftc, duration=60.0):
    return run_scenario(preset_scenario(name, ftc=ftc, duration=duration))


@lru_cache(maxsize=None)
def sensitivity_trace(alpha, ftc, duration=60.0):
    fault = FaultProfile("sensitivity", alpha=alpha, onset_step=100)
    return run_scenario(Scenario(duration=duration, fault=fault, ftc_enabled=ftc))


BIAS = 10.0


@lru_cache(maxsize=None)
def bias_trace(duration=120.0):
    fault = FaultProfile("bias", value=BIAS, onset_step=100)
    return run_scenario(Scenario(duration=duration, fault=fault, ftc_enabled=True))


@pytest.fixture
def record_criterion():
    def record(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f" -- {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
