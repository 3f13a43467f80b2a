import math

import numpy as np
import pytest

from oqs.model import BathSpec, spin_boson_system

PLUS = np.full((2, 2), 0.5, dtype=complex)


def dephasing_exponent(bath: BathSpec, t: float) -> float:
    """Decay exponent of the spin coherence for sigma_z coupling (independent-boson model)."""
    return float(sum(2 * c * c / w**3 * (1 - math.cos(w * t)) / math.tanh(bath.beta * w / 2)
                     for w, c in bath.modes))


def sigma_x_exact(epsilon: float, bath: BathSpec, t: float) -> float:
    return math.cos(2 * epsilon * t) * math.exp(-dephasing_exponent(bath, t))


@pytest.fixture
def bath1():
    return BathSpec(((1.0, 0.2),), 2.0)


@pytest.fixture
def sys_z():
    return spin_boson_system(1.0, 0.0, "sigma_z")


@pytest.fixture
def sys_x():
    return spin_boson_system(1.0, 0.0, "sigma_x", rho_s=PLUS)


@pytest.fixture
def sys_mixed():
    # non-commuting H_s and W_s so that every order contributes
    return spin_boson_system(0.6, 0.8, "sigma_x", rho_s=PLUS)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one pass/fail line for the acceptance summary; returns the verdict."""
    def emit(label: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        return ok
    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
