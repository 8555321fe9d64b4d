import warnings

import pytest

from tlrcool.params import SystemParams
from tlrcool.sweep import Model

# temperatures of the cooling-vs-detuning figure, k_B T / (hbar omega_b) at
# omega_b = 4e6 rad/s
T_10MK = 327.3008478174725
T_30MK = 981.9025434524175
T_100MK = 3273.008478174725

ACCEPTANCE_LINES: list[str] = []


def record(criterion: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(autouse=True)
def _quiet_model_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


@pytest.fixture
def reference_point():
    """Variance-vs-detuning parameter set, kappa = omega_b."""
    return Model()


@pytest.fixture
def cooling_point():
    """Cooling parameter set at 10 mK."""
    return Model(params=SystemParams(kappa=0.1, temperature=T_10MK))
