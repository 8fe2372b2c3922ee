import numpy as np
import pytest

from hartree_lab.eigen import spectrum_for
from hartree_lab.groundstate import default_grid, solve_ground_state
from hartree_lab.sweep import run_sweep

SWEEP_EPS = (0.3, 0.2, 0.14, 0.1, 0.07, 0.05)

ACCEPTANCE = pytest.StashKey()


@pytest.fixture(scope="session")
def state_n3():
    return solve_ground_state(3, 0.1, default_grid(3, 1.0, 0.1))


@pytest.fixture(scope="session")
def spectrum_n3(state_n3):
    return spectrum_for(state_n3, 2, 4)


@pytest.fixture(scope="session")
def sweep_n3():
    return run_sweep(3, 1.0, SWEEP_EPS)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance(request):
    """Collects one summary line per acceptance criterion."""
    lines = request.config.stash.setdefault(ACCEPTANCE, [])

    def record(number, name, ok, detail=""):
        lines.append(f"criterion {number} {'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
