import warnings

import pytest

from ionkick import fastgate

ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture(scope="session")
def trap():
    return fastgate.TrapConfig()


@pytest.fixture(scope="session")
def solved(trap):
    """Fastest solved GZC/FRAG sequence for n = 1..8, keyed by (scheme, n)."""
    out = {}
    for scheme in ("GZC", "FRAG"):
        for n in range(1, 9):
            out[scheme, n] = fastgate.solve_timings(scheme, n, trap)
    return out


@pytest.fixture
def record():
    """Store one acceptance verdict; printed again in the terminal summary."""

    def _record(number: int, title: str, passed: bool, detail: str):
        ACCEPTANCE[number] = (title, bool(passed), detail)
        print(f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(
            f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}")


def pytest_configure(config):
    warnings.filterwarnings("ignore", category=fastgate.GridCollisionWarning)
