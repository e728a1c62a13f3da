import itertools

import pytest

ACCEPTANCE_LINES = []


def record_criterion(number, name, passed, detail=""):
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {name}"
    if detail:
        line += f": {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def parameter_grid():
    """(n, ell, mu, nu2) over the standard grid with delta >= 0."""
    out = []
    for n, ell, mu in itertools.product((1, 2, 3), (-2 / 3, -0.5, 0.0, 1.0), (0.0, 1.0, 2.0, 3.0)):
        for nu2 in sorted({0.0, (mu - 1.0) ** 2 / 4.0}):
            out.append((n, ell, mu, nu2))
    return out


@pytest.fixture
def acceptance():
    return record_criterion
