import pytest

from specbill.geometry import Circle, two_disk, two_ellipse


@pytest.fixture(scope="session")
def disks():
    return two_disk(1.0, 2.0)


@pytest.fixture(scope="session")
def disks_gap4():
    return two_disk(1.0, 4.0)


@pytest.fixture(scope="session")
def ellipses():
    return two_ellipse(1.5, 1.0, 2.0)


@pytest.fixture(scope="session")
def unit_disk():
    return Circle((0.0, 0.0), 1.0)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
