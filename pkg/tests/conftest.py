import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from meridian_kit.domain import Cap, Disk, Point, make_domain  # noqa: E402
from meridian_kit.experiments import build_three_puncture_domain, build_four_component_domain  # noqa: E402
from meridian_kit.metric import solve_density  # noqa: E402


def annulus(r):
    return make_domain([Disk(0j, r), Cap(1.0)])


@pytest.fixture(scope="session")
def annulus_quarter():
    dom = annulus(0.25)
    return dom, solve_density(dom)


@pytest.fixture(scope="session")
def punctured_disk():
    dom = make_domain([Point(0j), Cap(1.0)])
    return dom, solve_density(dom)


@pytest.fixture(scope="session")
def disk_domain():
    # the unit disk alone: the cap is the whole complement
    dom = make_domain([Cap(1.0)])
    return dom, solve_density(dom, h=1 / 64)


@pytest.fixture(scope="session")
def four_component():
    dom = build_four_component_domain()
    return dom, solve_density(dom)


@pytest.fixture(scope="session")
def three_puncture_coarse():
    dom = build_three_puncture_domain(0.1)
    return dom, solve_density(dom)


# verdict lines of the acceptance suite, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
