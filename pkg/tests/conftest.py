import pytest

from vertexlogic.engine import AVAILABLE_BACKENDS
from vertexlogic.segment import MembraneConstants, SegmentGeometry, derive_electrical

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def mc():
    return MembraneConstants()


@pytest.fixture(scope="session")
def seg(mc):
    return derive_electrical(SegmentGeometry(), mc)


@pytest.fixture(params=AVAILABLE_BACKENDS)
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
