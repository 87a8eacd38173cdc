import pytest

from dsthin import diffsets as dsm
from dsthin import geometry as geo
from dsthin.pattern import ElementPattern

import acceptance_log


def pytest_terminal_summary(terminalreporter):
    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def iso():
    return ElementPattern.isotropic()


@pytest.fixture(scope="session")
def cosine():
    return ElementPattern.cosine()


@pytest.fixture(scope="session")
def skew_cell():
    return geo.make_unit_cell(0.5, 0.0, 0.1, 0.5)


@pytest.fixture(scope="session")
def square_cell():
    return geo.make_unit_cell(0.5, 0.0, 0.0, 0.5)


@pytest.fixture(scope="session")
def tp143():
    return dsm.twin_prime(11, 13)


@pytest.fixture(scope="session")
def tp323():
    return dsm.twin_prime(17, 19)


@pytest.fixture(scope="session")
def singer1023():
    return dsm.crt_fold(dsm.singer_lfsr(10), 31, 33)
