import pytest

from jsdiff import builders, fixtures


@pytest.fixture(scope="session")
def tpt8():
    return fixtures.load("tpt8")


@pytest.fixture(scope="session")
def tpt4():
    return fixtures.load("tpt4")


@pytest.fixture(scope="session")
def ga42():
    s, c = builders.grid_annulus(4, 2)
    return s, s.family(["core"])


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for cid in sorted(RESULTS, key=lambda c: int(c[1:])):
            terminalreporter.write_line(RESULTS[cid])
