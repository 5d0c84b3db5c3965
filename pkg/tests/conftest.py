import pytest
from hypothesis import HealthCheck, settings

from tpflift import fixture_path
from tpflift.logio import read_log
from tpflift.store import Store
from tpflift.syntax import read_query

settings.register_profile(
    "default", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def fig2_store():
    return Store.load(fixture_path("fig2_store.nt"))


@pytest.fixture(scope="session")
def q3():
    return read_query(fixture_path("q3.rq"))


@pytest.fixture(scope="session")
def q4():
    return read_query(fixture_path("q4.rq"))


@pytest.fixture(scope="session")
def fig2b_log():
    entries, rejects = read_log(fixture_path("fig2b.log"))
    assert not rejects
    return entries


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def report_criterion():
    def record(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
