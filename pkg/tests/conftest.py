import pytest

from leochunk.channel import LinkBudgetParams
from leochunk.engine import NetworkContext
from leochunk.orbital import EUROPEAN_OGS, preset


@pytest.fixture(scope="session")
def telesat_ctx():
    """Small Telesat context shared by the engine and metrics tests."""
    return NetworkContext(preset("telesat"), EUROPEAN_OGS, LinkBudgetParams(), 600.0, 10)


# acceptance verdicts, printed as one line per criterion after the run
ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def verdict(request):
    """Record ``(passed, detail)`` for an acceptance criterion."""
    table = request.config.stash.setdefault(ACCEPTANCE_KEY, {})

    def record(number: int, passed: bool, detail: str) -> bool:
        table[number] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    table = config.stash.get(ACCEPTANCE_KEY, {})
    if not table:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(table):
        passed, detail = table[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")
