import pytest

from ellmax.norming import RhoRule
from ellmax.radial import beta_radius


@pytest.fixture(scope="session")
def beta21():
    return beta_radius(2, 1)


@pytest.fixture(scope="session")
def example_rule():
    return RhoRule.one_minus_power(2 / 3)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for key in sorted(results):
            terminalreporter.write_line(results[key])
