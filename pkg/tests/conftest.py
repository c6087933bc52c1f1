import sys
import pytest

from arithtoric import bundle
from arithtoric.excol import ext_table


@pytest.fixture(scope="session")
def fans():
    return {n: bundle.load_fan(f"bundled:fan_a{n}") for n in (1, 2, 3)}


@pytest.fixture(scope="session")
def collections(fans):
    return {n: bundle.load_collection(f"bundled:ct_a{n}", fans[n]) for n in (1, 2, 3)}


@pytest.fixture(scope="session")
def a3_table(collections):
    return ext_table(collections[3])


@pytest.fixture(scope="session")
def klein_action(fans):
    return bundle.load_action("bundled:action_a3_biquadratic", fans[3])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
