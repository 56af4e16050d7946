import sys

import pytest

from bjjmz.protocol import ProtocolConfig, split


@pytest.fixture(scope="session")
def reference_config():
    return ProtocolConfig()


@pytest.fixture(scope="session")
def split_state(reference_config):
    return split(reference_config)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not getattr(mod, "REPORT", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.REPORT:
        terminalreporter.write_line(line)
