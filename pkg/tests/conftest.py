import pytest

from stutterkit.corpus import data_path
from stutterkit.petri import parse_net

# filled by test_acceptance.py: criterion number -> (passed, detail)
ACCEPTANCE = {}


@pytest.fixture
def fig1():
    with open(data_path("fig1.net")) as fh:
        return parse_net(fh.read())


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
