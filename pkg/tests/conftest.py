import json
import os
import warnings

import pytest

warnings.filterwarnings("ignore", message=".*TBB.*")

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture(scope="session")
def put_golden():
    with open(os.path.join(FIXTURES, "put_golden.json")) as fh:
        return json.load(fh)


ACCEPTANCE_LINES = []


def record_acceptance(line):
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
