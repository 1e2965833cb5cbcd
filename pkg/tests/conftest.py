import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gie import ExperimentParams, derive  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def reference():
    return ExperimentParams.reference()


@pytest.fixture(scope="session")
def d(reference):
    return derive(reference)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
