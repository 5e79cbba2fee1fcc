import pytest

from curvegait.analysis import sequence_fields
from curvegait.synth import GaitType, make_body, synth_gait

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance():
    """Record and print one pass/fail line for an acceptance criterion."""

    def record(number, title, ok, detail=""):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {title}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


@pytest.fixture(scope="session")
def body():
    return make_body()


@pytest.fixture(scope="session")
def gaits(body):
    """Default two-cycle, 8-frame sequences of all three gait types."""
    return {g: synth_gait(gait_type=g, body=body) for g in GaitType}


@pytest.fixture(scope="session")
def gait_fields(gaits):
    return {g: sequence_fields(s) for g, s in gaits.items()}
