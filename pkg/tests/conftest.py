"""Collects the acceptance criterion lines and prints them after the run."""
import pytest

_LINES = {}


class Recorder:
    def __init__(self, sink):
        self.sink = sink

    def __call__(self, number: int, ok: bool, detail: str, seconds: float, budget: float) -> bool:
        within = seconds < budget
        passed = ok and within
        self.sink[number] = (
            f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}  "
            f"[{seconds:.2f}s of {budget:g}s{'' if within else ', over budget'}]"
        )
        return passed


@pytest.fixture
def criterion():
    return Recorder(_LINES)


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_LINES):
        terminalreporter.write_line(_LINES[number])
