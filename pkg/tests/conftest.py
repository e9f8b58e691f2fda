import re

import numpy as np
import pytest

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def verdict(request):
    """``verdict(ok, detail)`` records one PASS/FAIL line for the criterion named in the test."""
    num = int(re.search(r"criterion_(\d+)", request.node.name).group(1))

    def record(ok: bool, detail: str) -> bool:
        line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[num] = line
        print(line)
        return ok

    yield record
    if num not in ACCEPTANCE_LINES:
        ACCEPTANCE_LINES[num] = f"criterion {num:2d}: FAIL  raised before reaching a verdict"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for num in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[num])
