import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rigidgen.design import DesignParams, build_design_instance  # noqa: E402
from rigidgen.oa import OAParams, build_oa_instance  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def oa221():
    return build_oa_instance(OAParams(2, 2, 1))


@pytest.fixture(scope="session")
def oa231():
    return build_oa_instance(OAParams(2, 3, 1))


@pytest.fixture(scope="session")
def d431():
    return build_design_instance(DesignParams(4, 3, 1))


@pytest.fixture
def acceptance():
    """Record one summary line per criterion; returns the recorder."""

    def record(number: int, title: str, checks: dict, detail: str = ""):
        ok = all(checks.values())
        failed = [name for name, good in checks.items() if not good]
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}"
        if failed:
            line += " | failed: " + ", ".join(failed)
        if detail:
            line += " | " + detail
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
