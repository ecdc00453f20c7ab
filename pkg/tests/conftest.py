import numpy as np
import pytest

# Filled by tests/test_acceptance.py; printed once at the end of the run.
ACCEPTANCE: dict = {}


def record(criterion: int, title: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE[criterion] = (title, bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {k:2d} {title}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
