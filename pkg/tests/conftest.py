import json
from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"

_ACCEPTANCE = []


def record_criterion(number, title, passed, detail):
    """Collect one acceptance line; printed at the end of the session."""
    _ACCEPTANCE.append((number, title, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        mark = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{mark}] {number:>2}. {title}: {detail}")


@pytest.fixture(scope="session")
def golden():
    return json.loads((FIXTURES / "golden.json").read_text())


def load_fixture(name):
    return np.loadtxt(FIXTURES / name, delimiter=",", ndmin=2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
