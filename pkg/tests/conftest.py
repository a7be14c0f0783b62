import numpy as np
import pytest

from fragile_bandits import Instance

_ACCEPTANCE = {}


def record_acceptance(criterion, passed, detail=""):
    """Store one acceptance line; the last result for a criterion wins."""
    prev = _ACCEPTANCE.get(criterion)
    ok = passed and (prev is None or prev[0])
    _ACCEPTANCE[criterion] = (ok, detail if not ok or prev is None else prev[1] + "; " + detail)


@pytest.fixture
def acceptance():
    return record_acceptance


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, detail = _ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")


def triangle(beta=1.0):
    ang = np.array([0.0, 2 * np.pi / 3, 4 * np.pi / 3])
    X = np.column_stack([np.cos(ang), np.sin(ang)])
    return Instance.create(X, X, beta)


@pytest.fixture
def tri():
    return triangle
