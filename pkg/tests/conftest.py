import numpy as np
import pytest

from ndeso.dataset import Dataset


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(1234))


@pytest.fixture
def five_points():
    """Two A points with a B point between them, and two far B points."""
    X = np.array([[0.0, 0.0], [0.0, 1.0], [0.0, 0.5], [5.0, 0.0], [5.0, 1.0]])
    return Dataset.from_raw(X, ["A", "A", "B", "B", "B"])


def make(X, labels):
    return Dataset.from_raw(np.asarray(X, dtype=float), labels)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(RESULTS):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
