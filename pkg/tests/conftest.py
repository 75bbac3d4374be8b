import sys

import numpy as np
import pytest

from gtprocess.measure import AtomicMeasure


@pytest.fixture
def two_atom():
    return AtomicMeasure([-1.0, 1.0], [0.75, 0.25])


@pytest.fixture
def half_half():
    return AtomicMeasure([0.0, 1.0], [0.5, 0.5])


def random_measure(rng, kmax=6):
    k = int(rng.integers(2, kmax + 1))
    pos = np.sort(rng.uniform(-3, 3, size=k))
    while np.min(np.diff(pos)) < 0.2:
        pos = np.sort(rng.uniform(-3, 3, size=k))
    w = rng.uniform(0.2, 1.0, size=k)
    w /= w.sum()
    w[-1] = 1.0 - w[:-1].sum()
    return AtomicMeasure(pos, w)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, _ in mod.CRITERIA:
        if name in mod.RESULTS:
            terminalreporter.write_line(mod._line(name, *mod.RESULTS[name]))
