import numpy as np
import pytest

from qbirthmark.ensembles import SymmetryClass

CLASSES = [SymmetryClass.GUE, SymmetryClass.GOE]


@pytest.fixture(params=CLASSES, ids=lambda c: c.value)
def cls(request):
    return request.param


def sigma_distance(est, target):
    return abs(est.mean - target) / est.stderr


def random_unit(rng, n, complex_=True):
    z = rng.standard_normal(n) + (1j * rng.standard_normal(n) if complex_ else 0)
    return z / np.linalg.norm(z)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
