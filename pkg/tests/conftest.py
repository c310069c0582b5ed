import sys
import warnings
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fene_fps import DriftField, FeneParams, assemble, build_basis, compute_alpha  # noqa: E402

ACCEPTANCE_LINES = []

SHEAR = np.array([[0.0, 1.0], [0.0, 0.0]])
EXTENSION = np.array([[1.0, 0.0], [0.0, -1.0]])
ROTATION = np.array([[0.0, 1.0], [-1.0, 0.0]])


@pytest.fixture(autouse=True)
def _quiet_theory_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*outside the existence theorem.*")
        warnings.filterwarnings("ignore", message=".*j0 outside theory.*")
        yield


@pytest.fixture(scope="session")
def params():
    return FeneParams(n=2, delta=8.0, b=1.0, mu=1.0)


def make_mats(A, degree=12, delta=8.0):
    drift = DriftField.linear(A)
    ap = compute_alpha(drift, 2)
    return assemble(build_basis(2, degree, delta), drift, ap.alpha)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
