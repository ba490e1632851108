import sys

import numpy as np
import pytest

from mlrselect import validate_dataset
from mlrselect.simulation import sample_errors


def projector_residual_gram(y, x_j):
    """Dense oracle: Y'(I - X_j X_j^+)Y with an explicit n x n projector."""
    n = y.shape[0]
    if x_j.shape[1] == 0:
        q = np.eye(n)
    else:
        q = np.eye(n) - x_j @ np.linalg.pinv(x_j)
    return y.T @ q @ y


def random_instance(rng, n=None, p=None, k=None, dist="normal", signal=1.0):
    """Random dataset with n <= 40, k <= 8, p <= 6 and n - k > p."""
    if k is None:
        k = int(rng.integers(1, 9))
    if p is None:
        p = int(rng.integers(1, 7))
    if n is None:
        n = int(rng.integers(k + p + 2, 41))
    x = rng.uniform(-2.0, 2.0, size=(n, k)) + rng.normal(size=(n, k))
    theta = np.zeros((k, p))
    k_true = int(rng.integers(0, k + 1))
    theta[:k_true] = signal * rng.normal(size=(k_true, p))
    y = x @ theta + sample_errors(dist, n, p, rng)
    return validate_dataset(y, x)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    card = sys.modules.get("test_acceptance")
    lines = getattr(card, "SCORECARD", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
