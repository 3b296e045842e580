import numpy as np
import pytest

from featnet import FeatureMatrix


@pytest.fixture
def example_matrix():
    # three nodes: {1,2,3}, {1,3,4,5}, {2,3,4,6,7,8}
    return FeatureMatrix.from_rows([[1, 2, 3], [1, 3, 4, 5], [2, 3, 4, 6, 7, 8]])


def random_left_ordered(rng: np.random.Generator, n: int, max_new: int = 3, p_old: float = 0.4) -> FeatureMatrix:
    """Arbitrary left-ordered matrix, not drawn from the model."""
    rows, L = [], 0
    for i in range(n):
        old = np.flatnonzero(rng.random(L) < p_old) if L else np.zeros(0, dtype=int)
        new = int(rng.integers(1 if i == 0 else 0, max_new + 1))
        rows.append(np.concatenate([old, np.arange(L, L + new)]))
        L += new
    return FeatureMatrix.from_rows(rows, one_based=False)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
