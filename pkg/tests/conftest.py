import numpy as np
import pytest

from evframes import SensorGeometry


def dense_first_difference(n: int) -> np.ndarray:
    """(n-1) x n forward-difference matrix, the reference for all oracles."""
    a = np.zeros((n - 1, n))
    for i in range(n - 1):
        a[i, i] = -1.0
        a[i, i + 1] = 1.0
    return a


def dense_normal_solve(accum: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Independent dense oracle: solve (A^T A + diag(lam^2)) v = A^T E."""
    n = lam.shape[0]
    a = dense_first_difference(n)
    k = a.T @ a + np.diag(np.asarray(lam, dtype=float) ** 2)
    return np.linalg.solve(k, a.T @ np.asarray(accum, dtype=float))


@pytest.fixture
def geom22():
    return SensorGeometry(width=2, height=2)
