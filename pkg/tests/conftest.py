# Ensure tests can import the package regardless of CWD
import os
import sys

import numpy as np
import pytest

# Repo root is one directory up from the tests folder
REPO_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
if REPO_ROOT not in sys.path:
    sys.path.insert(0, REPO_ROOT)

from saddlekit.services.saddle_system import SaddlePointSystem  # noqa: E402
from saddlekit.services.sparse_core import SparseMatrix  # noqa: E402


@pytest.fixture
def hand_system():
    """n = m = 1: A = [2], B = [1], C = [0], right-hand side for all-ones."""
    return SaddlePointSystem(
        A=SparseMatrix.from_dense([[2.0]]),
        B=SparseMatrix.from_dense([[1.0]]),
        C=SparseMatrix.zeros(1, 1),
        f=np.array([3.0]),
        g=np.array([1.0]),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
