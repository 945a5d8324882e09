import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from crqopt import CrqProblem


@pytest.fixture
def small_example():
    """The 5x1 worked example used throughout: diagonal A, one constraint."""
    A = np.diag([1.0, 2.0, 3.0, 4.0, 5.0])
    C = np.array([0.65, 1.0, 0.68, 1.13, -0.23]).reshape(-1, 1)
    b = np.array([1.0])
    return CrqProblem(A, C, b)


def random_interior_problem(rng, n, m, target_n0=0.6, spread=1.0):
    """Random dense symmetric problem with an interior feasible set.

    b is rescaled so that ||n0|| hits ``target_n0`` exactly (n0 is
    linear in b); generic data keeps the instance in the generic
    (non-degenerate) case with probability one.
    """
    A = rng.standard_normal((n, n)) * spread
    A = 0.5 * (A + A.T)
    C = rng.standard_normal((n, m))
    b_raw = rng.standard_normal(m)
    n0_raw = np.linalg.pinv(C.T) @ b_raw
    b = b_raw * (target_n0 / np.linalg.norm(n0_raw))
    return CrqProblem(A, C, b)
