from __future__ import annotations

import numpy as np
import pytest

from lpslice import Polytope
from lpslice.instances import make_preset


@pytest.fixture
def square() -> Polytope:
    """The [-1, 1]^2 box with rows (x1<=1, -x1<=1, x2<=1, -x2<=1)."""
    return Polytope(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]), np.ones(4))


@pytest.fixture
def example1():
    return make_preset("example1")
