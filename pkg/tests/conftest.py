from __future__ import annotations

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def axis_points(n, radii):
    """Points ``r e_1`` for the given radii."""
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    x = np.zeros((radii.size, n))
    x[:, 0] = radii
    return x
