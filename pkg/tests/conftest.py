import numpy as np
import pytest

from tracksweep.geometry import PointSet


def random_instance(rng, n_max=25, f_max=5, box=30.0):
    """Small dense instance, sometimes with one planted noisy track."""
    n = int(rng.integers(5, n_max + 1))
    f = int(rng.integers(2, f_max + 1))
    x = rng.uniform(0, box, n)
    y = rng.uniform(0, box, n)
    t = rng.integers(1, f + 1, n)
    if rng.integers(0, 2):
        vx, vy = rng.uniform(-4, 4, 2)
        x0, y0 = rng.uniform(5, box - 5, 2)
        for j in range(min(f, n)):
            x[j] = x0 + vx * (j + 1) + rng.normal() * 0.5
            y[j] = y0 + vy * (j + 1) + rng.normal() * 0.5
            t[j] = j + 1
    return PointSet(x, y, t)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
