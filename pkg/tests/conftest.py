import numpy as np
import pytest

CURVATURES = (0.25, 0.5, 1.0, 2.0, 4.0)


def ball_points(rng, size, dim, c, max_radius=0.999):
    """Uniform directions with radii uniform in [0, max_radius / sqrt(c))."""
    d = rng.normal(size=(size, dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = rng.uniform(0, max_radius, size=(size, 1)) / np.sqrt(c)
    return d * r


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
