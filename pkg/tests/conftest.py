import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def grid_prox(z, tau, p, step=1e-4, bound=6.0):
    """Brute-force minimizer of ``0.5 (x - z)^2 + tau |x|^p`` on a uniform grid."""
    n = int(round(bound / step))
    x = np.arange(-n, n + 1) * step
    if p == 0:
        penalty = (x != 0).astype(float)
    else:
        penalty = np.abs(x) ** p
    return x[np.argmin(0.5 * (x - z) ** 2 + tau * penalty)]
