"""Synthetic test images."""

import numpy as np

# (intensity, semi-axis a, semi-axis b, center x, center y, angle in degrees)
_MODIFIED_SHEPP_LOGAN = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
)


def _grid(side):
    c = (np.arange(side) + 0.5) / side * 2.0 - 1.0
    x, y = np.meshgrid(c, -c)
    return x, y


def shepp_logan(side: int = 64) -> np.ndarray:
    """Modified Shepp-Logan head phantom with values in [0, 1]."""
    x, y = _grid(side)
    img = np.zeros((side, side))
    for val, a, b, x0, y0, deg in _MODIFIED_SHEPP_LOGAN:
        t = np.deg2rad(deg)
        xr = (x - x0) * np.cos(t) + (y - y0) * np.sin(t)
        yr = -(x - x0) * np.sin(t) + (y - y0) * np.cos(t)
        img[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += val
    return np.clip(img, 0.0, 1.0)


def disk(side: int = 32, radius: float = 0.7, value: float = 1.0) -> np.ndarray:
    """Centered disk; ``radius`` is relative to the half-width."""
    x, y = _grid(side)
    return np.where(x * x + y * y <= radius * radius, value, 0.0)
