"""Input checks shared by the estimator and the CLI."""

import math
import numbers

import numpy as np
from sklearn.utils.validation import check_array


def check_blocks(X, name="X"):
    """2-D finite float array of row-vectorized blocks."""
    return check_array(X, dtype=np.float64, ensure_2d=True, ensure_all_finite=True, input_name=name)


def check_ratio(ratio):
    if not isinstance(ratio, numbers.Real) or not 0 < ratio <= 1:
        raise ValueError(f"cs_ratio must lie in (0, 1], got {ratio!r}")
    return float(ratio)


def check_positive_int(value, name, minimum=1):
    if not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def square_side(n_features):
    side = math.isqrt(n_features)
    if side * side != n_features:
        raise ValueError(f"{n_features} features do not form a square block; pass block_shape")
    return side
