"""Closed-form proximal maps of ``tau * |x|^p`` for p in {0, 1, 3/2, 2}.

Every map acts elementwise and returns its input unchanged when ``tau == 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NormalizationError(ValueError):
    """Prox weights sum to zero."""


def _check(z, tau):
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise FloatingPointError("prox input contains non-finite values")
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    return z


def prox_l0(z, tau):
    """Hard threshold at ``sqrt(2 tau)``; values exactly at the threshold are kept."""
    z = _check(z, tau)
    if tau == 0:
        return z.copy()
    return np.where(np.abs(z) >= np.sqrt(2.0 * tau), z, 0.0)


def prox_l1(z, tau):
    """Soft threshold."""
    z = _check(z, tau)
    return np.sign(z) * np.maximum(np.abs(z) - tau, 0.0)


def prox_l32(z, tau):
    z = _check(z, tau)
    if tau == 0:
        return z.copy()
    a = 9.0 * tau * tau / 8.0
    if a == 0.0:
        # tau**2 underflows: the map is the identity to working precision
        return z.copy()
    # with r = sqrt(1 + s) the closed form equals z s / (1 + r)^2, free of cancellation
    with np.errstate(over="ignore", invalid="ignore"):
        s = 2.0 * np.abs(z) / a
        out = z * s / (1.0 + np.sqrt(1.0 + s)) ** 2
    return np.where(np.isinf(s), z, out)


def prox_l2(z, tau):
    """Minimizer of ``0.5 (x - z)^2 + tau x^2``."""
    z = _check(z, tau)
    return z / (1.0 + 2.0 * tau)


PROX_MAPS = (prox_l0, prox_l1, prox_l32, prox_l2)
P_VALUES = (0.0, 1.0, 1.5, 2.0)


@dataclass(frozen=True)
class ProxWeights:
    """Mixing coefficients for the four prox maps, ordered p = 0, 1, 3/2, 2.

    Negative entries are allowed; only a zero sum is rejected.
    """

    beta: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)

    def __post_init__(self):
        beta = tuple(float(b) for b in self.beta)
        if len(beta) != 4:
            raise ValueError(f"expected 4 weights, got {len(beta)}")
        if sum(beta) == 0:
            raise NormalizationError("prox weights sum to zero")
        object.__setattr__(self, "beta", beta)

    @property
    def eta(self) -> np.ndarray:
        b = np.asarray(self.beta)
        return b / b.sum()


def theta(z, tau, weights: ProxWeights | None = None):
    """Normalized weighted combination of the four prox maps."""
    if weights is None:
        weights = ProxWeights()
    elif not isinstance(weights, ProxWeights):
        weights = ProxWeights(tuple(weights))
    z = _check(z, tau)
    out = np.zeros_like(z)
    for eta, prox in zip(weights.eta, PROX_MAPS):
        if eta != 0:
            out = out + eta * prox(z, tau)
    return out
