"""Cascade geometric incremental restoration by truncated Neumann series.

The restoration step solves ``x = m + M(x)`` with ``M(x) = -tau K'(psi(K x))``
approximately as

    h = m + M(m) + M^2(m) + ... + M^n(m) + remainder,

where the remainder is ``M^{n+1}(m)`` with the multi-norm shrinkage ``theta``
inserted halfway through. ``M`` is split into a left half ``psi(K .)``
(image -> features) and a right half ``-tau K'(.)`` (features -> image); an
``M^j`` evaluation is the alternating chain of ``2j`` halves starting with a
left half. The remainder applies ``n + 1`` halves, shrinks, then applies the
remaining ``n + 1`` halves, so the shrinkage acts on features when ``n`` is
even and on an image when ``n`` is odd.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .operators import FeatureExtractor, GradientExtractor, EXTRACTORS
from .prox import ProxWeights, theta

PSI_VARIANTS = ("identity", "normalized")


class ContractionError(ValueError):
    """``tau * spectral_bound >= 1`` for the linear (identity) variant."""


class ContractionWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class GilConfig:
    """Settings of the restoration cascade.

    Parameters
    ----------
    n_domains : int
        Number of series terms ``n + 1`` including the remainder.
    psi : {"identity", "normalized"}
        ``identity`` derives from ``0.5 |r|^2``; ``normalized`` from ``|r|``
        and divides features by their per-pixel channel norm.
    tau : float
        Regularization level; solver schedules override it per stage.
    extractor : FeatureExtractor
    weights : ProxWeights
    epsilon : float
        Floor of the per-pixel norm in the normalized variant.
    strict_contraction : bool
        Raise instead of warn when the identity series cannot converge.
    """

    n_domains: int = 6
    psi: str = "identity"
    tau: float = 0.01
    extractor: FeatureExtractor = field(default_factory=GradientExtractor)
    weights: ProxWeights = field(default_factory=ProxWeights)
    epsilon: float = 1e-8
    strict_contraction: bool = False

    def __post_init__(self):
        if isinstance(self.extractor, str):
            object.__setattr__(self, "extractor", EXTRACTORS[self.extractor]())
        if not isinstance(self.weights, ProxWeights):
            object.__setattr__(self, "weights", ProxWeights(tuple(self.weights)))
        if int(self.n_domains) != self.n_domains or self.n_domains < 1:
            raise ValueError(f"n_domains must be a positive integer, got {self.n_domains}")
        if self.psi not in PSI_VARIANTS:
            raise ValueError(f"psi must be one of {PSI_VARIANTS}, got {self.psi!r}")
        if self.tau < 0:
            raise ValueError(f"tau must be nonnegative, got {self.tau}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    @property
    def n(self) -> int:
        """Number of untruncated series terms."""
        return self.n_domains - 1

    @property
    def contraction_factor(self) -> float:
        return self.tau * self.extractor.spectral_bound

    def with_tau(self, tau: float) -> "GilConfig":
        return replace(self, tau=float(tau))

    def check_contraction(self):
        if self.psi != "identity" or self.contraction_factor < 1:
            return
        msg = (f"tau * spectral_bound = {self.contraction_factor:.4g} >= 1; "
               "the identity series does not converge")
        if self.strict_contraction:
            raise ContractionError(msg)
        warnings.warn(msg, ContractionWarning, stacklevel=3)


def psi(feat, variant: str = "identity", epsilon: float = 1e-8):
    """Pointwise feature nonlinearity; channels are the leading axis."""
    feat = np.asarray(feat, dtype=float)
    if variant == "identity":
        return feat
    norm = np.sqrt(np.sum(feat * feat, axis=0, keepdims=True))
    return feat / np.maximum(norm, epsilon)


def _left(x, cfg: GilConfig):
    return psi(cfg.extractor.apply(x), cfg.psi, cfg.epsilon)


def _right(f, cfg: GilConfig):
    return -cfg.tau * cfg.extractor.adjoint(f)


def half_step(x, j: int, cfg: GilConfig):
    """Apply half operator number ``j`` (1-based): left if odd, right if even."""
    return _left(x, cfg) if j % 2 else _right(x, cfg)


def half_operator_chain(m, cfg: GilConfig, length: int) -> list:
    """Forward chain ``[m_0, m_1, ..., m_length]`` of alternating halves."""
    chain = [np.asarray(m, dtype=float)]
    for j in range(1, length + 1):
        chain.append(half_step(chain[-1], j, cfg))
    return chain


def m_apply(v, cfg: GilConfig):
    """One application ``-tau K'(psi(K v))``."""
    return _right(_left(np.asarray(v, dtype=float), cfg), cfg)


def spectral_series(m, cfg: GilConfig):
    """Truncated series for ``(I - M)^{-1} m``.

    Returns
    -------
    h : ndarray
        ``m + sum(terms)``.
    terms : list of ndarray
        ``n + 1`` image-shaped increments; the last one is the shrunken
        remainder.
    """
    cfg.check_contraction()
    m = np.asarray(m, dtype=float)
    n = cfg.n
    chain = half_operator_chain(m, cfg, max(2 * n, n + 1))
    terms = [chain[2 * i] for i in range(1, n + 1)]

    r = theta(chain[n + 1], cfg.tau, cfg.weights)
    for j in range(n + 2, 2 * n + 3):
        r = half_step(r, j, cfg)
    terms.append(r)

    h = m.copy()
    for t in terms:
        h = h + t
    return h, terms


def gil_restore(m, cfg: GilConfig, tau: float | None = None):
    """Restoration ``h = m + increments`` at level ``tau`` (default ``cfg.tau``)."""
    if tau is not None:
        cfg = cfg.with_tau(tau)
    if cfg.tau == 0:
        return np.array(m, dtype=float)
    return spectral_series(m, cfg)[0]
