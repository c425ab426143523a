"""scikit-learn style wrapper: sample blocks with ``transform``, reconstruct with ``inverse_transform``."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .gil import GilConfig
from .metrics import psnr
from .operators import gaussian_orthonormal, measurement_count
from .prox import ProxWeights
from .reconstruct import make_restore
from .solvers import ScheduleParams, nesterov2_solve
from .validation import check_blocks, check_positive_int, check_ratio, square_side


class NestDGIL(TransformerMixin, BaseEstimator):
    """Block compressive sensing with Nesterov-II / GIL reconstruction.

    ``fit`` draws the orthonormal Gaussian sampling matrix for the block size
    seen in ``X``; ``transform`` maps row-vectorized blocks to measurements and
    ``inverse_transform`` reconstructs blocks from measurements. Nothing is
    learned from the data beyond its dimensionality.

    Parameters
    ----------
    cs_ratio : float
        Measurements per pixel, ``M = round(cs_ratio * N)``.
    n_stages : int
    n_domains : int
        Series terms of the restoration, remainder included.
    psi : {"identity", "normalized"}
    extractor : {"gradient", "laplacian"}
    epsilon : float
    beta : tuple of 4 floats
        Prox mixing weights for p = 0, 1, 3/2, 2.
    alpha1, c1, alpha2, c2, alpha3, c3 : float
        Softplus schedule parameters of step, threshold and relaxation.
    block_shape : tuple of int, optional
        Block height and width; inferred for square blocks.
    random_state : int
    """

    def __init__(self, cs_ratio=0.25, n_stages=20, n_domains=6, psi="identity",
                 extractor="gradient", epsilon=1e-8, beta=(1.0, 1.0, 1.0, 1.0),
                 alpha1=-0.2, c1=0.1, alpha2=-0.5, c2=-2.0, alpha3=0.5, c3=0.0,
                 block_shape=None, random_state=0):
        self.cs_ratio = cs_ratio
        self.n_stages = n_stages
        self.n_domains = n_domains
        self.psi = psi
        self.extractor = extractor
        self.epsilon = epsilon
        self.beta = beta
        self.alpha1 = alpha1
        self.c1 = c1
        self.alpha2 = alpha2
        self.c2 = c2
        self.alpha3 = alpha3
        self.c3 = c3
        self.block_shape = block_shape
        self.random_state = random_state

    def _schedules(self):
        return ScheduleParams(self.alpha1, self.c1, self.alpha2, self.c2, self.alpha3, self.c3)

    def _gil(self):
        return GilConfig(n_domains=self.n_domains, psi=self.psi, extractor=self.extractor,
                         epsilon=self.epsilon, weights=ProxWeights(tuple(self.beta)))

    def fit(self, X, y=None):
        X = check_blocks(X)
        ratio = check_ratio(self.cs_ratio)
        check_positive_int(self.n_stages, "n_stages")
        n = X.shape[1]
        if self.block_shape is None:
            side = square_side(n)
            shape = (side, side)
        else:
            shape = tuple(int(s) for s in self.block_shape)
            if shape[0] * shape[1] != n:
                raise ValueError(f"block_shape {shape} does not match {n} features")
        self._schedules()
        self._gil()
        self.block_shape_ = shape
        self.n_features_in_ = n
        self.n_measurements_ = measurement_count(ratio, n)
        self.operator_ = gaussian_orthonormal(self.n_measurements_, n, self.random_state)
        return self

    def transform(self, X):
        check_is_fitted(self, "operator_")
        X = check_blocks(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return np.asarray(self.operator_.apply(X.T)).T

    def inverse_transform(self, Y):
        check_is_fitted(self, "operator_")
        Y = check_blocks(Y, "Y")
        if Y.shape[1] != self.n_measurements_:
            raise ValueError(f"Y has {Y.shape[1]} measurements, expected {self.n_measurements_}")
        schedules = self._schedules()
        restore = make_restore(self._gil(), schedules)
        out = np.empty((Y.shape[0], self.n_features_in_))
        for i, y in enumerate(Y):
            st = nesterov2_solve(y, self.operator_, restore, n_stages=self.n_stages,
                                 shape=self.block_shape_, schedules=schedules)
            out[i] = st.x.ravel()
        return out

    def score(self, X, y=None, data_range=1.0):
        """Mean block PSNR of the sample-and-reconstruct round trip."""
        X = check_blocks(X)
        rec = self.inverse_transform(self.transform(X))
        return float(np.mean([psnr(a, b, data_range) for a, b in zip(X, rec)]))
