"""Linear measurement operators and feature extractors with exact adjoints."""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp


class RankError(ValueError):
    """Requested more orthonormal rows than columns."""


class OperatorSizeError(ValueError):
    """Explicit matrix representation would be too large."""


MAX_RADON_SIDE = 64


class MeasurementOperator:
    """Matrix-backed linear map ``R^N -> R^M`` with its transpose.

    Parameters
    ----------
    matrix : ndarray or scipy.sparse matrix, shape (M, N)
    """

    def __init__(self, matrix, name="matrix"):
        if sp.issparse(matrix):
            self.matrix = sp.csr_matrix(matrix, dtype=float)
            self._matrix_t = self.matrix.T.tocsr()
        else:
            self.matrix = np.array(matrix, dtype=float)
            self.matrix.setflags(write=False)
            self._matrix_t = self.matrix.T
        if self.matrix.ndim != 2:
            raise ValueError("operator matrix must be 2-D")
        self.name = name

    @property
    def m_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def apply(self, v):
        """``Phi @ v``; ``v`` may be a vector or a (N, k) stack of columns."""
        return self.matrix @ np.asarray(v, dtype=float)

    def adjoint(self, w):
        return self._matrix_t @ np.asarray(w, dtype=float)

    def normal_norm(self, n_iter=200, seed=0) -> float:
        """Estimate ``||Phi^T Phi||`` (the gradient Lipschitz constant)."""
        return power_iteration(lambda v: self.adjoint(self.apply(v)), (self.n_cols,), n_iter, seed)

    def to_csv(self, path):
        """Dense operators as one row per line, sparse ones as ``row,col,value`` triplets."""
        with open(path, "w", newline="\n") as fh:
            if self.is_sparse:
                coo = self.matrix.tocoo()
                fh.write(f"# {self.name} {self.m_rows}x{self.n_cols} triplets\n")
                fh.write("row,col,value\n")
                order = np.lexsort((coo.col, coo.row))
                for i in order:
                    fh.write(f"{coo.row[i]},{coo.col[i]},{coo.data[i]!r}\n")
            else:
                fh.write(f"# {self.name} {self.m_rows}x{self.n_cols} dense\n")
                for row in self.matrix:
                    fh.write(",".join(repr(float(v)) for v in row) + "\n")

    def __repr__(self):
        kind = "sparse" if self.is_sparse else "dense"
        return f"MeasurementOperator({self.name}, {self.m_rows}x{self.n_cols}, {kind})"


def measurement_count(ratio: float, n: int) -> int:
    """Number of measurements ``round(ratio * n)`` (half away from zero), at least 1."""
    if not 0 < ratio <= 1:
        raise ValueError(f"CS ratio must lie in (0, 1], got {ratio}")
    return max(1, int(math.floor(ratio * n + 0.5)))


def gaussian_orthonormal(m: int, n: int, seed: int = 0) -> MeasurementOperator:
    """Random Gaussian matrix with orthonormalized rows, so ``Phi Phi^T = I``.

    Rows are drawn i.i.d. N(0, 1) from ``numpy.random.default_rng(seed)`` and
    orthonormalized by a QR factorization of the transpose; column signs of
    ``Q`` are fixed by ``diag(R) > 0`` so the result is unique for a seed.
    """
    if m < 1 or n < 1:
        raise ValueError("operator dimensions must be positive")
    if m > n:
        raise RankError(f"cannot orthonormalize {m} rows in R^{n}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((m, n))
    q, r = np.linalg.qr(g.T)
    q = q * np.sign(np.diag(r))
    return MeasurementOperator(q.T, name=f"gaussian_orthonormal(m={m},n={n},seed={seed})")


def default_detector_count(image_side: int) -> int:
    """Detectors needed to cover the image diagonal at unit spacing."""
    return int(math.ceil(image_side * math.sqrt(2.0)))


def _siddon_ray(p0, d, side, half):
    """Pixel indices and intersection lengths of the line ``p0 + t d`` with the grid.

    The grid spans ``[-half, half]^2`` with unit pixels; row 0 is the top
    (largest y), column 0 the left (smallest x).
    """
    tmin, tmax = -np.inf, np.inf
    for k in range(2):
        if abs(d[k]) < 1e-15:
            if p0[k] < -half or p0[k] > half:
                return None
        else:
            t1 = (-half - p0[k]) / d[k]
            t2 = (half - p0[k]) / d[k]
            tmin = max(tmin, min(t1, t2))
            tmax = min(tmax, max(t1, t2))
    if tmax - tmin <= 1e-12:
        return None
    ts = [np.array([tmin, tmax])]
    for k in range(2):
        if abs(d[k]) >= 1e-15:
            planes = np.arange(side + 1) - half
            t = (planes - p0[k]) / d[k]
            ts.append(t[(t > tmin) & (t < tmax)])
    t = np.unique(np.concatenate(ts))
    lengths = np.diff(t)
    keep = lengths > 1e-12
    mid = 0.5 * (t[:-1] + t[1:])[keep]
    lengths = lengths[keep]
    x = p0[0] + mid * d[0]
    y = p0[1] + mid * d[1]
    col = np.clip(np.floor(x + half).astype(int), 0, side - 1)
    row = np.clip(np.floor(half - y).astype(int), 0, side - 1)
    return row * side + col, lengths


def radon_angles(n_views: int) -> np.ndarray:
    return np.arange(n_views) * np.pi / n_views


def radon_parallel(image_side: int, n_views: int, n_detectors: int | None = None) -> MeasurementOperator:
    """Parallel-beam projector as an explicit sparse matrix.

    Entry ``(ray, pixel)`` is the exact length of the ray inside the unit pixel
    square. View ``k`` has angle ``k*pi/n_views``; the detector coordinate of a
    point ``(x, y)`` is ``x cos(theta) + y sin(theta)``, detectors have unit
    spacing and are centered on the image center. Rows are ordered view-major.
    """
    if image_side < 1 or n_views < 1:
        raise ValueError("image_side and n_views must be >= 1")
    if image_side > MAX_RADON_SIDE:
        raise OperatorSizeError(f"image side {image_side} exceeds the {MAX_RADON_SIDE}-pixel limit")
    if n_detectors is None:
        n_detectors = default_detector_count(image_side)
    half = image_side / 2.0
    offsets = np.arange(n_detectors) - (n_detectors - 1) / 2.0
    rows, cols, vals = [], [], []
    for v, theta in enumerate(radon_angles(n_views)):
        normal = np.array([math.cos(theta), math.sin(theta)])
        direction = np.array([-normal[1], normal[0]])
        for j, t in enumerate(offsets):
            hit = _siddon_ray(t * normal, direction, image_side, half)
            if hit is None:
                continue
            idx, lengths = hit
            rows.append(np.full(idx.size, v * n_detectors + j))
            cols.append(idx)
            vals.append(lengths)
    shape = (n_views * n_detectors, image_side * image_side)
    if rows:
        mat = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=shape)
    else:
        mat = sp.coo_matrix(shape)
    op = MeasurementOperator(mat.tocsr(), name=f"radon(side={image_side},views={n_views},det={n_detectors})")
    op.image_side = image_side
    op.n_views = n_views
    op.n_detectors = n_detectors
    return op


def chord_length(theta: float, offset: float, image_side: int) -> float:
    """Length of the line at detector ``offset`` inside the image square."""
    normal = np.array([math.cos(theta), math.sin(theta)])
    direction = np.array([-normal[1], normal[0]])
    p0 = offset * normal
    half = image_side / 2.0
    tmin, tmax = -np.inf, np.inf
    for k in range(2):
        if abs(direction[k]) < 1e-15:
            if abs(p0[k]) > half:
                return 0.0
        else:
            t1 = (-half - p0[k]) / direction[k]
            t2 = (half - p0[k]) / direction[k]
            tmin = max(tmin, min(t1, t2))
            tmax = min(tmax, max(t1, t2))
    return max(0.0, tmax - tmin)


def power_iteration(apply, shape, n_iter=200, seed=0) -> float:
    """Largest eigenvalue of a symmetric positive semidefinite map."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(shape)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(n_iter):
        w = apply(v)
        lam = float(np.vdot(v, w))
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0
        v = w / nrm
    return lam


class FeatureExtractor:
    """Linear map ``K`` from an image to a ``(channels, H, W)`` feature stack.

    Subclasses implement :meth:`apply` and :meth:`adjoint`; ``spectral_bound``
    is an upper bound on ``||K' K||``.
    """

    channels = 1
    spectral_bound = 1.0
    name = "extractor"

    def apply(self, img):
        raise NotImplementedError

    def adjoint(self, feat):
        raise NotImplementedError

    def normal(self, img):
        return self.adjoint(self.apply(img))

    def __repr__(self):
        return f"{type(self).__name__}()"


class GradientExtractor(FeatureExtractor):
    """Forward differences with zero difference at the far edge.

    Channel 0 is the horizontal difference ``v[i, j+1] - v[i, j]``, channel 1
    the vertical one. The adjoint is the negative divergence.
    """

    channels = 2
    spectral_bound = 8.0
    name = "gradient"

    def apply(self, img):
        v = np.asarray(img, dtype=float)
        out = np.zeros((2,) + v.shape)
        out[0, :, :-1] = v[:, 1:] - v[:, :-1]
        out[1, :-1, :] = v[1:, :] - v[:-1, :]
        return out

    def adjoint(self, feat):
        gx, gy = np.asarray(feat, dtype=float)
        out = np.zeros(gx.shape)
        out[:, :-1] -= gx[:, :-1]
        out[:, 1:] += gx[:, :-1]
        out[:-1, :] -= gy[:-1, :]
        out[1:, :] += gy[:-1, :]
        return out


class LaplacianExtractor(FeatureExtractor):
    """Five-point Laplacian with replicate boundary.

    Out-of-range neighbours take the value of the nearest border pixel, so the
    stencil is not symmetric at the border; the adjoint scatters each output
    back through the same index map.
    """

    channels = 1
    spectral_bound = 64.0
    name = "laplacian"

    @staticmethod
    def _shifted(v):
        up = np.vstack([v[:1], v[:-1]])
        down = np.vstack([v[1:], v[-1:]])
        left = np.hstack([v[:, :1], v[:, :-1]])
        right = np.hstack([v[:, 1:], v[:, -1:]])
        return up, down, left, right

    def apply(self, img):
        v = np.asarray(img, dtype=float)
        up, down, left, right = self._shifted(v)
        return (up + down + left + right - 4.0 * v)[None]

    def adjoint(self, feat):
        f = np.asarray(feat, dtype=float)[0]
        out = -4.0 * f
        # up[i] = v[max(i-1, 0)]  ->  f[i] contributes to v[max(i-1, 0)]
        out[:-1] += f[1:]
        out[0] += f[0]
        out[1:] += f[:-1]
        out[-1] += f[-1]
        out[:, :-1] += f[:, 1:]
        out[:, 0] += f[:, 0]
        out[:, 1:] += f[:, :-1]
        out[:, -1] += f[:, -1]
        return out


def gradient_extractor() -> GradientExtractor:
    return GradientExtractor()


def laplacian_extractor() -> LaplacianExtractor:
    return LaplacianExtractor()


EXTRACTORS = {"gradient": gradient_extractor, "laplacian": laplacian_extractor}
