"""Image quality metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .image import Image, as_array

PSNR_CAP = 300.0


def _pair(ref, test):
    a, b = as_array(ref), as_array(test)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def _range(ref, data_range):
    if data_range is not None:
        return float(data_range)
    if isinstance(ref, Image):
        return ref.data_range
    return 1.0


def psnr(ref, test, data_range=None) -> float:
    """``10 log10(range^2 / MSE)``, capped at 300 dB for identical images.

    ``data_range`` defaults to the reference's declared range (or 1.0 for
    plain arrays).
    """
    a, b = _pair(ref, test)
    rng = _range(ref, data_range)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * math.log10(rng * rng / mse))


def _gaussian_window(size=11, sigma=1.5):
    g = np.exp(-0.5 * ((np.arange(size) - (size - 1) / 2.0) / sigma) ** 2)
    g /= g.sum()
    return np.outer(g, g)


def ssim(ref, test, data_range=None, win_size=11, sigma=1.5) -> float:
    """Mean structural similarity over all fully-contained Gaussian windows."""
    a, b = _pair(ref, test)
    if min(a.shape) < win_size:
        raise ValueError(f"images must be at least {win_size}x{win_size}, got {a.shape}")
    rng = _range(ref, data_range)
    c1 = (0.01 * rng) ** 2
    c2 = (0.03 * rng) ** 2
    w = _gaussian_window(win_size, sigma)

    def filt(img):
        return convolve2d(img, w, mode="valid")

    mu_a, mu_b = filt(a), filt(b)
    saa = filt(a * a) - mu_a * mu_a
    sbb = filt(b * b) - mu_b * mu_b
    sab = filt(a * b) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * sab + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (saa + sbb + c2)
    return float(np.mean(num / den))


def rmse_hu(ref, test) -> float:
    """Root mean squared difference; inputs are assumed to be in HU already."""
    a, b = _pair(ref, test)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def l1_loss(ref_batch, test_batch) -> float:
    """``sum |x_i - x_ref_i|_1 / (N_b N)`` over a batch of images."""
    a = np.asarray([as_array(r) for r in ref_batch], dtype=float)
    b = np.asarray([as_array(t) for t in test_batch], dtype=float)
    if a.shape[0] == 0:
        raise ValueError("empty batch")
    if a.shape != b.shape:
        raise ValueError(f"batch shape mismatch: {a.shape} vs {b.shape}")
    return float(np.abs(a - b).sum() / a.size)


@dataclass
class MetricReport:
    name: str
    psnr: float | None = None
    ssim: float | None = None
    rmse_hu: float | None = None
    l1: float | None = None

    HEADER = "name,psnr,ssim,rmse_hu,l1"

    @classmethod
    def compute(cls, name, ref, test, data_range=None, ct=False):
        report = cls(name, psnr(ref, test, data_range), None, None, l1_loss([ref], [test]))
        if min(as_array(ref).shape) >= 11:
            report.ssim = ssim(ref, test, data_range)
        if ct:
            report.rmse_hu = rmse_hu(ref, test)
        return report

    def to_csv_row(self) -> str:
        def fmt(v):
            return "" if v is None else f"{v:.10g}"

        return ",".join([self.name, fmt(self.psnr), fmt(self.ssim), fmt(self.rmse_hu), fmt(self.l1)])
