import math

import numpy as np
import pytest

from nestgil.image import Image
from nestgil.metrics import MetricReport, PSNR_CAP, l1_loss, psnr, rmse_hu, ssim


def test_psnr_examples(rng):
    x = rng.uniform(size=(16, 16))
    assert psnr(x, x) == PSNR_CAP == 300.0
    assert psnr(x, x + 0.1) == pytest.approx(20.0, abs=1e-9)
    assert psnr(np.zeros((4, 4)), np.full((4, 4), 0.5)) == pytest.approx(10 * math.log10(4), abs=1e-4)


def test_psnr_uses_declared_range():
    ref = Image(np.zeros((4, 4)), data_range=255.0)
    assert psnr(ref, np.full((4, 4), 25.5)) == pytest.approx(20.0)
    assert psnr(np.zeros((4, 4)), np.full((4, 4), 25.5), data_range=255.0) == pytest.approx(20.0)


def test_psnr_decreases_with_noise(rng):
    x = rng.uniform(size=(20, 20))
    noise = rng.normal(size=x.shape)
    values = [psnr(x, x + a * noise) for a in np.linspace(0.01, 0.5, 10)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert min(values) >= 0


def test_psnr_shape_mismatch():
    with pytest.raises(ValueError):
        psnr(np.zeros((3, 3)), np.zeros((3, 4)))


def test_ssim_identity_and_inversion():
    x = np.zeros((32, 32))
    x[:, 16:] = 1.0
    assert ssim(x, x) == 1.0
    assert ssim(x, 1 - x) < 0.5


def test_ssim_range(rng):
    for _ in range(100):
        a, b = rng.uniform(size=(2, 14, 14))
        assert -1.0 <= ssim(a, b) <= 1.0


def test_ssim_small_image():
    with pytest.raises(ValueError):
        ssim(np.zeros((10, 10)), np.zeros((10, 10)))


@pytest.mark.xfail(strict=True, reason="the luminance factor depends on the means, so a shared shift changes SSIM")
def test_ssim_shared_shift_invariance(rng):
    a = rng.uniform(0, 0.5, (24, 24))
    b = np.clip(a + 0.05 * rng.normal(size=a.shape), 0, 0.5)
    assert ssim(a + 0.4, b + 0.4) == pytest.approx(ssim(a, b), abs=1e-9)


def test_rmse_examples():
    z = np.zeros((6, 6))
    assert rmse_hu(z, z) == 0.0
    assert rmse_hu(z, z + 10) == pytest.approx(10.0)
    checker = np.where(np.indices((6, 6)).sum(axis=0) % 2, 5.0, -5.0)
    assert rmse_hu(z, checker) == pytest.approx(5.0)


def test_rmse_symmetry_triangle(rng):
    for _ in range(50):
        a, b, c = rng.normal(size=(3, 8, 8)) * 100
        assert rmse_hu(a, b) == pytest.approx(rmse_hu(b, a), rel=1e-15)
        assert rmse_hu(a, c) <= rmse_hu(a, b) + rmse_hu(b, c) + 1e-9


def test_l1_examples():
    a = np.zeros((2, 2))
    assert l1_loss([a], [a]) == 0.0
    assert l1_loss([a], [np.array([[1.0, -1.0], [0.0, 0.0]])]) == pytest.approx(0.5)
    batch_ref = [np.zeros((3, 3)), np.zeros((3, 3))]
    assert l1_loss(batch_ref, [np.full((3, 3), 0.2), np.full((3, 3), 0.4)]) == pytest.approx(0.3)


def test_l1_batch_decomposition(rng):
    ref, test = rng.normal(size=(2, 5, 7, 7))
    per_image = [np.abs(r - t).mean() for r, t in zip(ref, test)]
    assert l1_loss(ref, test) == pytest.approx(np.mean(per_image), rel=1e-13)


def test_l1_empty_batch():
    with pytest.raises(ValueError):
        l1_loss([], [])


def test_report_row(rng):
    x = rng.uniform(size=(16, 16))
    r = MetricReport.compute("demo", x, x + 0.1, ct=True)
    fields = r.to_csv_row().split(",")
    assert MetricReport.HEADER == "name,psnr,ssim,rmse_hu,l1"
    assert fields[0] == "demo" and float(fields[1]) == pytest.approx(20.0)
    assert float(fields[3]) == pytest.approx(0.1) and float(fields[4]) == pytest.approx(0.1)
    assert MetricReport("empty").to_csv_row() == "empty,,,,"
