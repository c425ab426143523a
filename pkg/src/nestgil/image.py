"""Image containers, row-major vectorization and overlap-tile patch assembly."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DimensionError(ValueError):
    """Patch or block dimensions incompatible with the image."""


class CoverageError(ValueError):
    """Some output pixel is not covered by any patch."""


@dataclass(frozen=True)
class Image:
    """A 2-D grayscale field with a declared peak value.

    Parameters
    ----------
    values : array_like, shape (height, width)
        Real intensities.
    data_range : float
        Peak value used for PSNR (1.0, 255.0, or an HU span).
    """

    values: np.ndarray
    data_range: float = 1.0

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.ndim != 2:
            raise DimensionError(f"image must be 2-D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image contains non-finite values")
        if not self.data_range > 0:
            raise ValueError(f"data_range must be positive, got {self.data_range}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "data_range", float(self.data_range))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def as_array(img) -> np.ndarray:
    """Return the pixel array of an :class:`Image` or array-like as float64."""
    if isinstance(img, Image):
        return img.values
    return np.asarray(img, dtype=float)


def vectorize(img) -> np.ndarray:
    """Flatten an image row-major into a length ``H*W`` vector."""
    return np.array(as_array(img), dtype=float).ravel(order="C")


def devectorize(v, height: int, width: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.size != height * width:
        raise DimensionError(f"vector of length {v.size} cannot be shaped {height}x{width}")
    return v.reshape((height, width), order="C")


def _anchors(length: int, patch: int, stride: int) -> list[int]:
    if patch > length:
        raise DimensionError(f"patch size {patch} exceeds image dimension {length}")
    if stride < 1:
        raise DimensionError(f"stride must be >= 1, got {stride}")
    last = length - patch
    out = list(range(0, last + 1, stride))
    if out[-1] != last:
        out.append(last)
    return out


@dataclass(frozen=True)
class PatchGrid:
    """Anchors of square patches covering an ``height x width`` image.

    The final anchor on each axis is clamped to ``dim - patch_size`` so no
    padding is ever needed.
    """

    height: int
    width: int
    patch_size: int = 33
    stride: int = 8
    origins: tuple[tuple[int, int], ...] = field(init=False)

    def __post_init__(self):
        rows = _anchors(self.height, self.patch_size, self.stride)
        cols = _anchors(self.width, self.patch_size, self.stride)
        object.__setattr__(self, "origins", tuple((r, c) for r in rows for c in cols))

    @classmethod
    def disjoint(cls, height: int, width: int, patch_size: int = 33) -> "PatchGrid":
        return cls(height, width, patch_size, patch_size)

    def __len__(self):
        return len(self.origins)

    def coverage(self) -> np.ndarray:
        counts = np.zeros((self.height, self.width), dtype=np.int64)
        p = self.patch_size
        for r, c in self.origins:
            counts[r:r + p, c:c + p] += 1
        return counts


def extract_patches(img, grid: PatchGrid) -> list[tuple[tuple[int, int], np.ndarray]]:
    """Cut ``grid.patch_size`` square patches at every grid origin."""
    arr = as_array(img)
    if arr.shape != (grid.height, grid.width):
        raise DimensionError(f"image shape {arr.shape} does not match grid {(grid.height, grid.width)}")
    p = grid.patch_size
    return [((r, c), arr[r:r + p, c:c + p].copy()) for r, c in grid.origins]


def assemble_weighted(patches, height: int, width: int) -> np.ndarray:
    """Average overlapping patches by coverage count.

    Patches are folded in sorted-origin order with a running mean, so the
    result does not depend on the order in which they were reconstructed and
    overlapping identical values are reproduced bit for bit.
    """
    mean = np.zeros((height, width))
    counts = np.zeros((height, width), dtype=np.int64)
    for (r, c), patch in sorted(patches, key=lambda item: tuple(item[0])):
        patch = as_array(patch)
        ph, pw = patch.shape
        if r < 0 or c < 0 or r + ph > height or c + pw > width:
            raise DimensionError(f"patch at {(r, c)} of shape {patch.shape} exceeds {height}x{width}")
        counts[r:r + ph, c:c + pw] += 1
        window = mean[r:r + ph, c:c + pw]
        window += (patch - window) / counts[r:r + ph, c:c + pw]
    if np.any(counts == 0):
        missing = np.argwhere(counts == 0)[0]
        raise CoverageError(f"pixel {tuple(int(i) for i in missing)} not covered by any patch")
    return mean
