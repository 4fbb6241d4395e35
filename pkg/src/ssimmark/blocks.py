"""Square-block cosine transforms and image partitioning.

The embedding pipeline works on 4x4 tiles of a single image plane. This
module holds the plane container, the orthonormal 2-D DCT used throughout,
and the tiling / sliding-window helpers the metric and optimizer build on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct, idct

BLOCK_SIZE = 4


@dataclass(frozen=True)
class ImagePlane:
    """Single-channel image held as a real-valued grid.

    Samples are stored row major with shape (height, width). ``bit_depth``
    is the nominal dynamic range of the source format (255 for 8-bit
    material). Values stay real through processing and are only quantized
    when written back to disk.
    """

    samples: np.ndarray
    bit_depth: int = 255

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D sample grid, got shape {arr.shape}")
        if arr.size and not np.all(np.isfinite(arr)):
            raise ValueError("image samples must be finite")
        object.__setattr__(self, "samples", arr)
        if self.bit_depth <= 0:
            raise ValueError("bit_depth must be positive")

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    def require_block_aligned(self, n: int = BLOCK_SIZE) -> None:
        """Reject planes whose dimensions cannot be tiled by n x n blocks."""
        for name, dim in (("height", self.height), ("width", self.width)):
            if dim < n or dim % n:
                raise ValueError(
                    f"{name} {dim} is not a positive multiple of {n}"
                )


def _as_square(block) -> np.ndarray:
    arr = np.asarray(block, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square 2-D block, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("block values must be finite")
    return arr


def dct2(block) -> np.ndarray:
    """Orthonormal 2-D DCT of a square block.

    The orthonormal scaling keeps the transform energy-preserving, so the
    sum of squared coefficients equals the sum of squared pixels and the
    (0, 0) coefficient equals n times the pixel mean.
    """
    arr = _as_square(block)
    return dct(dct(arr, axis=0, norm="ortho"), axis=1, norm="ortho")


def idct2(coeffs) -> np.ndarray:
    """Inverse of :func:`dct2`; round-trips to within float rounding."""
    arr = _as_square(coeffs)
    return idct(idct(arr, axis=0, norm="ortho"), axis=1, norm="ortho")


def partition_blocks(plane: ImagePlane, n: int = BLOCK_SIZE) -> np.ndarray:
    """Tile a plane into non-overlapping n x n blocks.

    Returns an array of shape (rows // n, cols // n, n, n) where entry
    (p, q) covers pixels [n*p, n*p + n) x [n*q, n*q + n).
    """
    if n <= 0:
        raise ValueError("block size must be positive")
    x = plane.samples
    for name, dim in (("height", x.shape[0]), ("width", x.shape[1])):
        if dim % n:
            raise ValueError(f"{name} {dim} is not divisible by block size {n}")
    bh, bw = x.shape[0] // n, x.shape[1] // n
    return x.reshape(bh, n, bw, n).transpose(0, 2, 1, 3).copy()


def assemble_blocks(blocks: np.ndarray) -> np.ndarray:
    """Inverse of :func:`partition_blocks` for a (bh, bw, n, n) grid."""
    arr = np.asarray(blocks, dtype=np.float64)
    if arr.ndim != 4 or arr.shape[2] != arr.shape[3]:
        raise ValueError(f"expected a (bh, bw, n, n) block grid, got {arr.shape}")
    bh, bw, n, _ = arr.shape
    return arr.transpose(0, 2, 1, 3).reshape(bh * n, bw * n)


def window_at(plane: ImagePlane, top: int, left: int, n: int,
              padded: bool = False) -> np.ndarray:
    """Extract the n x n window whose top-left corner is (top, left).

    With ``padded`` set, positions outside the plane read as zero, which is
    the convention used by the centered sliding-window quality metric. In
    unpadded mode any out-of-bounds access is an error.
    """
    if n <= 0:
        raise ValueError("window size must be positive")
    h, w = plane.samples.shape
    if not padded:
        if top < 0 or left < 0 or top + n > h or left + n > w:
            raise ValueError(
                f"window ({top}, {left}) size {n} exceeds {h}x{w} plane"
            )
        return plane.samples[top:top + n, left:left + n].copy()
    out = np.zeros((n, n), dtype=np.float64)
    r0, r1 = max(top, 0), min(top + n, h)
    c0, c1 = max(left, 0), min(left + n, w)
    if r0 < r1 and c0 < c1:
        out[r0 - top:r1 - top, c0 - left:c1 - left] = plane.samples[r0:r1, c0:c1]
    return out
