"""Structural similarity in the pixel and DCT domains.

Two algebraically equivalent forms of the block index are provided. The
pixel-domain form is the usual mean / variance / covariance expression.
The DCT-domain form evaluates the same quantity directly from orthonormal
transform coefficients: the DC pair carries the luminance comparison and
the remaining coefficients carry contrast and structure. Equivalence holds
because the orthonormal transform preserves inner products and maps the
pixel mean onto the DC coefficient.

On top of the block index sit the four whole-image measurement regimes
used by the embedding pipeline: disjoint 4x4 tiles, a dense sliding square
window, a centered Gaussian-weighted 11x11 window over a zero-padded
plane, and 8x8 windows sliding with stride 4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .blocks import ImagePlane, partition_blocks

GAUSSIAN_WINDOW_SIZE = 11
GAUSSIAN_WINDOW_SIGMA = 1.5


@dataclass(frozen=True)
class SsimConstants:
    """Stabilizing constants of the similarity index.

    ``k1`` and ``k2`` are small positive fractions of the dynamic range;
    the derived constants ``c1`` and ``c2`` keep the luminance and
    contrast ratios finite on flat or near-flat content.
    """

    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 255.0

    def __post_init__(self):
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("k1 and k2 must be positive")
        if self.dynamic_range <= 0:
            raise ValueError("dynamic_range must be positive")

    @property
    def c1(self) -> float:
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.dynamic_range) ** 2

    def c1_dct(self, n: int) -> float:
        """Luminance constant rescaled for n x n DCT coefficients."""
        return (n * n) * self.c1

    def c2_dct(self, n: int) -> float:
        """Contrast constant rescaled for n x n DCT coefficients."""
        return (n * n - 1) * self.c2


DEFAULT_CONSTANTS = SsimConstants()


@dataclass(frozen=True)
class WindowMode:
    """Window regime for whole-image measurement and joint optimization.

    kind is one of "non" (disjoint 4x4 tiles), "over" (dense sliding
    n x n square, uniform weights), "gauss" (centered 11x11 Gaussian
    window at every pixel of the zero-padded plane) or "semi" (8x8
    windows sliding with stride 4). ``n`` is the window side.
    """

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in ("non", "over", "gauss", "semi"):
            raise ValueError(f"unknown window kind {self.kind!r}")
        if self.kind == "over" and self.n < 4:
            raise ValueError("sliding square windows must be at least 4x4")

    @property
    def label(self) -> str:
        if self.kind == "over":
            return f"over{self.n}"
        return self.kind


NON_OVERLAPPED_4 = WindowMode("non", 4)
GAUSSIAN_OVERLAPPED_11 = WindowMode("gauss", GAUSSIAN_WINDOW_SIZE)
SEMI_OVERLAPPED_8_STRIDE_4 = WindowMode("semi", 8)


def overlapped_square(n: int) -> WindowMode:
    return WindowMode("over", n)


def mode_from_label(label: str) -> WindowMode:
    """Parse a mode label such as "non", "over4", "gauss" or "semi"."""
    if label == "non":
        return NON_OVERLAPPED_4
    if label == "gauss":
        return GAUSSIAN_OVERLAPPED_11
    if label == "semi":
        return SEMI_OVERLAPPED_8_STRIDE_4
    if label.startswith("over"):
        try:
            return overlapped_square(int(label[4:]))
        except ValueError:
            pass
    raise ValueError(f"unknown window mode {label!r}")


MEASURE_MODES = {
    "non": NON_OVERLAPPED_4,
    "over4": overlapped_square(4),
    "gauss": GAUSSIAN_OVERLAPPED_11,
    "semi": SEMI_OVERLAPPED_8_STRIDE_4,
}


@dataclass(frozen=True)
class SsimReport:
    """Local indices and their mean for one window regime."""

    mode: WindowMode
    local_indices: list
    mean_ssim: float


def gaussian_window(size: int = GAUSSIAN_WINDOW_SIZE,
                    sigma: float = GAUSSIAN_WINDOW_SIGMA) -> np.ndarray:
    """Normalized, symmetric Gaussian weight mask."""
    half = (size - 1) / 2.0
    coords = np.arange(size, dtype=np.float64) - half
    g = np.exp(-(coords ** 2) / (2.0 * sigma * sigma))
    mask = np.outer(g, g)
    return mask / mask.sum()


def _checked_pair_arrays(x, y):
    ax = np.asarray(x, dtype=np.float64)
    ay = np.asarray(y, dtype=np.float64)
    if ax.shape != ay.shape:
        raise ValueError(f"shape mismatch: {ax.shape} vs {ay.shape}")
    if ax.ndim != 2 or ax.shape[0] != ax.shape[1]:
        raise ValueError(f"expected square 2-D blocks, got shape {ax.shape}")
    if ax.shape[0] < 2:
        raise ValueError("blocks must be at least 2x2")
    return ax, ay


def ssim_spatial(x, y, constants: SsimConstants = DEFAULT_CONSTANTS,
                 weights=None) -> float:
    """Similarity of two equal-size square pixel blocks.

    Parameters
    ----------
    x, y : array_like
      Square blocks of identical shape.
    constants : SsimConstants
      Stabilizing constants.
    weights : array_like, optional
      Nonnegative weight grid of the same shape summing to one. When
      given, weighted first and second moments are used (the convention
      of the Gaussian-window metric). Without weights, plain means are
      combined with unbiased central moments, i.e. sums of squared
      deviations divided by (n*n - 1).

    Returns
    -------
    float
      Product of the luminance and contrast/structure comparisons.
    """
    ax, ay = _checked_pair_arrays(x, y)
    c1 = constants.c1
    c2 = constants.c2
    if weights is None:
        n2 = ax.size
        mx = ax.mean()
        my = ay.mean()
        dx = ax - mx
        dy = ay - my
        vx = (dx * dx).sum() / (n2 - 1)
        vy = (dy * dy).sum() / (n2 - 1)
        cov = (dx * dy).sum() / (n2 - 1)
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != ax.shape:
            raise ValueError(f"weights shape {w.shape} does not match {ax.shape}")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must sum to one")
        mx = (w * ax).sum()
        my = (w * ay).sum()
        vx = (w * (ax - mx) ** 2).sum()
        vy = (w * (ay - my) ** 2).sum()
        cov = (w * (ax - mx) * (ay - my)).sum()
    lum = (2.0 * mx * my + c1) / (mx * mx + my * my + c1)
    cs = (2.0 * cov + c2) / (vx + vy + c2)
    return float(lum * cs)


def ssim_dct(coeffs_x, coeffs_y,
             constants: SsimConstants = DEFAULT_CONSTANTS) -> float:
    """Similarity evaluated directly on orthonormal DCT coefficients.

    The luminance comparison uses only the DC pair with the constant
    scaled by n*n; contrast and structure use every coefficient with the
    DC contribution removed and the constant scaled by (n*n - 1). For
    blocks relating through an orthonormal transform this equals
    :func:`ssim_spatial` on the corresponding pixels to float rounding.
    """
    cx, cy = _checked_pair_arrays(coeffs_x, coeffs_y)
    n = cx.shape[0]
    c1d = constants.c1_dct(n)
    c2d = constants.c2_dct(n)
    x00 = cx[0, 0]
    y00 = cy[0, 0]
    lum = (2.0 * x00 * y00 + c1d) / (x00 * x00 + y00 * y00 + c1d)
    cross = (cx * cy).sum()
    ex = (cx * cx).sum()
    ey = (cy * cy).sum()
    cs = (2.0 * cross - 2.0 * x00 * y00 + c2d) / (
        ex + ey - x00 * x00 - y00 * y00 + c2d)
    return float(lum * cs)


def validate_coeff_pair(pair, n: int = 4):
    """Check a pair of distinct AC coefficient positions, return it."""
    try:
        (a, b) = pair
        a = (int(a[0]), int(a[1]))
        b = (int(b[0]), int(b[1]))
    except (TypeError, ValueError, IndexError):
        raise ValueError(f"malformed coefficient pair {pair!r}") from None
    for pos in (a, b):
        if not (0 <= pos[0] < n and 0 <= pos[1] < n):
            raise ValueError(f"coefficient position {pos} outside {n}x{n} block")
        if pos == (0, 0):
            raise ValueError("the DC coefficient cannot carry the payload")
    if a == b:
        raise ValueError("coefficient pair positions must be distinct")
    return a, b


def perturbation_constant(coeffs,
                          constants: SsimConstants = DEFAULT_CONSTANTS) -> float:
    """Constant term of the similarity drop caused by an AC-only shift.

    For a block perturbed only in AC coefficients the index becomes
    1 - p / (p + cross + const) where p is the squared perturbation size
    and cross collects the coefficient cross terms. This returns const:
    twice the AC coefficient energy plus the scaled contrast constant.
    Always strictly positive.
    """
    arr = np.asarray(coeffs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square coefficient block, got {arr.shape}")
    n = arr.shape[0]
    total = (arr * arr).sum()
    return float(2.0 * total - 2.0 * arr[0, 0] ** 2 + constants.c2_dct(n))


def ssim_pair_shift(coeffs, eps: float, sigma: float, pair,
                    constants: SsimConstants = DEFAULT_CONSTANTS) -> float:
    """Closed-form similarity after shifting one AC coefficient pair.

    ``eps`` is added to the first pair position and ``sigma`` to the
    second; the block is otherwise untouched. Matches :func:`ssim_dct`
    between the original block and the shifted block.
    """
    arr = np.asarray(coeffs, dtype=np.float64)
    a, b = validate_coeff_pair(pair, arr.shape[0])
    xa = arr[a]
    xb = arr[b]
    pen = eps * eps + sigma * sigma
    den = pen + 2.0 * eps * xa + 2.0 * sigma * xb + perturbation_constant(
        arr, constants)
    return float(1.0 - pen / den)


def window_positions(mode: WindowMode, height: int, width: int):
    """Top-left corners of every window of ``mode`` on a height x width plane.

    Returns (positions, n) with positions in row-major order. Counts per
    mode: disjoint tiles (height * width / 16), dense sliding square
    ((height - n + 1) * (width - n + 1)), centered Gaussian (height *
    width, corners may be negative because the plane is zero-padded), and
    stride-4 8x8 ((height / 4 - 1) * (width / 4 - 1)).
    """
    if height <= 0 or width <= 0:
        raise ValueError("plane dimensions must be positive")
    if mode.kind == "non":
        n = mode.n
        if height % n or width % n:
            raise ValueError(
                f"{height}x{width} plane is not tileable by {n}x{n} blocks")
        positions = [(t, l) for t in range(0, height, n)
                     for l in range(0, width, n)]
    elif mode.kind == "over":
        n = mode.n
        if n > min(height, width):
            raise ValueError(
                f"window size {n} exceeds plane dimensions {height}x{width}")
        positions = [(t, l) for t in range(height - n + 1)
                     for l in range(width - n + 1)]
    elif mode.kind == "gauss":
        n = mode.n
        half = n // 2
        positions = [(i - half, j - half) for i in range(height)
                     for j in range(width)]
    else:
        n = mode.n
        if height % 4 or width % 4:
            raise ValueError(
                f"{height}x{width} plane is not aligned to the 4-pixel grid")
        if height < n or width < n:
            raise ValueError(
                f"plane {height}x{width} is too small for {n}x{n} windows")
        positions = [(t, l) for t in range(0, height - n + 1, 4)
                     for l in range(0, width - n + 1, 4)]
    if not positions:
        raise ValueError(f"no {mode.label} windows fit a {height}x{width} plane")
    return positions, n


def _sliding_sums(arr: np.ndarray, n: int) -> np.ndarray:
    """Sum of every n x n window, via a zero-padded double cumulative sum."""
    c = np.pad(arr, ((1, 0), (1, 0))).cumsum(axis=0).cumsum(axis=1)
    return c[n:, n:] - c[:-n, n:] - c[n:, :-n] + c[:-n, :-n]


def _local_map_uniform(x: np.ndarray, y: np.ndarray, n: int,
                       constants: SsimConstants) -> np.ndarray:
    """Local index at every dense sliding position, uniform weighting."""
    n2 = n * n
    sx = _sliding_sums(x, n)
    sy = _sliding_sums(y, n)
    sxx = _sliding_sums(x * x, n)
    syy = _sliding_sums(y * y, n)
    sxy = _sliding_sums(x * y, n)
    mx = sx / n2
    my = sy / n2
    vx = (sxx - sx * mx) / (n2 - 1)
    vy = (syy - sy * my) / (n2 - 1)
    cov = (sxy - sx * my) / (n2 - 1)
    lum = (2.0 * mx * my + constants.c1) / (mx * mx + my * my + constants.c1)
    cs = (2.0 * cov + constants.c2) / (vx + vy + constants.c2)
    return lum * cs


def _local_map_gaussian(x: np.ndarray, y: np.ndarray,
                        constants: SsimConstants) -> np.ndarray:
    """Local index at every pixel, Gaussian weights, zero-padded borders."""
    w = gaussian_window()
    kw = {"mode": "constant", "cval": 0.0}
    mx = ndimage.correlate(x, w, **kw)
    my = ndimage.correlate(y, w, **kw)
    ex2 = ndimage.correlate(x * x, w, **kw)
    ey2 = ndimage.correlate(y * y, w, **kw)
    exy = ndimage.correlate(x * y, w, **kw)
    vx = ex2 - mx * mx
    vy = ey2 - my * my
    cov = exy - mx * my
    lum = (2.0 * mx * my + constants.c1) / (mx * mx + my * my + constants.c1)
    cs = (2.0 * cov + constants.c2) / (vx + vy + constants.c2)
    return lum * cs


def global_ssim(original: ImagePlane, processed: ImagePlane,
                mode: WindowMode = NON_OVERLAPPED_4,
                constants: SsimConstants = DEFAULT_CONSTANTS) -> SsimReport:
    """Mean local similarity of two planes under one window regime.

    The local index list pairs each window's top-left corner with its
    value, in row-major window order; the mean is taken over exactly the
    windows the regime defines.
    """
    if original.samples.shape != processed.samples.shape:
        raise ValueError(
            f"plane shapes differ: {original.samples.shape} vs "
            f"{processed.samples.shape}")
    x = original.samples
    y = processed.samples
    h, w = x.shape
    positions, n = window_positions(mode, h, w)
    if mode.kind == "non":
        bx = partition_blocks(original, n)
        by = partition_blocks(processed, n)
        values = [ssim_spatial(bx[p, q], by[p, q], constants)
                  for p in range(bx.shape[0]) for q in range(bx.shape[1])]
    elif mode.kind == "over":
        values = _local_map_uniform(x, y, n, constants).ravel().tolist()
    elif mode.kind == "gauss":
        values = _local_map_gaussian(x, y, constants).ravel().tolist()
    else:
        values = [ssim_spatial(x[t:t + n, l:l + n], y[t:t + n, l:l + n],
                               constants) for (t, l) in positions]
    if len(values) != len(positions):
        raise RuntimeError("window enumeration mismatch")
    mean = float(np.mean(values))
    return SsimReport(mode=mode,
                      local_indices=list(zip(positions, values)),
                      mean_ssim=mean)


def measure_all_modes(original: ImagePlane, processed: ImagePlane,
                      constants: SsimConstants = DEFAULT_CONSTANTS) -> dict:
    """Mean similarity under each of the four standard window regimes."""
    return {label: global_ssim(original, processed, mode, constants).mean_ssim
            for label, mode in MEASURE_MODES.items()}


def ssim_cross_matrix(original: ImagePlane, processed_by_label: dict,
                      constants: SsimConstants = DEFAULT_CONSTANTS) -> dict:
    """Cross table: each processed plane measured under every regime.

    ``processed_by_label`` maps an arbitrary label (typically the window
    regime the plane was produced with) to a plane. The result maps each
    label to its per-regime mean similarity row.
    """
    return {label: measure_all_modes(original, plane, constants)
            for label, plane in processed_by_label.items()}
