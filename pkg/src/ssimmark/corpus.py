"""Deterministic synthetic test images, stratified by detail level.

Five 24x24 planes cover the spectrum from perfectly flat to white noise,
plus a larger 48x48 plane of smooth overlapping hills whose block-to-block
shading changes make independently optimized neighbors visibly disagree
at high strengths. Pixel values keep a margin to the 8-bit limits so
moderate embedding strengths never push the output past them. Everything
is seeded, so the corpus is identical on every run and every machine.
``python -m ssimmark.corpus OUTDIR`` writes the images as PGM files.
"""

from __future__ import annotations

import numpy as np

from .blocks import ImagePlane

CORPUS_SIZE = 24
HILLS_SIZE = 48
_LO, _HI = 48.0, 208.0

LOW_DETAIL = ("flat", "gradient", "blobs", "hills")
HIGH_DETAIL = ("texture", "noise")


def _rescale(arr: np.ndarray) -> np.ndarray:
    lo, hi = arr.min(), arr.max()
    if hi - lo < 1e-12:
        return np.full_like(arr, (_LO + _HI) / 2.0)
    return _LO + (_HI - _LO) * (arr - lo) / (hi - lo)


def flat(size: int = CORPUS_SIZE) -> ImagePlane:
    """Constant plane; zero variance everywhere."""
    return ImagePlane(np.full((size, size), 128.0))


def gradient(size: int = CORPUS_SIZE) -> ImagePlane:
    """Smooth diagonal ramp; low detail."""
    i, j = np.mgrid[0:size, 0:size].astype(np.float64)
    return ImagePlane(_rescale(i + j))


def blobs(size: int = CORPUS_SIZE) -> ImagePlane:
    """A few overlapping smooth humps; mid-level detail."""
    i, j = np.mgrid[0:size, 0:size].astype(np.float64)
    centers = [(size * 0.3, size * 0.25, size * 0.22),
               (size * 0.7, size * 0.6, size * 0.3),
               (size * 0.25, size * 0.8, size * 0.18)]
    acc = np.zeros((size, size))
    for (ci, cj, rad) in centers:
        acc += np.exp(-((i - ci) ** 2 + (j - cj) ** 2) / (2.0 * rad ** 2))
    return ImagePlane(_rescale(acc))


def hills(size: int = HILLS_SIZE, seed: int = 5, count: int = 4) -> ImagePlane:
    """Smooth overlapping humps with varied orientation and polarity.

    Gradient direction turns every few blocks, so at high strengths the
    per-block optima disagree across block borders. This is the plane to
    look at for the windowed modes' smoothing effect.
    """
    rng = np.random.default_rng(seed)
    i, j = np.mgrid[0:size, 0:size].astype(np.float64) / size
    acc = np.zeros((size, size))
    for _ in range(count):
        ci, cj = rng.uniform(0.1, 0.9, 2)
        amp = rng.uniform(0.4, 1.0) * rng.choice([-1.0, 1.0])
        spread = rng.uniform(0.15, 0.35)
        acc += amp * np.exp(-((i - ci) ** 2 + (j - cj) ** 2)
                            / (2.0 * spread ** 2))
    acc -= acc.min()
    acc /= acc.max()
    return ImagePlane(40.0 + 176.0 * acc)


def texture(size: int = CORPUS_SIZE) -> ImagePlane:
    """Crossed sinusoids; dense mid-frequency detail."""
    i, j = np.mgrid[0:size, 0:size].astype(np.float64)
    pattern = np.sin(2.0 * np.pi * i / 5.0) * np.cos(2.0 * np.pi * j / 7.0) \
        + 0.5 * np.sin(2.0 * np.pi * (i + j) / 3.0)
    return ImagePlane(_rescale(pattern))


def noise(size: int = CORPUS_SIZE, seed: int = 20240117) -> ImagePlane:
    """Seeded uniform noise; highest detail."""
    rng = np.random.default_rng(seed)
    return ImagePlane(rng.uniform(_LO, _HI, size=(size, size)))


def corpus_images(size: int = CORPUS_SIZE) -> dict:
    """All corpus planes keyed by name, lowest detail first."""
    return {
        "flat": flat(size),
        "gradient": gradient(size),
        "blobs": blobs(size),
        "hills": hills(),
        "texture": texture(size),
        "noise": noise(size),
    }


def _main(argv=None) -> int:
    import argparse

    from .pgm import save_image

    parser = argparse.ArgumentParser(
        description="write the synthetic corpus as PGM files")
    parser.add_argument("outdir")
    parser.add_argument("--size", type=int, default=CORPUS_SIZE)
    args = parser.parse_args(argv)
    import os
    os.makedirs(args.outdir, exist_ok=True)
    for name, plane in corpus_images(args.size).items():
        save_image(plane, os.path.join(args.outdir, f"{name}.pgm"))
    return 0


if __name__ == "__main__":
    raise SystemExit(_main())
