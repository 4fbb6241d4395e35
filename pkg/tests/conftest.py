import numpy as np
import pytest

from ssimmark import ImagePlane
from ssimmark.pgm import save_image


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture
def random_plane(rng):
    """A 24x24 plane of mid-range noise, block aligned."""
    return ImagePlane(rng.uniform(48.0, 208.0, size=(24, 24)))


@pytest.fixture
def pgm_file(tmp_path, random_plane):
    """The random plane saved as an 8-bit PGM file."""
    path = tmp_path / "plane.pgm"
    save_image(random_plane, path)
    return path


def random_coeff_block(rng, n=4, lo=0.0, hi=255.0):
    """DCT coefficients of a random pixel block."""
    from ssimmark import dct2
    return dct2(rng.uniform(lo, hi, size=(n, n)))
