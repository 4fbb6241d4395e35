"""Binary PGM (P5) reading and writing, 8-bit only.

The writer emits a canonical header (magic, single spaces, newlines, no
comments), rounds half away from zero and clamps to [0, 255], and writes
through a temporary file in the same directory so a crash never leaves a
partial image behind. Reading a canonically written file and saving it
again reproduces the bytes exactly.
"""

from __future__ import annotations

import os
import tempfile

import numpy as np

from .blocks import ImagePlane


class PgmError(ValueError):
    """Malformed PGM input; ``category`` tells the failure class apart."""

    def __init__(self, category: str, message: str):
        super().__init__(message)
        self.category = category


def _tokens(data: bytes):
    """Header tokens: whitespace separated, '#' comments to end of line."""
    i = 0
    n = len(data)
    while i < n:
        c = data[i:i + 1]
        if c.isspace():
            i += 1
            continue
        if c == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
            j += 1
        yield data[i:j], j
        i = j


def load_image(path) -> ImagePlane:
    """Read an 8-bit binary PGM file into an :class:`ImagePlane`."""
    with open(path, "rb") as fh:
        data = fh.read()
    reader = _tokens(data)
    try:
        magic, _ = next(reader)
    except StopIteration:
        raise PgmError("magic", "empty file") from None
    if magic != b"P5":
        raise PgmError("magic", f"not a binary PGM file (magic {magic!r})")
    fields = []
    end = 0
    for _ in range(3):
        try:
            token, end = next(reader)
        except StopIteration:
            raise PgmError("header", "incomplete header") from None
        try:
            fields.append(int(token))
        except ValueError:
            raise PgmError("header",
                           f"non-numeric header field {token!r}") from None
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise PgmError("header", f"invalid dimensions {width}x{height}")
    if maxval != 255:
        raise PgmError("maxval", f"unsupported maxval {maxval}, expected 255")
    # exactly one whitespace byte separates the header from the raster
    if end >= len(data) or not data[end:end + 1].isspace():
        raise PgmError("header", "missing separator before raster data")
    start = end + 1
    need = width * height
    raster = data[start:start + need]
    if len(raster) < need:
        raise PgmError("truncated",
                       f"raster holds {len(raster)} of {need} bytes")
    pixels = np.frombuffer(raster, dtype=np.uint8, count=need)
    return ImagePlane(pixels.reshape(height, width).astype(np.float64))


def quantize(samples: np.ndarray) -> np.ndarray:
    """Round half away from zero and clamp to the 8-bit range."""
    arr = np.asarray(samples, dtype=np.float64)
    rounded = np.trunc(arr + np.copysign(0.5, arr))
    return np.clip(rounded, 0.0, 255.0).astype(np.uint8)


def write_bytes_atomic(path, payload: bytes) -> None:
    """Write bytes through a same-directory temporary file and rename."""
    directory = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def save_image(plane: ImagePlane, path) -> None:
    """Quantize and write a plane as canonical binary PGM."""
    pixels = quantize(plane.samples)
    header = f"P5\n{plane.width} {plane.height}\n255\n".encode("ascii")
    write_bytes_atomic(path, header + pixels.tobytes())
