"""Netpbm PGM (binary P5) I/O and deterministic synthetic test images.

16-bit rasters are big-endian per the Netpbm spec.  Synthetic generators
are bit-reproducible: the noise generators use numpy's PCG64 seeded
explicitly.
"""

from dataclasses import dataclass

import numpy as np

from .delcore import ImageGrid
from .errors import FormatError

_MAX_HEADER_TOKEN = 32

GENERATORS = ("constant", "wedge-horizontal", "checkerboard",
              "uniform-noise", "stripes", "lowpass-noise")


@dataclass
class SyntheticSpec:
    generator: str
    width: int
    height: int
    bit_depth: int = 8
    value: int = 0  # constant level / checkerboard amplitude
    seed: int = 0
    period: int = 8  # stripes
    radius: int = 4  # lowpass-noise smoothing radius

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}")
        if self.width < 1 or self.height < 1:
            raise ValueError("dimensions must be positive")
        if self.bit_depth not in (8, 16):
            raise ValueError("bit depth must be 8 or 16")


def _skip_whitespace_and_comments(data: bytes, pos: int) -> int:
    n = len(data)
    while pos < n:
        c = data[pos:pos + 1]
        if c == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    return pos


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    pos = _skip_whitespace_and_comments(data, pos)
    start = pos
    n = len(data)
    while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
        pos += 1
        if pos - start > _MAX_HEADER_TOKEN:
            raise FormatError("oversized header token")
    if pos == start:
        raise FormatError("truncated PGM header")
    return data[start:pos], pos


def read_pgm(data: bytes) -> ImageGrid:
    if data[:2] != b"P5" or (len(data) > 2 and not data[2:3].isspace()
                             and data[2:3] != b"#"):
        raise FormatError("bad magic: not a binary PGM (P5) file")
    pos = 2
    fields = []
    for _ in range(3):
        token, pos = _read_token(data, pos)
        try:
            fields.append(int(token))
        except ValueError:
            raise FormatError(f"non-numeric PGM header field {token!r}")
    width, height, maxval = fields
    if width < 1 or height < 1 or width > 1 << 16 or height > 1 << 16:
        raise FormatError(f"bad PGM dimensions {width}x{height}")
    if not 1 <= maxval <= 65535:
        raise FormatError(f"maxval {maxval} outside 1..65535")
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise FormatError("missing whitespace before raster")
    pos += 1
    bytes_per = 2 if maxval > 255 else 1
    need = width * height * bytes_per
    raster = data[pos:pos + need]
    if len(raster) < need:
        raise FormatError("truncated raster")
    if len(data) > pos + need:
        raise FormatError("trailing bytes after raster")
    dtype = ">u2" if bytes_per == 2 else np.uint8
    pixels = np.frombuffer(raster, dtype=dtype).astype(np.int64)
    pixels = pixels.reshape(height, width)
    if pixels.max(initial=0) > maxval:
        raise FormatError("raster value exceeds maxval")
    return ImageGrid(pixels, 16 if maxval > 255 else 8)


def write_pgm(image: ImageGrid) -> bytes:
    maxval = (1 << image.bit_depth) - 1
    header = f"P5\n{image.width} {image.height}\n{maxval}\n".encode()
    dtype = ">u2" if image.bit_depth == 16 else np.uint8
    return header + image.pixels.astype(dtype).tobytes()


def synthesize(spec: SyntheticSpec) -> ImageGrid:
    h, w, depth = spec.height, spec.width, spec.bit_depth
    maxval = (1 << depth) - 1
    if spec.generator == "constant":
        if not 0 <= spec.value <= maxval:
            raise ValueError(f"constant level {spec.value} outside bit range")
        pixels = np.full((h, w), spec.value, dtype=np.int64)
    elif spec.generator == "wedge-horizontal":
        if w > maxval + 1:
            raise ValueError(f"wedge width {w} exceeds {depth}-bit range")
        pixels = np.tile(np.arange(w, dtype=np.int64), (h, 1))
    elif spec.generator == "checkerboard":
        c = spec.value or maxval
        if not 0 <= c <= maxval:
            raise ValueError(f"checkerboard amplitude {c} outside bit range")
        pixels = c * ((np.add.outer(np.arange(h), np.arange(w)) % 2).astype(np.int64))
    elif spec.generator == "stripes":
        if spec.period < 1:
            raise ValueError("stripe period must be >= 1")
        pixels = maxval * ((np.arange(w, dtype=np.int64) // spec.period) % 2)
        pixels = np.tile(pixels, (h, 1))
    elif spec.generator == "uniform-noise":
        rng = np.random.default_rng(spec.seed)
        pixels = rng.integers(0, maxval + 1, size=(h, w), dtype=np.int64)
    else:  # lowpass-noise: box-averaged noise, rounded back to integers
        rng = np.random.default_rng(spec.seed)
        raw = rng.integers(0, maxval + 1, size=(h, w)).astype(np.float64)
        r = max(int(spec.radius), 1)
        kern = np.ones(2 * r + 1) / (2 * r + 1)
        for axis in (0, 1):
            raw = np.apply_along_axis(
                lambda v: np.convolve(np.pad(v, r, mode="wrap"), kern,
                                      mode="valid"), axis, raw)
        pixels = np.clip(np.rint(raw), 0, maxval).astype(np.int64)
    return ImageGrid(pixels, depth)
