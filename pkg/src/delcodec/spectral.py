"""Centered discrete Fourier engine and gradient-kernel multipliers.

Conventions used throughout the package:

* Spatial grids are numpy arrays of shape ``(H, W)`` indexed ``grid[m, n]``
  with the spatial origin at index ``(0, 0)``.
* Spectra are stored centered: the value at frequency ``(k, l)`` lives at
  array index ``(k + H//2, l + W//2)``, with ``k in [-H/2, H/2)`` along
  axis 0 and ``l in [-W/2, W/2)`` along axis 1.  Both dimensions must be
  even.
* The forward transform carries the ``1/(H*W)`` factor (``1/(4MN)`` for a
  2M x 2N grid, ``1/(2M)`` in 1D); the inverse carries none.  Under this
  convention the spectral value at ``(0, 0)`` equals the spatial mean.
* Kernel application is correlation: output site ``(m, n)`` reads pixels
  ``(m..m+1, n..n+1)``.  The matching multiplier is
  ``G(k, l) = sum_ab taps[a, b] * exp(+2*pi*i*(a*k/H + b*l/W))`` so that
  circular correlation equals pointwise multiplication of centered spectra.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, EdgeModeError

#: Relative threshold below which a multiplier value counts as a zero.
ZERO_EPS = 1e-9


@dataclass
class SpectrumGrid:
    """Complex spectrum with centered frequency indexing."""

    values: np.ndarray  # complex, shape (H, W), index (k + H//2, l + W//2)
    scaled: bool = True  # True when the 1/(H*W) forward factor is included

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def at(self, k: int, l: int) -> complex:
        """Value at centered frequency (k, l)."""
        return complex(self.values[k + self.height // 2, l + self.width // 2])


@dataclass
class KernelSpec:
    """A discrete gradient kernel: 2x2 integer taps or the exact
    spectral derivative ("fourier")."""

    kernel_id: str  # "a" | "c" | "fourier"
    taps_x: np.ndarray | None = field(default=None)
    taps_y: np.ndarray | None = field(default=None)
    range_factor: int = 1  # per-component bound is range_factor*(2^depth - 1)


def _taps_a() -> tuple[np.ndarray, np.ndarray]:
    # fx(m,n) = f(m,n+1) - f(m+1,n); fy(m,n) = f(m,n) - f(m+1,n+1)
    tx = np.array([[0, 1], [-1, 0]], dtype=np.int64)
    ty = np.array([[1, 0], [0, -1]], dtype=np.int64)
    return tx, ty


def _taps_c() -> tuple[np.ndarray, np.ndarray]:
    # fx(m,n) = [f(m+1,n+1)+f(m+1,n)] - [f(m,n+1)+f(m,n)]
    # fy(m,n) = [f(m+1,n+1)-f(m+1,n)] + [f(m,n+1)-f(m,n)]
    tx = np.array([[-1, -1], [1, 1]], dtype=np.int64)
    ty = np.array([[-1, 1], [-1, 1]], dtype=np.int64)
    return tx, ty


KERNEL_A = KernelSpec("a", *_taps_a(), range_factor=1)
KERNEL_C = KernelSpec("c", *_taps_c(), range_factor=2)
KERNEL_FOURIER = KernelSpec("fourier", None, None, range_factor=2)

_KERNELS = {"a": KERNEL_A, "c": KERNEL_C, "fourier": KERNEL_FOURIER}


def get_kernel(kernel_id) -> KernelSpec:
    if isinstance(kernel_id, KernelSpec):
        return kernel_id
    try:
        return _KERNELS[str(kernel_id).lower()]
    except KeyError:
        raise ValueError(f"unknown kernel id: {kernel_id!r}")


def _check_even_dims(shape):
    if len(shape) != 2:
        raise DimensionError(f"expected a 2D grid, got shape {shape}")
    h, w = shape
    if h < 2 or w < 2 or h % 2 or w % 2:
        raise DimensionError(f"dimensions must be even and >= 2, got {h}x{w}")


def dft_forward(grid: np.ndarray) -> SpectrumGrid:
    """Centered forward DFT with the 1/(H*W) factor."""
    grid = np.asarray(grid)
    _check_even_dims(grid.shape)
    vals = np.fft.fftshift(np.fft.fft2(grid)) / grid.size
    return SpectrumGrid(vals, scaled=True)


def dft_inverse(spec: SpectrumGrid) -> np.ndarray:
    """Exact inverse of dft_forward; returns a complex grid."""
    vals = spec.values
    _check_even_dims(vals.shape)
    scale = vals.size if spec.scaled else 1.0
    return np.fft.ifft2(np.fft.ifftshift(vals)) * scale


def dft_inverse_real(spec: SpectrumGrid) -> tuple[np.ndarray, float]:
    """Inverse transform returning (real grid, max |imaginary residual|)."""
    out = dft_inverse(spec)
    return out.real, float(np.max(np.abs(out.imag)))


def dft_forward_1d(signal: np.ndarray) -> np.ndarray:
    """1D forward DFT, natural (numpy) frequency order, 1/N factor."""
    signal = np.asarray(signal)
    return np.fft.fft(signal) / signal.shape[0]


def dft_inverse_1d(spectrum: np.ndarray) -> np.ndarray:
    return np.fft.ifft(spectrum) * spectrum.shape[0]


def _embed_taps(taps: np.ndarray, shape, modulate: bool) -> np.ndarray:
    emb = np.zeros(shape, dtype=np.float64)
    emb[:2, :2] = taps
    if modulate:
        emb[1, :2] *= -1
        emb[:2, 1] *= -1
    return emb


def _tap_multiplier(taps: np.ndarray, shape, modulate: bool = False) -> np.ndarray:
    emb = _embed_taps(taps, shape, modulate)
    # conj turns the e^{-2pi i} forward DFT of real taps into the
    # e^{+2pi i} sum required by the correlation convention.
    return np.conj(np.fft.fftshift(np.fft.fft2(emb)))


def _fourier_multipliers(shape) -> tuple[np.ndarray, np.ndarray]:
    h, w = shape
    k = np.arange(-h // 2, h // 2, dtype=np.float64)
    l = np.arange(-w // 2, w // 2, dtype=np.float64)
    gx = 2j * np.pi * (k / h)[:, None] * np.ones(w)[None, :]
    gy = 2j * np.pi * np.ones(h)[:, None] * (l / w)[None, :]
    # the odd multiplier has no self-consistent value at the Nyquist
    # crossover, so it is forced to zero there
    gx[0, :] = 0.0
    gy[:, 0] = 0.0
    return gx, gy


def multiplier_of(kernel, shape) -> tuple[SpectrumGrid, SpectrumGrid]:
    """Centered spectral multipliers (Gx, Gy) of a kernel on a given grid."""
    kernel = get_kernel(kernel)
    _check_even_dims(shape)
    if kernel.kernel_id == "fourier":
        gx, gy = _fourier_multipliers(shape)
    else:
        gx = _tap_multiplier(kernel.taps_x, shape)
        gy = _tap_multiplier(kernel.taps_y, shape)
    return SpectrumGrid(gx, scaled=False), SpectrumGrid(gy, scaled=False)


def shift_half_half(kernel, shape) -> tuple[SpectrumGrid, SpectrumGrid]:
    """Multipliers shifted by half the sampling rate in both axes,
    computed by checkerboard modulation of the taps.  Equals the plain
    multipliers rolled by (H/2, W/2)."""
    kernel = get_kernel(kernel)
    _check_even_dims(shape)
    if kernel.kernel_id == "fourier":
        gx, gy = _fourier_multipliers(shape)
        gx = np.roll(gx, (shape[0] // 2, shape[1] // 2), axis=(0, 1))
        gy = np.roll(gy, (shape[0] // 2, shape[1] // 2), axis=(0, 1))
    else:
        gx = _tap_multiplier(kernel.taps_x, shape, modulate=True)
        gy = _tap_multiplier(kernel.taps_y, shape, modulate=True)
    return SpectrumGrid(gx, scaled=False), SpectrumGrid(gy, scaled=False)


def correlate_taps(grid: np.ndarray, taps: np.ndarray, edge: str) -> np.ndarray:
    """Apply a 2x2 tap array as a correlation.

    edge="valid" shrinks the output by one in each axis; edge="circular"
    wraps and keeps the full shape.
    """
    grid = np.asarray(grid)
    h, w = grid.shape
    if h < 2 or w < 2:
        raise DimensionError(f"grid too small for a 2x2 kernel: {h}x{w}")
    if edge == "valid":
        out = np.zeros((h - 1, w - 1), dtype=np.result_type(grid, taps))
        for a in range(2):
            for b in range(2):
                if taps[a, b]:
                    out += taps[a, b] * grid[a:h - 1 + a, b:w - 1 + b]
        return out
    if edge == "circular":
        _check_even_dims(grid.shape)
        out = np.zeros((h, w), dtype=np.result_type(grid, taps))
        for a in range(2):
            for b in range(2):
                if taps[a, b]:
                    out += taps[a, b] * np.roll(grid, (-a, -b), axis=(0, 1))
        return out
    raise EdgeModeError(f"unknown edge mode: {edge!r}")
