"""Gradient-histogram entropy analysis, lossless gradient-domain codec,
and gradient-pair density rendering for grayscale images."""

from .delcore import (Deldensity2D, EntropyReport, GradientField, ImageGrid,
                      compute_gradient, deldensity, delentropy,
                      invert_gradient_fullrate, isotropy_report, moments2d,
                      quincunx_pair_density, sample_moments2d,
                      spectral_moments2d, support_bound)
from .entropy1d import (Density1D, backward_difference, delentropy1d,
                        histogram1d, moments1d, reconstruct1d,
                        shannon_entropy, spectral_variance1d)
from .errors import (DelcodecError, DimensionError, EdgeModeError,
                     EncodingError, FormatError, LostFrequencyError,
                     UnsafeContainerError)
from .codec import (EncodedImage, bits_per_pixel, decode,
                    decode_with_diagnostics, encode, parse, serialize)
from .formats import SyntheticSpec, read_pgm, synthesize, write_pgm
from .renderer import (DensityImage, RenderConfig, density_from_bytes,
                       density_to_bytes, l1_distance, render, render_binned,
                       render_fourier, tone_map_export)
from .spectral import (KernelSpec, SpectrumGrid, dft_forward, dft_inverse,
                       get_kernel, multiplier_of, shift_half_half)

__version__ = "0.1.0"

__all__ = [
    "Deldensity2D", "EntropyReport", "GradientField", "ImageGrid",
    "compute_gradient", "deldensity", "delentropy",
    "invert_gradient_fullrate", "isotropy_report", "moments2d",
    "quincunx_pair_density", "sample_moments2d", "spectral_moments2d",
    "support_bound",
    "Density1D", "backward_difference", "delentropy1d", "histogram1d",
    "moments1d", "reconstruct1d", "shannon_entropy", "spectral_variance1d",
    "DelcodecError", "DimensionError", "EdgeModeError", "EncodingError",
    "FormatError", "LostFrequencyError", "UnsafeContainerError",
    "EncodedImage", "bits_per_pixel", "decode", "decode_with_diagnostics",
    "encode", "parse", "serialize",
    "SyntheticSpec", "read_pgm", "synthesize", "write_pgm",
    "DensityImage", "RenderConfig", "density_from_bytes", "density_to_bytes",
    "l1_distance", "render", "render_binned", "render_fourier",
    "tone_map_export",
    "KernelSpec", "SpectrumGrid", "dft_forward", "dft_inverse", "get_kernel",
    "multiplier_of", "shift_half_half",
    "__version__",
]
