"""2D gradient fields, deldensity, delentropy, moment/spectrum identities,
isotropy diagnostics, and full-rate inverse-gradient reconstruction.

Defaults follow the analysis conventions: kernel "a" with valid edges for
entropy reporting; circular edges are mandatory for every spectral
identity and for the codec.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .entropy1d import Density1D, shannon_entropy
from .errors import DimensionError, EdgeModeError, LostFrequencyError
from .spectral import KernelSpec, dft_forward, get_kernel


@dataclass
class ImageGrid:
    """Integer grayscale raster with an 8- or 16-bit range."""

    pixels: np.ndarray  # int array, shape (H, W)
    bit_depth: int = 8

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels)
        if self.pixels.ndim != 2:
            raise DimensionError("image must be 2D")
        if self.bit_depth not in (8, 16):
            raise ValueError(f"bit depth must be 8 or 16, got {self.bit_depth}")
        maxval = (1 << self.bit_depth) - 1
        if self.pixels.size and (self.pixels.min() < 0 or self.pixels.max() > maxval):
            raise ValueError(f"pixel values outside [0, {maxval}]")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass
class GradientField:
    """Partial-derivative pair plus the kernel and edge mode that made it."""

    fx: np.ndarray
    fy: np.ndarray
    kernel: KernelSpec
    edge: str
    source_shape: tuple[int, int]


@dataclass
class Deldensity2D:
    """Joint integer-binned histogram of (fx, fy) pairs."""

    imin: int  # fx axis (axis 0 of counts)
    jmin: int  # fy axis (axis 1 of counts)
    counts: np.ndarray  # int64, shape (I, J)
    total: int

    def weights(self) -> np.ndarray:
        return self.counts / self.total

    def marginal_fx(self) -> Density1D:
        return Density1D(self.imin, self.counts.sum(axis=1), self.total)

    def marginal_fy(self) -> Density1D:
        return Density1D(self.jmin, self.counts.sum(axis=0), self.total)


@dataclass
class MomentSet2D:
    mean_x: float
    mean_y: float
    var_xx: float
    var_yy: float
    cov_xy: float


@dataclass
class EntropyReport:
    zeroth_order_bits: int
    h_pixel: float
    h_fx: float
    h_fy: float
    h_joint: float
    h_delentropy: float  # h_joint halved when pgs is set, else h_joint
    h_quincunx_pairs: float | None
    tau: float
    support_bound_bits: float | None
    kernel_id: str
    edge: str
    pgs: bool


def compute_gradient(image, kernel="a", edge: str = "valid") -> GradientField:
    """Partial derivatives of an image under the given 2x2 kernel (or the
    exact spectral derivative, which requires circular mode)."""
    kernel = get_kernel(kernel)
    pixels = image.pixels if isinstance(image, ImageGrid) else np.asarray(image)
    if pixels.ndim != 2 or pixels.shape[0] < 2 or pixels.shape[1] < 2:
        raise DimensionError("image must be 2D with both dimensions >= 2")
    if kernel.kernel_id == "fourier":
        if edge != "circular":
            raise EdgeModeError("the fourier kernel only supports circular mode")
        gx, gy = spectral.multiplier_of(kernel, pixels.shape)
        spec = dft_forward(pixels.astype(np.float64))
        fx = spectral.dft_inverse(spectral.SpectrumGrid(gx.values * spec.values)).real
        fy = spectral.dft_inverse(spectral.SpectrumGrid(gy.values * spec.values)).real
    else:
        src = pixels.astype(np.int64)
        fx = spectral.correlate_taps(src, kernel.taps_x, edge)
        fy = spectral.correlate_taps(src, kernel.taps_y, edge)
    return GradientField(fx, fy, kernel, edge, pixels.shape)


def deldensity(grad: GradientField) -> Deldensity2D:
    fx = np.asarray(grad.fx, dtype=np.int64).ravel()
    fy = np.asarray(grad.fy, dtype=np.int64).ravel()
    if fx.size == 0:
        raise ValueError("gradient field is empty")
    return _pair_density(fx, fy)


def _pair_density(fx: np.ndarray, fy: np.ndarray) -> Deldensity2D:
    imin, imax = int(fx.min()), int(fx.max())
    jmin, jmax = int(fy.min()), int(fy.max())
    ni, nj = imax - imin + 1, jmax - jmin + 1
    flat = (fx - imin) * nj + (fy - jmin)
    counts = np.bincount(flat, minlength=ni * nj).reshape(ni, nj)
    return Deldensity2D(imin, jmin, counts.astype(np.int64), int(fx.size))


def quincunx_pair_density(grad: GradientField) -> Deldensity2D | None:
    """Pair histogram over (fx at even-parity sites, fy one site to the
    right), mirroring the codec's sampling.  None when the field's
    dimensions preclude the wrap pairing (odd width or height)."""
    fx = np.asarray(grad.fx, dtype=np.int64)
    fy = np.asarray(grad.fy, dtype=np.int64)
    h, w = fx.shape
    if h % 2 or w % 2:
        return None
    mask = _parity_mask(h, w, even=True)
    fy_right = np.roll(fy, -1, axis=1)
    return _pair_density(fx[mask], fy_right[mask])


def _parity_mask(h: int, w: int, even: bool) -> np.ndarray:
    par = (np.add.outer(np.arange(h), np.arange(w)) % 2) == 0
    return par if even else ~par


def delentropy(image, kernel="a", edge: str = "valid", pgs: bool = True) -> EntropyReport:
    """Full entropy report for an image: first-order histogram entropy,
    component and joint gradient entropies, the halved (generalized
    sampling) delentropy, and the quincunx pair-symbol variant."""
    if not isinstance(image, ImageGrid):
        image = ImageGrid(np.asarray(image))
    kernel = get_kernel(kernel)
    from .entropy1d import histogram1d

    h_pixel = shannon_entropy(histogram1d(image.pixels.ravel()))
    grad = compute_gradient(image, kernel, edge)
    if kernel.kernel_id == "fourier":
        grad = GradientField(np.rint(grad.fx).astype(np.int64),
                             np.rint(grad.fy).astype(np.int64),
                             kernel, edge, grad.source_shape)
    dd = deldensity(grad)
    h_fx = shannon_entropy(dd.marginal_fx())
    h_fy = shannon_entropy(dd.marginal_fy())
    h_joint = shannon_entropy(dd)
    qdd = quincunx_pair_density(grad)
    h_pairs = shannon_entropy(qdd) if qdd is not None else None
    tau = float(np.sqrt(np.max(
        np.asarray(grad.fx, dtype=np.float64) ** 2
        + np.asarray(grad.fy, dtype=np.float64) ** 2)))
    bound = support_bound(tau)[0] if tau > 0 else None
    return EntropyReport(
        zeroth_order_bits=image.bit_depth,
        h_pixel=h_pixel,
        h_fx=h_fx,
        h_fy=h_fy,
        h_joint=h_joint,
        h_delentropy=h_joint / 2.0 if pgs else h_joint,
        h_quincunx_pairs=h_pairs,
        tau=tau,
        support_bound_bits=bound,
        kernel_id=kernel.kernel_id,
        edge=edge,
        pgs=pgs,
    )


def moments2d(dd: Deldensity2D) -> MomentSet2D:
    if dd.total <= 0:
        raise ValueError("empty density")
    w = dd.weights()
    i = np.arange(dd.imin, dd.imin + w.shape[0], dtype=np.float64)
    j = np.arange(dd.jmin, dd.jmin + w.shape[1], dtype=np.float64)
    wi = w.sum(axis=1)
    wj = w.sum(axis=0)
    mi = float(np.dot(i, wi))
    mj = float(np.dot(j, wj))
    var_xx = float(np.dot((i - mi) ** 2, wi))
    var_yy = float(np.dot((j - mj) ** 2, wj))
    cov = float((i - mi) @ w @ (j - mj))
    return MomentSet2D(mi, mj, var_xx, var_yy, cov)


def sample_moments2d(grad: GradientField) -> MomentSet2D:
    """Moments computed directly from the gradient samples; equal to
    moments2d of the deldensity by the integer sifting identity."""
    fx = np.asarray(grad.fx, dtype=np.float64).ravel()
    fy = np.asarray(grad.fy, dtype=np.float64).ravel()
    mx, my = float(fx.mean()), float(fy.mean())
    return MomentSet2D(mx, my,
                       float(((fx - mx) ** 2).mean()),
                       float(((fy - my) ** 2).mean()),
                       float(((fx - mx) * (fy - my)).mean()))


def spectral_moments2d(image, kernel="a", edge: str = "circular") -> MomentSet2D:
    """Second moments of the gradient via Parseval with the kernel's own
    discrete multipliers; exact match to circular-mode sample moments."""
    if edge != "circular":
        raise EdgeModeError("spectral moments require circular edge mode")
    pixels = image.pixels if isinstance(image, ImageGrid) else np.asarray(image)
    kernel = get_kernel(kernel)
    gx, gy = spectral.multiplier_of(kernel, pixels.shape)
    spec = dft_forward(pixels.astype(np.float64)).values
    dx = gx.values * spec
    dy = gy.values * spec
    # difference kernels annihilate constants, so both gradient means are 0
    var_xx = float(np.sum(np.abs(dx) ** 2))
    var_yy = float(np.sum(np.abs(dy) ** 2))
    cov = float(np.sum((dx * np.conj(dy)).real))
    return MomentSet2D(0.0, 0.0, var_xx, var_yy, cov)


def support_bound(tau: float) -> tuple[float, float]:
    """(raw, halved) upper bound in bits for a deldensity supported on a
    disc of radius tau."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    raw = math.log2(math.pi * tau * tau)
    return raw, raw / 2.0


@dataclass
class IsotropyReport:
    shell_radii: np.ndarray  # normalized frequency (cycles/sample)
    magnitude_deviation: np.ndarray  # per shell, relative to shell mean
    phase_deviation: np.ndarray  # per shell, radians after offset removal
    max_magnitude_deviation: float
    max_phase_deviation: float


def isotropy_report(kernel, shape, n_shells: int = 8) -> IsotropyReport:
    """Deviation of |Gx + i*Gy|/rho from radial symmetry and of its phase
    from the azimuthal angle, over shells below half the Nyquist
    frequency."""
    if shape[0] < 16 or shape[1] < 16:
        raise DimensionError("isotropy diagnostics need dims >= 16")
    kernel = get_kernel(kernel)
    gx, gy = spectral.multiplier_of(kernel, shape)
    gc = gx.values + 1j * gy.values
    h, w = shape
    u = np.arange(-h // 2, h // 2) / h
    v = np.arange(-w // 2, w // 2) / w
    uu, vv = np.meshgrid(u, v, indexing="ij")
    rho = np.hypot(uu, vv)
    azim = np.arctan2(vv, uu)
    edges = np.linspace(0, 0.25, n_shells + 1)
    radii, mag_dev, ph_dev = [], [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (rho > max(lo, 1e-12)) & (rho <= hi)
        if not np.any(sel):
            continue
        # normalize out the radial growth so a perfectly isotropic
        # derivative (|G| proportional to rho) scores zero deviation
        mags = np.abs(gc[sel]) / rho[sel]
        mean_mag = mags.mean()
        radii.append((lo + hi) / 2)
        mag_dev.append(float(np.max(np.abs(mags - mean_mag)) / mean_mag)
                       if mean_mag > 0 else 0.0)
        # remove the constant phase offset circularly, then take the worst
        diff = np.angle(gc[sel]) - azim[sel]
        offset = np.angle(np.mean(np.exp(1j * diff)))
        wrapped = np.angle(np.exp(1j * (diff - offset)))
        ph_dev.append(float(np.max(np.abs(wrapped))))
    radii = np.array(radii)
    mag_dev = np.array(mag_dev)
    ph_dev = np.array(ph_dev)
    return IsotropyReport(radii, mag_dev, ph_dev,
                          float(mag_dev.max()), float(ph_dev.max()))


def gradient_multiplier_zeros(kernel, shape, eps: float = spectral.ZERO_EPS):
    """Centered (k, l) pairs where |Gx + i*Gy| vanishes (up to eps of the
    maximum); these frequencies are lost to full-rate inversion."""
    kernel = get_kernel(kernel)
    gx, gy = spectral.multiplier_of(kernel, shape)
    gc = np.abs(gx.values + 1j * gy.values)
    ks, ls = np.nonzero(gc < eps * gc.max())
    return [(int(k - shape[0] // 2), int(l - shape[1] // 2)) for k, l in zip(ks, ls)]


def invert_gradient_fullrate(grad: GradientField, dc: float,
                             replacements: dict | None = None) -> np.ndarray:
    """Recover the image from a full-rate circular gradient by dividing
    (Fx + i*Fy) by (Gx + i*Gy).

    ``replacements`` maps centered (k, l) pairs to spectral values for the
    bins where the complex multiplier vanishes; the DC bin is always set
    from ``dc``.  A zero bin with nonzero derivative content and no
    replacement raises LostFrequencyError.
    """
    if grad.edge != "circular":
        raise EdgeModeError("full-rate inversion requires a circular gradient")
    replacements = dict(replacements or {})
    fx = np.asarray(grad.fx, dtype=np.float64)
    fy = np.asarray(grad.fy, dtype=np.float64)
    h, w = fx.shape
    gx, gy = spectral.multiplier_of(grad.kernel, (h, w))
    gc = gx.values + 1j * gy.values
    d = dft_forward(fx).values + 1j * dft_forward(fy).values
    absgc = np.abs(gc)
    lost = absgc < spectral.ZERO_EPS * absgc.max()
    spec = np.zeros_like(d)
    spec[~lost] = d[~lost] / gc[~lost]
    dmax = max(float(np.max(np.abs(d))), 1.0)
    for k, l in zip(*np.nonzero(lost)):
        kk, ll = int(k - h // 2), int(l - w // 2)
        if (kk, ll) == (0, 0):
            spec[k, l] = dc
        elif (kk, ll) in replacements:
            spec[k, l] = replacements[(kk, ll)]
        elif abs(d[k, l]) > 1e-9 * dmax:
            raise LostFrequencyError(
                f"gradient has content at lost frequency ({kk}, {ll}) "
                "and no replacement was supplied")
    return spectral.dft_inverse(spectral.SpectrumGrid(spec)).real
