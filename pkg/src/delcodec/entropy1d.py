"""1D signal entropy, finite-difference delentropy, and derivative inversion.

The default edge mode for entropy reporting is "valid" (difference of
length N-1); all Fourier identities require "circular" so that the
difference mean is exactly zero and Parseval is exact.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, EdgeModeError, LostFrequencyError


@dataclass
class Density1D:
    """Integer-binned histogram: counts[v - imin] occurrences of value v."""

    imin: int
    counts: np.ndarray  # int64, counts[i] for value imin + i
    total: int

    @property
    def imax(self) -> int:
        return self.imin + len(self.counts) - 1

    def weights(self) -> np.ndarray:
        return self.counts / self.total

    def values(self) -> np.ndarray:
        return np.arange(self.imin, self.imin + len(self.counts))


@dataclass
class MomentSet1D:
    mean: float
    raw_second: float
    variance: float


def histogram1d(signal) -> Density1D:
    signal = np.asarray(signal)
    if signal.size == 0:
        raise ValueError("cannot histogram an empty signal")
    vals = signal.astype(np.int64).ravel()
    imin = int(vals.min())
    counts = np.bincount(vals - imin)
    return Density1D(imin, counts.astype(np.int64), int(vals.size))


def shannon_entropy(density) -> float:
    """Entropy in bits of a normalized integer-binned density.

    Accepts anything with ``counts`` (any shape) and ``total``.
    """
    counts = np.asarray(density.counts, dtype=np.float64).ravel()
    total = float(density.total)
    if total <= 0 or abs(counts.sum() - total) > 1e-9 * max(total, 1.0):
        raise ValueError("density is not normalized: counts do not sum to total")
    p = counts[counts > 0] / total
    return float(-np.sum(p * np.log2(p))) + 0.0


def backward_difference(signal, edge: str = "valid") -> np.ndarray:
    """f(n) - f(n-1); "valid" yields length N-1, "circular" wraps (length N)."""
    signal = np.asarray(signal, dtype=np.int64).ravel()
    if signal.size < 2:
        raise DimensionError("need at least 2 samples to difference")
    if edge == "valid":
        return signal[1:] - signal[:-1]
    if edge == "circular":
        return signal - np.roll(signal, 1)
    raise EdgeModeError(f"unknown edge mode: {edge!r}")


def delentropy1d(signal, edge: str = "valid") -> float:
    """Entropy in bits of the finite-difference histogram."""
    return shannon_entropy(histogram1d(backward_difference(signal, edge)))


def moments1d(density: Density1D) -> MomentSet1D:
    w = density.weights()
    v = density.values().astype(np.float64)
    mean = float(np.dot(v, w))
    raw2 = float(np.dot(v * v, w))
    return MomentSet1D(mean, raw2, raw2 - mean * mean)


def _diff2_multiplier(n: int) -> np.ndarray:
    # backward difference f(n) - f(n-1) in natural fft frequency order
    k = np.arange(n)
    return 1.0 - np.exp(-2j * np.pi * k / n)


def _fourier_multiplier_1d(n: int) -> np.ndarray:
    u = np.fft.fftfreq(n)
    g = 2j * np.pi * u
    if n % 2 == 0:
        g[n // 2] = 0.0  # Nyquist crossover of the odd multiplier
    return g


_MULTIPLIERS_1D = {"diff2": _diff2_multiplier, "fourier": _fourier_multiplier_1d}


def spectral_variance1d(signal, edge: str = "circular") -> float:
    """Variance of the circular difference computed in the Fourier domain.

    Equals ``moments1d(histogram1d(backward_difference(signal,
    "circular"))).variance`` by Parseval.  Valid-mode input is rejected:
    the identity only holds with wraparound.
    """
    if edge != "circular":
        raise EdgeModeError("spectral_variance1d requires circular edge mode")
    signal = np.asarray(signal, dtype=np.float64).ravel()
    n = signal.size
    spec = np.fft.fft(signal) / n
    g = _diff2_multiplier(n)
    # mean of the circular difference is exactly 0 (G(0) = 0)
    return float(np.sum(np.abs(g * spec) ** 2))


def reconstruct1d(derivative, dc: float, kernel: str = "diff2",
                  nyquist: complex | None = None) -> np.ndarray:
    """Invert a circular-mode derivative by Fourier division.

    ``dc`` is the stored mean of the original signal.  For the "fourier"
    kernel the Nyquist bin is irrecoverable; pass ``nyquist`` to restore
    it, otherwise that component is absent from the output.
    """
    derivative = np.asarray(derivative, dtype=np.float64).ravel()
    n = derivative.size
    try:
        g = _MULTIPLIERS_1D[kernel](n)
    except KeyError:
        raise ValueError(f"unknown 1D kernel: {kernel!r}")
    spec_d = np.fft.fft(derivative) / n
    out = np.zeros(n, dtype=np.complex128)
    lost = np.abs(g) < 1e-12 * max(np.max(np.abs(g)), 1.0)
    out[~lost] = spec_d[~lost] / g[~lost]
    out[0] = dc
    for idx in np.nonzero(lost)[0]:
        if idx == 0:
            continue
        if nyquist is not None and n % 2 == 0 and idx == n // 2:
            out[idx] = nyquist
        elif abs(spec_d[idx]) > 1e-9 * max(np.max(np.abs(spec_d)), 1.0):
            raise LostFrequencyError(
                f"derivative has content at zero-multiplier bin {idx} "
                "and no replacement was supplied")
    return np.fft.ifft(out).real * n


def integrate_causal(derivative, first: float) -> np.ndarray:
    """Cumulative sum from the left; derivative has length N-1."""
    d = np.asarray(derivative)
    out = np.empty(d.size + 1, dtype=np.result_type(d, np.int64))
    out[0] = first
    np.cumsum(d, out=out[1:])
    out[1:] += first
    return out


def integrate_anticausal(derivative, last: float) -> np.ndarray:
    """Cumulative sum from the right end."""
    d = np.asarray(derivative)
    out = np.empty(d.size + 1, dtype=np.result_type(d, np.int64))
    out[-1] = last
    tail = np.cumsum(d[::-1])[::-1]
    out[:-1] = last - tail
    return out


def symmetric_integrate1d(derivative, first: float, last: float) -> np.ndarray:
    """Average of the causal and anti-causal cumulative sums.

    Exact on integer inputs when both endpoints are consistent with the
    derivative.
    """
    d = np.asarray(derivative)
    causal = integrate_causal(d, first).astype(np.float64)
    anti = integrate_anticausal(d, last).astype(np.float64)
    return (causal + anti) / 2.0
