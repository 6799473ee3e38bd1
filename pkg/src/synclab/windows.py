"""Window taps, zero-padded spectra and mainlobe/sidelobe measurements.

All spectra here (and the 2-D maps built elsewhere) use the synthesis-kernel
convention exp(+2j*pi*k*n/N) without normalization, i.e. N*ifft.  Under that
convention a phase ramp exp(-2j*pi*f*n) peaks at bin +f, so positive drifts
land at positive bins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

WINDOW_KINDS = ("rectangular", "hann", "hamming", "blackman")


class AmbiguousPeakError(ValueError):
    """Raised when a spectrum has no unique magnitude peak to center on."""


@dataclass(frozen=True, eq=False)
class Window:
    """Real symmetric taps stored as complex128 so they drop into the synthesis path."""

    taps: np.ndarray
    kind: str

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.complex128)
        object.__setattr__(self, "taps", taps)
        if taps.ndim != 1 or taps.size < 2:
            raise ValueError("window needs at least 2 taps")

    def __len__(self) -> int:
        return self.taps.size


@dataclass(frozen=True)
class SpectrumMetrics:
    mainlobe_width_bins: float  # -3 dB width, padded bins
    null_to_null_bins: float  # distance between first nulls, padded bins
    peak_sidelobe_db: float  # highest magnitude outside the nulls, dB rel. peak


def make_window(kind: str, length: int) -> Window:
    """Symmetric cosine-family taps; endpoint-inclusive denominators (length-1)."""
    if length < 2:
        raise ValueError("window length must be at least 2")
    if kind not in WINDOW_KINDS:
        raise ValueError(f"unknown window kind {kind!r}, expected one of {WINDOW_KINDS}")
    k = np.arange(length)
    x = 2.0 * np.pi * k / (length - 1)
    if kind == "rectangular":
        taps = np.ones(length)
    elif kind == "hann":
        taps = 0.5 - 0.5 * np.cos(x)
    elif kind == "hamming":
        taps = 0.54 - 0.46 * np.cos(x)
    else:  # blackman
        taps = 0.42 - 0.5 * np.cos(x) + 0.08 * np.cos(2.0 * x)
    return Window(taps=taps, kind=kind)


def padded_spectrum(window: Window, k_pad: int) -> np.ndarray:
    """Unnormalized synthesis DFT of the taps on a k_pad-times-denser grid."""
    if k_pad < 1:
        raise ValueError("k_pad must be >= 1")
    n = k_pad * len(window)
    return n * np.fft.ifft(window.taps, n)


def circular_autocorrelation(spectrum: np.ndarray) -> np.ndarray:
    """rho[q] = sum_p spectrum[(p+q) mod n] * conj(spectrum[p]), via the DFT."""
    spec = np.asarray(spectrum, dtype=np.complex128)
    if spec.ndim != 1 or spec.size == 0:
        raise ValueError("spectrum must be a nonempty 1-D vector")
    return np.fft.ifft(np.abs(np.fft.fft(spec)) ** 2)


def _fractional_crossing(mag: np.ndarray, center: int, threshold: float, step: int) -> float:
    """Distance from center to the linear-interpolated threshold crossing."""
    n = mag.size
    prev = mag[center]
    for k in range(1, n // 2 + 1):
        cur = mag[(center + step * k) % n]
        if cur < threshold <= prev:
            frac = (prev - threshold) / (prev - cur)
            return (k - 1) + frac
        prev = cur
    return float(n // 2)  # never crossed inside the half span


def _first_null(mag: np.ndarray, center: int, step: int, peak: float) -> float:
    """Offset of the first local minimum below -40 dB of peak (strict min as fallback)."""
    n = mag.size
    deep = peak * 10.0 ** (-40.0 / 20.0)
    fallback = None
    for k in range(1, n // 2):
        prev = mag[(center + step * (k - 1)) % n]
        cur = mag[(center + step * k) % n]
        nxt = mag[(center + step * (k + 1)) % n]
        if cur < prev and cur <= nxt:
            if cur <= deep:
                return float(k)
            if fallback is None and cur < nxt:
                fallback = float(k)
    if fallback is not None:
        return fallback
    return float(n // 2)


def mainlobe_metrics(spectrum: np.ndarray) -> SpectrumMetrics:
    """Measure -3 dB width, null-to-null width and peak sidelobe of one spectrum.

    The spectrum is treated as circular: the peak is located, the magnitude is
    walked outward in both directions, and widths are the sums of the two
    one-sided distances.  The -3 dB edges are linearly interpolated between
    samples; nulls snap to sample positions.
    """
    mag = np.abs(np.asarray(spectrum))
    if mag.ndim != 1 or mag.size < 4:
        raise ValueError("spectrum must be a 1-D vector with at least 4 bins")
    peak = mag.max()
    if peak <= 0.0:
        raise AmbiguousPeakError("all-zero spectrum has no peak")
    if np.count_nonzero(mag == peak) > 1:
        raise AmbiguousPeakError("magnitude peak is not unique")
    center = int(np.argmax(mag))

    half_power = peak * 10.0 ** (-3.0 / 20.0)
    width = _fractional_crossing(mag, center, half_power, +1) + _fractional_crossing(
        mag, center, half_power, -1
    )
    null_right = _first_null(mag, center, +1, peak)
    null_left = _first_null(mag, center, -1, peak)

    n = mag.size
    offsets = (np.arange(n) - center) % n
    inside = (offsets <= null_right) | (offsets >= n - null_left)
    outside = mag[~inside]
    if outside.size == 0:
        sidelobe_db = -np.inf
    else:
        top = outside.max()
        sidelobe_db = -np.inf if top <= 0.0 else 20.0 * np.log10(top / peak)
    return SpectrumMetrics(
        mainlobe_width_bins=float(width),
        null_to_null_bins=float(null_left + null_right),
        peak_sidelobe_db=float(sidelobe_db),
    )


def rank_windows(windows, k_pad: int) -> list[Window]:
    """Stable sort by -3 dB mainlobe width, then by peak sidelobe level."""
    def key(w: Window):
        m = mainlobe_metrics(padded_spectrum(w, k_pad))
        return (m.mainlobe_width_bins, m.peak_sidelobe_db)

    return sorted(windows, key=key)
