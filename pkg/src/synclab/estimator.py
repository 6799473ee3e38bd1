"""Fingerprint extraction and drift estimation on delay-Doppler maps.

The static paths of a scene concentrate in a single Doppler row of the map;
that row (the fingerprint) shifts cyclically by (drift_cfo/F_R rows,
drift_to/T_R columns) between frames.  Estimation is a normalized circular
cross-correlation of every candidate row of the new map against the stored
fingerprint, followed by a 2-D argmax and a signed wrap back to drift units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._common import wrap_signed
from .ddmap import DelayDopplerMap
from .scenario import GridSpec


@dataclass(frozen=True, eq=False)
class FingerprintSpectrum:
    """One stored map row plus its energy, the correlation normalizer."""

    values: np.ndarray  # complex128, shape (n_delay_bins,)
    row_index: int
    norm_sq: float  # sum |values|^2, > 0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("fingerprint must be a nonempty 1-D vector")
        if not np.isfinite(self.norm_sq) or self.norm_sq <= 0.0:
            raise ValueError("fingerprint norm must be positive")


@dataclass(frozen=True, eq=False)
class CorrelationMap:
    """Normalized circular cross-correlation, rows = candidate Doppler rows."""

    data: np.ndarray  # complex128, shape (n_rows_searched, n_delay_bins)
    normalizer: float
    row_start: int = 0  # absolute index of data[0] in the source map
    total_rows: int = 0  # Doppler rows of the source map (for wrapping)


@dataclass(frozen=True)
class SyncEstimate:
    row_shift: int  # signed Doppler cells relative to the fingerprint row
    col_shift: int  # signed delay cells
    cfo_drift_hz: float
    to_drift_s: float
    peak_magnitude: float
    peak_to_median_ratio: float
    refined_cfo_drift_hz: float | None = None
    refined_to_drift_s: float | None = None


def _row_energies(ddmap: DelayDopplerMap) -> np.ndarray:
    return np.sum(np.abs(ddmap.data) ** 2, axis=1)


def _peak_spacing_signature(row: np.ndarray, count: int) -> np.ndarray:
    """Sorted cyclic gaps between the row's `count` largest magnitude bins.

    Invariant under cyclic shifts of the row, which is exactly what a static
    fingerprint does between frames, so matching signatures across frames
    singles out the static row even when a mover out-shines it in one frame.
    """
    n = row.size
    count = max(2, min(count, n))
    idx = np.sort(np.argsort(np.abs(row))[-count:])
    gaps = np.diff(np.concatenate([idx, idx[:1] + n]))
    return np.sort(gaps)


def locate_static_row(
    ddmap: DelayDopplerMap,
    static_count_hint: int | None = None,
    companion_maps: tuple[DelayDopplerMap, ...] = (),
) -> int:
    """Pick the Doppler row holding the static fingerprint.

    Default rule: the row with the largest energy (ties go to the lowest
    index).  With a hint and companion maps from other frames, the top rows
    of each map are compared by their peak-spacing signatures and the
    candidate with the most frame-stable structure wins; energy breaks ties.
    """
    energies = _row_energies(ddmap)
    if not np.any(energies > 0.0):
        raise ValueError("map has no energy, cannot locate a static row")
    if static_count_hint is None or not companion_maps:
        return int(np.argmax(energies))

    n_candidates = min(5, energies.size)
    order = np.argsort(energies)[::-1][:n_candidates]
    peaks = max(2, static_count_hint)
    best_row, best_cost = int(order[0]), np.inf
    for rank, row_idx in enumerate(order):
        sig = _peak_spacing_signature(ddmap.data[row_idx], peaks)
        cost = 0.0
        for other in companion_maps:
            other_energy = _row_energies(other)
            cand = np.argsort(other_energy)[::-1][: min(5, other_energy.size)]
            dists = [
                float(np.abs(sig - _peak_spacing_signature(other.data[r], peaks)).sum())
                for r in cand
            ]
            cost += min(dists)
        # strictly better cost wins; equal cost keeps the higher-energy row
        if cost < best_cost - 1e-12:
            best_row, best_cost = int(row_idx), cost
    return best_row


def extract_fingerprint(ddmap: DelayDopplerMap, row_index: int) -> FingerprintSpectrum:
    if not 0 <= row_index < ddmap.n_doppler_bins:
        raise ValueError(f"row {row_index} out of range")
    row = np.array(ddmap.data[row_index, :])
    norm_sq = float(np.sum(np.abs(row) ** 2))
    if norm_sq <= 0.0:
        raise ValueError("fingerprint row has zero energy")
    return FingerprintSpectrum(values=row, row_index=row_index, norm_sq=norm_sq)


def cross_correlate(
    ddmap: DelayDopplerMap,
    fingerprint: FingerprintSpectrum,
    row_range: tuple[int, int] | None = None,
) -> CorrelationMap:
    """Sliding circular correlation of map rows against the fingerprint.

    A[i, q] = sum_p map[i, (q + p) mod n] * conj(fp[p]) / ||fp||^2, computed
    per row with FFTs.  row_range = (start, count) restricts and cyclically
    wraps the row search; default searches every row.
    """
    n_rows, n_cols = ddmap.data.shape
    if fingerprint.values.size != n_cols:
        raise ValueError(
            f"fingerprint has {fingerprint.values.size} bins, map rows have {n_cols}"
        )
    if fingerprint.norm_sq <= 0.0:
        raise ValueError("fingerprint norm must be positive")
    if row_range is None:
        start, count = 0, n_rows
    else:
        start, count = int(row_range[0]), int(row_range[1])
        if count < 1 or count > n_rows:
            raise ValueError(f"row count {count} out of range")
        start %= n_rows
    rows = ddmap.data[(start + np.arange(count)) % n_rows, :]
    # circular correlation via the DFT: corr = ifft(fft(row) * conj(fft(fp)))
    spectra = np.fft.fft(rows, axis=1) * np.conj(np.fft.fft(fingerprint.values))[None, :]
    data = np.fft.ifft(spectra, axis=1) / fingerprint.norm_sq
    return CorrelationMap(data=data, normalizer=fingerprint.norm_sq, row_start=start, total_rows=n_rows)


def _parabolic_offset(m_prev: float, m_zero: float, m_next: float) -> float:
    denom = m_prev - 2.0 * m_zero + m_next
    if denom >= 0.0:  # flat or not a local max, no refinement
        return 0.0
    return 0.5 * (m_prev - m_next) / denom


def estimate_offsets(
    correlation: CorrelationMap,
    grid: GridSpec,
    fingerprint_row: int,
    refine: bool = False,
) -> SyncEstimate:
    """Argmax of |A| mapped to signed drift cells and physical drift units.

    Ties resolve lexicographically (first row, then column).  Shifts wrap to
    the signed interval (-n/2, n/2].  With refine=True a three-point
    parabolic fit on the peak magnitude adds sub-cell refined estimates; the
    integer-cell fields are never altered by refinement.
    """
    mag = np.abs(correlation.data)
    if mag.size == 0:
        raise ValueError("empty correlation map")
    total_rows = correlation.total_rows or mag.shape[0]
    r_local, q = np.unravel_index(int(np.argmax(mag)), mag.shape)
    row_abs = (correlation.row_start + int(r_local)) % total_rows
    row_shift = wrap_signed(row_abs - fingerprint_row, total_rows)
    n_cols = mag.shape[1]
    col_shift = wrap_signed(int(q), n_cols)
    peak = float(mag[r_local, q])
    median = float(np.median(mag))
    ratio = peak / median if median > 0.0 else np.inf

    refined_cfo = refined_to = None
    if refine:
        row_frac = 0.0
        if mag.shape[0] == total_rows:  # full row search wraps cleanly
            row_frac = _parabolic_offset(
                float(mag[(r_local - 1) % mag.shape[0], q]),
                peak,
                float(mag[(r_local + 1) % mag.shape[0], q]),
            )
        col_frac = _parabolic_offset(
            float(mag[r_local, (q - 1) % n_cols]),
            peak,
            float(mag[r_local, (q + 1) % n_cols]),
        )
        refined_cfo = (row_shift + row_frac) * grid.f_r
        refined_to = (col_shift + col_frac) * grid.t_r
    return SyncEstimate(
        row_shift=int(row_shift),
        col_shift=int(col_shift),
        cfo_drift_hz=float(row_shift * grid.f_r),
        to_drift_s=float(col_shift * grid.t_r),
        peak_magnitude=peak,
        peak_to_median_ratio=float(ratio),
        refined_cfo_drift_hz=refined_cfo,
        refined_to_drift_s=refined_to,
    )
