"""Delay-Doppler maps: windowed zero-padded 2D transform and MUSIC surrogate.

Both methods share one frequency convention: the transform applies the
unnormalized synthesis kernel exp(+2j*pi*..) along both axes (``n * ifft``),
so a snapshot ramp exp(-2j*pi*f*g) peaks at row +f on the padded grid.
Positive CFO/TO therefore show up at positive row/column indices, wrapping
cyclically.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

from ._kernels import music_denominator
from .channel import SnapshotMatrix
from .scenario import GridSpec
from .windows import Window, make_window

_MAP_MAGIC = b"SYNCDMAP"
_METHOD_CODES = {"fft2d": 0, "music": 1}
_METHOD_NAMES = {v: k for k, v in _METHOD_CODES.items()}

# relative floor that declares a smoothed covariance rank-deficient
_RANK_RTOL = 1e-12

# relative denominator floor of the pseudospectrum. Caps the needle peaks so
# their heights stay comparable between noise realizations: raw subspace dips
# swing over orders of magnitude, which would randomize any correlation
# between two frames' rows while leaving the peak positions intact. Also
# keeps noiseless on-grid peaks finite.
_PSD_FLOOR = 1e-3


class RankDeficientCovariance(ValueError):
    """Smoothed covariance cannot support the requested model order."""


@dataclass(frozen=True, eq=False)
class DelayDopplerMap:
    """Map over (Doppler rows, delay columns); grid carries the cell sizes."""

    data: np.ndarray  # complex128, shape (n_doppler_bins, n_delay_bins)
    method: str  # "fft2d" | "music"
    grid: GridSpec

    def __post_init__(self):
        if self.method not in _METHOD_CODES:
            raise ValueError(f"unknown map method {self.method!r}")
        if self.data.shape != (self.grid.n_doppler_bins, self.grid.n_delay_bins):
            raise ValueError("map shape does not match its grid")

    @property
    def n_doppler_bins(self) -> int:
        return self.data.shape[0]

    @property
    def n_delay_bins(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class SubarrayConfig:
    """Spatial-smoothing controls for music_map; None picks floor(2n/3)."""

    delay_subarray: int | None = None
    doppler_subarray: int | None = None
    forward_backward: bool = True


def _normalized_grid(n_doppler: int, n_delay: int) -> GridSpec:
    # unit-free fallback: one cell = one cycle over the padded span
    return GridSpec(t_r=1.0 / n_delay, f_r=1.0 / n_doppler, n_delay_bins=n_delay, n_doppler_bins=n_doppler)


def zero_pad(snapshot: SnapshotMatrix, k_pad: int) -> np.ndarray:
    """Place the snapshot in the top-left of a (k_pad*G, k_pad*N_c) zero matrix."""
    if k_pad < 1:
        raise ValueError("k_pad must be >= 1")
    g_sym, n_c = snapshot.data.shape
    out = np.zeros((k_pad * g_sym, k_pad * n_c), dtype=np.complex128)
    out[:g_sym, :n_c] = snapshot.data
    return out


def transform_fft2d(
    snapshot: SnapshotMatrix,
    win_g: Window,
    win_nc: Window,
    k_pad: int,
    grid: GridSpec | None = None,
) -> DelayDopplerMap:
    """Windowed, zero-padded, unnormalized 2-D synthesis transform.

    Scaling: data = (KG*KN_c) * ifft2(padded), i.e. the literal double sum
    with the exp(+2j*pi) kernel and no 1/N factors, so map energy is
    KG*KN_c times the windowed snapshot energy (Parseval, tested).
    """
    g_sym, n_c = snapshot.data.shape
    if len(win_g) != g_sym:
        raise ValueError(f"symbol window has {len(win_g)} taps, snapshot has {g_sym} rows")
    if len(win_nc) != n_c:
        raise ValueError(f"subcarrier window has {len(win_nc)} taps, snapshot has {n_c} columns")
    windowed = SnapshotMatrix(
        data=snapshot.data * win_g.taps[:, None] * win_nc.taps[None, :],
        frame_id=snapshot.frame_id,
        offsets_applied=snapshot.offsets_applied,
    )
    padded = zero_pad(windowed, k_pad)
    rows, cols = padded.shape
    data = np.fft.ifft2(padded) * (rows * cols)
    if grid is None:
        grid = _normalized_grid(rows, cols)
    elif (grid.n_doppler_bins, grid.n_delay_bins) != (rows, cols):
        raise ValueError("grid bin counts do not match the padded transform size")
    return DelayDopplerMap(data=data, method="fft2d", grid=grid)


def dtft_oracle(snapshot: SnapshotMatrix, win_g: Window, win_nc: Window, freq) -> complex:
    """Direct double-sum transform at one normalized frequency pair.

    freq = (f_sym, f_sub) in cycles per sample along each axis.  O(G*N_c)
    per call; exists to cross-check transform_fft2d, not for production use.
    """
    f_sym, f_sub = float(freq[0]), float(freq[1])
    g_sym, n_c = snapshot.data.shape
    if len(win_g) != g_sym or len(win_nc) != n_c:
        raise ValueError("window lengths do not match the snapshot")
    g = np.arange(g_sym)
    n = np.arange(n_c)
    phase = np.exp(2j * np.pi * (f_sym * g[:, None] + f_sub * n[None, :]))
    return complex(np.sum(win_g.taps[:, None] * win_nc.taps[None, :] * snapshot.data * phase))


def _smoothed_covariance(matrix: np.ndarray, subarray: int, forward_backward: bool) -> np.ndarray:
    """Average outer products over all length-`subarray` sliding segments of each row."""
    n = matrix.shape[1]
    if not 1 <= subarray <= n:
        raise ValueError(f"subarray length {subarray} invalid for axis of size {n}")
    segs = np.lib.stride_tricks.sliding_window_view(matrix, subarray, axis=1)
    snaps = segs.reshape(-1, subarray)
    cov = (snaps.T @ snaps.conj()) / snaps.shape[0]
    if forward_backward:
        cov = 0.5 * (cov + cov.conj()[::-1, ::-1])
    return cov


def _axis_pseudospectrum(matrix: np.ndarray, subarray: int, model_order: int,
                         forward_backward: bool, n_grid: int) -> np.ndarray:
    cov = _smoothed_covariance(matrix, subarray, forward_backward)
    w = cov.shape[0]
    if model_order >= w:
        raise ValueError(f"model_order {model_order} must be below the subarray length {w}")
    trace = float(np.trace(cov).real)
    if not np.isfinite(trace) or trace <= 0.0:
        raise RankDeficientCovariance("covariance has no energy")
    evals, evecs = np.linalg.eigh(cov)  # ascending
    if evals[-model_order] <= _RANK_RTOL * evals[-1]:
        raise RankDeficientCovariance(
            f"covariance rank below requested model order {model_order}"
        )
    noise_subspace = evecs[:, : w - model_order]
    denom = music_denominator(noise_subspace, n_grid)
    denom = denom + _PSD_FLOOR * float(np.mean(denom))
    return 1.0 / denom


def music_map(
    snapshot: SnapshotMatrix,
    grid: GridSpec,
    model_order: int,
    smoothing: SubarrayConfig | None = None,
) -> DelayDopplerMap:
    """Separable per-axis MUSIC pseudospectrum on the padded grid.

    Delay axis: symbol rows are snapshots, smoothed over subcarrier
    subarrays.  Doppler axis: subcarrier columns are snapshots, smoothed
    over symbol subarrays.  The 2-D map is the outer product of the two
    peak-normalized pseudospectra, rescaled so its peak matches the
    rectangular-window fft2d peak of the same snapshot.  That makes it a
    display/selection surrogate, not a joint estimator, which is all the
    downstream correlation uses.
    """
    if model_order < 1:
        raise ValueError("model_order must be >= 1")
    smoothing = smoothing or SubarrayConfig()
    g_sym, n_c = snapshot.data.shape
    if grid.n_doppler_bins % g_sym or grid.n_delay_bins % n_c:
        raise ValueError("grid bin counts must be integer multiples of the snapshot shape")
    k_row = grid.n_doppler_bins // g_sym
    k_col = grid.n_delay_bins // n_c
    if k_row != k_col:
        raise ValueError("padding factor differs between axes")

    sub_delay = smoothing.delay_subarray or (2 * n_c) // 3
    sub_doppler = smoothing.doppler_subarray or (2 * g_sym) // 3
    psd_delay = _axis_pseudospectrum(
        snapshot.data, sub_delay, model_order, smoothing.forward_backward, grid.n_delay_bins
    )
    psd_doppler = _axis_pseudospectrum(
        snapshot.data.T, sub_doppler, model_order, smoothing.forward_backward, grid.n_doppler_bins
    )

    rect_g = make_window("rectangular", g_sym)
    rect_nc = make_window("rectangular", n_c)
    reference = transform_fft2d(snapshot, rect_g, rect_nc, k_row, grid=grid)
    peak_scale = float(np.max(np.abs(reference.data)))
    outer = np.outer(psd_doppler / psd_doppler.max(), psd_delay / psd_delay.max())
    return DelayDopplerMap(
        data=(outer * peak_scale).astype(np.complex128),
        method="music",
        grid=grid,
    )


def extract_cut(ddmap: DelayDopplerMap, axis: str, index: int) -> np.ndarray:
    """One row ("doppler" fixed) or one column ("delay" fixed) of the map."""
    if axis == "row":
        if not 0 <= index < ddmap.n_doppler_bins:
            raise ValueError(f"row {index} out of range")
        return np.array(ddmap.data[index, :])
    if axis == "col":
        if not 0 <= index < ddmap.n_delay_bins:
            raise ValueError(f"column {index} out of range")
        return np.array(ddmap.data[:, index])
    raise ValueError("axis must be 'row' or 'col'")


def write_cut_csv(ddmap: DelayDopplerMap, axis: str, index: int, path) -> None:
    """CSV of one map cut: bin index, real, imag, magnitude."""
    cut = extract_cut(ddmap, axis, index)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin", "re", "im", "abs"])
        for i, v in enumerate(cut):
            writer.writerow([i, repr(float(v.real)), repr(float(v.imag)), repr(float(abs(v)))])


def save_map(ddmap: DelayDopplerMap, path) -> None:
    """Little-endian dump: u4 rows, u4 cols, u4 method, f8 t_r, f8 f_r, then c8 row-major."""
    rows, cols = ddmap.data.shape
    header = _MAP_MAGIC + struct.pack(
        "<IIIdd", rows, cols, _METHOD_CODES[ddmap.method], ddmap.grid.t_r, ddmap.grid.f_r
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(ddmap.data, dtype=np.complex64).tobytes())


def load_map(path) -> DelayDopplerMap:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(_MAP_MAGIC)] != _MAP_MAGIC:
        raise ValueError("not a delay-Doppler map dump")
    off = len(_MAP_MAGIC)
    rows, cols, code, t_r, f_r = struct.unpack_from("<IIIdd", blob, off)
    off += struct.calcsize("<IIIdd")
    if code not in _METHOD_NAMES:
        raise ValueError(f"unknown method code {code}")
    expected = rows * cols * 8
    if len(blob) - off != expected:
        raise ValueError(f"map payload is {len(blob) - off} bytes, expected {expected}")
    data = np.frombuffer(blob, dtype="<c8", count=rows * cols, offset=off)
    grid = GridSpec(t_r=t_r, f_r=f_r, n_delay_bins=cols, n_doppler_bins=rows)
    return DelayDopplerMap(
        data=data.reshape(rows, cols).astype(np.complex128),
        method=_METHOD_NAMES[code],
        grid=grid,
    )
