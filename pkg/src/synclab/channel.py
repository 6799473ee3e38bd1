"""Snapshot synthesis for a single receive antenna.

Builds the per-antenna matrix of compensated OFDM symbols: each path
contributes a rank-one term (Doppler phase ramp across symbols) x (delay
phase ramp across subcarriers), scaled by a complex path amplitude that
folds in the carrier phase, array responses and precoding.  Synthesis runs
the data through the modulate / compensate round trip rather than writing
the rank-one sum down directly, so data-dependent effects (and the exact
per-sample mode) have somewhere to live.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

from .scenario import OffsetState, Scenario, steering_vector

_UNIT_MAGNITUDE_TOL = 1e-9

_SNAPSHOT_MAGIC = b"SYNCSNAP"


@dataclass(frozen=True)
class DataSymbols:
    """One OFDM symbol's worth of frequency-domain data, |c_n| = 1."""

    symbols: np.ndarray  # complex128, shape (n_c,)
    constellation: str = "qpsk"

    def __post_init__(self):
        sym = np.asarray(self.symbols, dtype=np.complex128)
        object.__setattr__(self, "symbols", sym)
        if sym.ndim != 1 or sym.size == 0:
            raise ValueError("data symbols must be a nonempty 1-D vector")


@dataclass(frozen=True, eq=False)
class SnapshotMatrix:
    """Compensated symbols for one antenna, rows = symbols, cols = subcarriers."""

    data: np.ndarray  # complex128, shape (g_symbols, n_c)
    frame_id: int = 0
    offsets_applied: OffsetState = OffsetState()

    @property
    def n_symbols(self) -> int:
        return self.data.shape[0]

    @property
    def n_subcarriers(self) -> int:
        return self.data.shape[1]


def random_qpsk(n: int, rng: np.random.Generator) -> DataSymbols:
    """Uniform QPSK symbols on the unit circle (Gray labelling irrelevant here)."""
    quadrant = rng.integers(0, 4, size=n)
    phases = (2.0 * quadrant + 1.0) * (np.pi / 4.0)
    return DataSymbols(np.exp(1j * phases), constellation="qpsk")


def unit_symbols(n: int) -> DataSymbols:
    """All-ones data, handy when the round trip should be exactly transparent."""
    return DataSymbols(np.ones(n, dtype=np.complex128), constellation="unit")


def path_amplitude(scenario: Scenario, path_index: int, antenna_index: int | None = None) -> complex:
    """Complex amplitude of one path at one receive antenna.

    Combines the propagation gain, the carrier phase picked up by the total
    delay (time offset plus path delay), the receive steering entry, and the
    transmit steering contracted with the precoder.
    """
    if not 0 <= path_index < len(scenario.paths):
        raise ValueError(f"path_index {path_index} out of range")
    m = scenario.antenna_index if antenna_index is None else antenna_index
    if not 0 <= m < scenario.array.m_r:
        raise ValueError(f"antenna_index {m} out of range")
    path = scenario.paths[path_index]
    arr = scenario.array
    carrier = np.exp(-2j * np.pi * scenario.ofdm.f_c * (scenario.offsets.to + path.delay))
    omega_r = steering_vector(arr.m_r, arr.spacing, arr.wavelength, path.aoa)[m]
    omega_t = steering_vector(arr.m_t, arr.spacing, arr.wavelength, path.aod)
    tx_gain = complex(omega_t @ arr.precoder)
    return complex(path.gain * carrier * omega_r * tx_gain)


def doppler_vector(scenario: Scenario, path_index: int) -> np.ndarray:
    """Phase ramp across OFDM symbols from path Doppler plus CFO.

    Symbol g is stamped at g*t_sym + t_cp, so a zero-delay-zero-Doppler
    snapshot still carries the CP phase of the residual CFO.
    """
    if not 0 <= path_index < len(scenario.paths):
        raise ValueError(f"path_index {path_index} out of range")
    ofdm = scenario.ofdm
    path = scenario.paths[path_index]
    f_eff = path.doppler_hz(ofdm.f_c) + scenario.offsets.cfo  # Hz
    g = np.arange(ofdm.g_symbols)
    return np.exp(-2j * np.pi * f_eff * (g * ofdm.t_sym + ofdm.t_cp))


def delay_vector(scenario: Scenario, path_index: int) -> np.ndarray:
    """Per-subcarrier phase ramp from the total delay (offset + path)."""
    if not 0 <= path_index < len(scenario.paths):
        raise ValueError(f"path_index {path_index} out of range")
    ofdm = scenario.ofdm
    path = scenario.paths[path_index]
    total_delay = scenario.offsets.to + path.delay  # seconds
    n = np.arange(ofdm.n_c)
    return np.exp(-2j * np.pi * n * ofdm.delta_f * total_delay)


def _noise(shape, sigma_sq: float, rng: np.random.Generator) -> np.ndarray:
    scale = np.sqrt(sigma_sq / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def synth_snapshot(
    scenario: Scenario,
    data: DataSymbols | None = None,
    frame_id: int = 0,
    exact: bool = False,
) -> SnapshotMatrix:
    """Synthesize the compensated snapshot for the scenario's antenna.

    The frequency-domain path sum is modulated onto the data (diagonal data
    matrix, then unitary IFFT), and immediately compensated (unitary FFT,
    then divide the data back out).  With the per-symbol phase approximation
    the round trip is exact, which is the point: the compensated matrix is
    the rank-one path sum plus white noise.

    With ``exact=True`` the Doppler/CFO phase rotates continuously across the
    samples inside each symbol instead of being frozen at the symbol start,
    which leaks a small inter-carrier error; use it to measure how good the
    approximation is.

    Noise is complex white Gaussian with variance ``scenario.noise_variance``
    per entry, drawn from a stream keyed by (scenario.seed, frame_id) so the
    same frame is reproducible independently of call order.
    """
    scenario.require_valid()
    ofdm = scenario.ofdm
    g_sym, n_c = ofdm.g_symbols, ofdm.n_c
    rng = np.random.default_rng(np.random.SeedSequence([scenario.seed & 0xFFFFFFFF, frame_id & 0xFFFFFFFF]))
    if data is None:
        data = random_qpsk(n_c, rng)
    c = np.asarray(data.symbols, dtype=np.complex128)
    if c.shape != (n_c,):
        raise ValueError(f"data symbols length {c.size} does not match n_c={n_c}")
    if np.max(np.abs(np.abs(c) - 1.0)) > _UNIT_MAGNITUDE_TOL:
        raise ValueError("data symbols must have unit magnitude")

    amps = np.array(
        [path_amplitude(scenario, l, scenario.antenna_index) for l in range(len(scenario.paths))]
    )
    delays = np.stack([delay_vector(scenario, l) for l in range(len(scenario.paths))])

    if not exact:
        dopplers = np.stack([doppler_vector(scenario, l) for l in range(len(scenario.paths))])
        # rank-one sum in the subcarrier domain, one row per symbol
        freq = np.einsum("l,lg,ln->gn", amps, dopplers, delays)
        time = np.fft.ifft(freq * c[None, :], axis=1, norm="ortho")
    else:
        if ofdm.t_sam is None:
            raise ValueError("exact synthesis needs a sample interval")
        g = np.arange(g_sym)
        u = np.arange(n_c)
        # sample clock after CP removal: t = g*t_sym + t_cp + u*t_sam
        time = np.zeros((g_sym, n_c), dtype=np.complex128)
        for l, path in enumerate(scenario.paths):
            f_eff = path.doppler_hz(ofdm.f_c) + scenario.offsets.cfo
            tx = np.fft.ifft(c * delays[l], norm="ortho")  # delayed waveform, one symbol
            phase = np.exp(-2j * np.pi * f_eff * (g[:, None] * ofdm.t_sym + ofdm.t_cp + u[None, :] * ofdm.t_sam))
            time += amps[l] * phase * tx[None, :]
    comp = np.fft.fft(time, axis=1, norm="ortho") / c[None, :]
    if scenario.noise_variance > 0.0:
        comp = comp + _noise((g_sym, n_c), scenario.noise_variance, rng)
    return SnapshotMatrix(data=comp, frame_id=frame_id, offsets_applied=scenario.offsets)


def noiseless(scenario: Scenario) -> Scenario:
    """Copy of the scenario with the noise turned off."""
    return replace(scenario, noise_variance=0.0)


def save_snapshot(snapshot: SnapshotMatrix, path) -> None:
    """Write a snapshot as little-endian binary: u4 rows, u4 cols, i8 frame id, c8 row-major."""
    g_sym, n_c = snapshot.data.shape
    header = _SNAPSHOT_MAGIC + struct.pack("<IIq", g_sym, n_c, snapshot.frame_id)
    payload = np.ascontiguousarray(snapshot.data, dtype=np.complex64).tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def load_snapshot(path) -> SnapshotMatrix:
    """Inverse of save_snapshot. Offsets are not stored and come back as zeros."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(_SNAPSHOT_MAGIC)] != _SNAPSHOT_MAGIC:
        raise ValueError("not a snapshot dump")
    off = len(_SNAPSHOT_MAGIC)
    g_sym, n_c, frame_id = struct.unpack_from("<IIq", blob, off)
    off += struct.calcsize("<IIq")
    expected = g_sym * n_c * 8
    if len(blob) - off != expected:
        raise ValueError(f"snapshot payload is {len(blob) - off} bytes, expected {expected}")
    data = np.frombuffer(blob, dtype="<c8", count=g_sym * n_c, offset=off)
    return SnapshotMatrix(
        data=data.reshape(g_sym, n_c).astype(np.complex128),
        frame_id=frame_id,
    )
