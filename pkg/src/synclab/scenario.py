"""Physical and simulation parameters for the passive-sensing simulator.

A Scenario bundles the OFDM numerology, the antenna arrays, the multipath
list and the receiver clock-offset state. Everything is immutable; derived
quantities (sampling interval, grid resolutions) come from small helpers so
no unit conversions leak into the signal-processing modules. Delays are
seconds, Doppler/CFO are Hz, angles are radians; degrees are accepted only
when reading config files.

Config files (TOML or JSON, one document per scenario) use the same key
names as the dataclass fields; unknown keys are rejected so typos fail fast.
See ``scenario_from_dict`` for the schema.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

SPEED_OF_LIGHT = 299_792_458.0  # m/s

_REL_TOL = 1e-12


@dataclass(frozen=True)
class OfdmParams:
    """OFDM numerology for one sensing frame."""

    f_c: float                 # carrier frequency [Hz]
    delta_f: float             # subcarrier spacing [Hz]
    n_c: int                   # subcarriers per symbol
    n_cp: int                  # cyclic-prefix length [samples]
    g_symbols: int             # symbols per frame
    k_pad: int = 1             # zero-padding ratio of the map grid
    t_sam: float | None = None  # sampling interval [s]; derived when omitted

    def __post_init__(self) -> None:
        if self.t_sam is None:
            object.__setattr__(self, "t_sam", 1.0 / (self.n_c * self.delta_f))

    @property
    def n_sym(self) -> int:
        """Samples per symbol including the cyclic prefix."""
        return self.n_c + self.n_cp

    @property
    def t_sym(self) -> float:
        """Symbol duration including CP [s]."""
        return self.n_sym * self.t_sam

    @property
    def t_cp(self) -> float:
        """Cyclic-prefix duration [s]."""
        return self.n_cp * self.t_sam


@dataclass(frozen=True)
class PathParams:
    """One propagation path, specified directly (no scene geometry)."""

    gain: complex              # complex path gain
    delay: float               # propagation delay [s]
    velocity: float = 0.0      # projected radial velocity [m/s]; 0 = static
    aoa: float = 0.0           # angle of arrival [rad]
    aod: float = 0.0           # angle of departure [rad]

    @property
    def is_static(self) -> bool:
        return self.velocity == 0.0

    def doppler_hz(self, f_c: float) -> float:
        """Two-way Doppler shift at carrier f_c [Hz]."""
        return 2.0 * self.velocity * f_c / SPEED_OF_LIGHT


@dataclass(frozen=True)
class OffsetState:
    """Receiver clock state: current offsets plus the per-frame drift step."""

    cfo: float = 0.0           # carrier frequency offset [Hz]
    to: float = 0.0            # timing offset [s]
    cfo_drift: float = 0.0     # CFO increment between consecutive frames [Hz]
    to_drift: float = 0.0      # TO increment between consecutive frames [s]

    def advanced(self) -> "OffsetState":
        """State after one inter-frame drift step (drift itself unchanged)."""
        return replace(self, cfo=self.cfo + self.cfo_drift, to=self.to + self.to_drift)


@dataclass(frozen=True, eq=False)
class ArrayParams:
    """Uniform linear arrays at both ends plus the transmit precoder."""

    m_r: int                   # receive elements
    m_t: int                   # transmit elements
    spacing: float             # element spacing [m]
    wavelength: float          # carrier wavelength [m]
    precoder: np.ndarray | None = None  # complex, length m_t, unit norm

    def __post_init__(self) -> None:
        if self.precoder is None:
            p = np.full(self.m_t, 1.0 / math.sqrt(self.m_t), dtype=np.complex128)
        else:
            p = np.asarray(self.precoder, dtype=np.complex128).reshape(-1)
        object.__setattr__(self, "precoder", p)

    @classmethod
    def half_wavelength(cls, m_r: int, m_t: int, f_c: float,
                        precoder: np.ndarray | None = None) -> "ArrayParams":
        lam = SPEED_OF_LIGHT / f_c
        return cls(m_r=m_r, m_t=m_t, spacing=lam / 2.0, wavelength=lam, precoder=precoder)


@dataclass(frozen=True, eq=False)
class Scenario:
    """Complete description of one simulated sensing setup."""

    ofdm: OfdmParams
    array: ArrayParams
    paths: tuple[PathParams, ...]
    offsets: OffsetState = OffsetState()
    noise_variance: float = 0.0   # per-sample complex AWGN variance
    antenna_index: int = 0        # which receive row is stacked
    seed: int = 0                 # base seed for all random streams

    def __post_init__(self) -> None:
        object.__setattr__(self, "paths", tuple(self.paths))

    @property
    def static_paths(self) -> tuple[PathParams, ...]:
        return tuple(p for p in self.paths if p.is_static)

    def with_noise(self, noise_variance: float) -> "Scenario":
        return replace(self, noise_variance=noise_variance)

    def drifted(self) -> "Scenario":
        """Scenario for the next frame: offsets advanced by one drift step."""
        return replace(self, offsets=self.offsets.advanced())

    def require_valid(self) -> None:
        """Raise ValueError listing violation codes if the scenario is inconsistent."""
        violations = validate(self)
        if violations:
            codes = ", ".join(v.code for v in violations)
            raise ValueError(f"invalid scenario: {codes}")


@dataclass(frozen=True)
class GridSpec:
    """Resolution of the padded delay-Doppler grid."""

    t_r: float                 # delay cell width [s]
    f_r: float                 # Doppler cell width [Hz]
    n_delay_bins: int          # columns of the map
    n_doppler_bins: int        # rows of the map


def derive_grids(ofdm: OfdmParams) -> GridSpec:
    """Grid resolutions of the padded map.

    Delay cells are the reciprocal of the padded total bandwidth and tile
    one full symbol (n_delay_bins * t_r = 1/delta_f); Doppler cells tile the
    per-symbol sampling rate (n_doppler_bins * f_r = 1/t_sym).
    """
    n_delay = ofdm.k_pad * ofdm.n_c
    n_doppler = ofdm.k_pad * ofdm.g_symbols
    return GridSpec(
        t_r=1.0 / (n_delay * ofdm.delta_f),
        f_r=1.0 / (n_doppler * ofdm.t_sym),
        n_delay_bins=n_delay,
        n_doppler_bins=n_doppler,
    )


def steering_vector(n_elem: int, spacing: float, wavelength: float, angle: float) -> np.ndarray:
    """ULA steering vector; element k carries phase 2*pi*k*d*cos(angle)/lambda."""
    if n_elem < 1:
        raise ValueError("n_elem must be >= 1")
    if wavelength <= 0.0:
        raise ValueError("wavelength must be positive")
    k = np.arange(n_elem)
    return np.exp(2j * np.pi * k * spacing * math.cos(angle) / wavelength)


@dataclass(frozen=True)
class Violation:
    """Machine-readable consistency violation."""

    code: str
    message: str


def validate(scenario: Scenario) -> list[Violation]:
    """Check scenario consistency; returns an empty list when everything holds."""
    v: list[Violation] = []
    ofdm = scenario.ofdm

    if ofdm.f_c <= 0.0:
        v.append(Violation("f-c-nonpositive", f"carrier frequency {ofdm.f_c} Hz"))
    if ofdm.delta_f <= 0.0:
        v.append(Violation("delta-f-nonpositive", f"subcarrier spacing {ofdm.delta_f} Hz"))
    if ofdm.n_c < 8:
        v.append(Violation("n-c-too-small", f"n_c = {ofdm.n_c}, need >= 8"))
    if ofdm.n_cp < 0:
        v.append(Violation("n-cp-negative", f"n_cp = {ofdm.n_cp}"))
    if ofdm.g_symbols < 1:
        v.append(Violation("g-symbols-invalid", f"g_symbols = {ofdm.g_symbols}"))
    if ofdm.k_pad < 1:
        v.append(Violation("k-pad-invalid", f"k_pad = {ofdm.k_pad}"))
    if ofdm.delta_f > 0.0 and ofdm.n_c > 0:
        if abs(ofdm.t_sam * ofdm.n_c * ofdm.delta_f - 1.0) > _REL_TOL:
            v.append(Violation("t-sam-inconsistent",
                               f"t_sam*n_c*delta_f = {ofdm.t_sam * ofdm.n_c * ofdm.delta_f!r}, need 1"))

    arr = scenario.array
    if arr.m_r < 1:
        v.append(Violation("m-r-invalid", f"m_r = {arr.m_r}"))
    if arr.m_t < 1:
        v.append(Violation("m-t-invalid", f"m_t = {arr.m_t}"))
    if arr.spacing <= 0.0 or arr.wavelength <= 0.0:
        v.append(Violation("array-geometry-invalid",
                           f"spacing = {arr.spacing}, wavelength = {arr.wavelength}"))
    if arr.precoder.shape != (arr.m_t,):
        v.append(Violation("precoder-length-mismatch",
                           f"precoder length {arr.precoder.shape}, expected {arr.m_t}"))
    else:
        norm = float(np.linalg.norm(arr.precoder))
        if abs(norm - 1.0) > _REL_TOL:
            v.append(Violation("precoder-not-unit-norm", f"|precoder| = {norm!r}"))

    if len(scenario.paths) < 1:
        v.append(Violation("no-paths", "scenario has no propagation paths"))
    elif not any(p.is_static for p in scenario.paths):
        v.append(Violation("no-static-path", "need at least one static path for a fingerprint row"))
    if ofdm.delta_f > 0.0:
        symbol_span = 1.0 / ofdm.delta_f
        for i, p in enumerate(scenario.paths):
            if p.delay < 0.0:
                v.append(Violation("delay-negative", f"path {i} delay {p.delay} s"))
            elif p.delay >= symbol_span:
                v.append(Violation("delay-exceeds-symbol",
                                   f"path {i} delay {p.delay} s >= 1/delta_f = {symbol_span} s"))

    # drift must stay inside half the unambiguous cyclic span of the map
    if abs(scenario.offsets.cfo_drift) >= 0.5 / ofdm.t_sym:
        v.append(Violation("cfo-drift-out-of-range",
                           f"|cfo_drift| = {abs(scenario.offsets.cfo_drift)} Hz >= {0.5 / ofdm.t_sym} Hz"))
    if ofdm.delta_f > 0.0 and abs(scenario.offsets.to_drift) >= 0.5 / ofdm.delta_f:
        v.append(Violation("to-drift-out-of-range",
                           f"|to_drift| = {abs(scenario.offsets.to_drift)} s >= {0.5 / ofdm.delta_f} s"))

    if scenario.noise_variance < 0.0:
        v.append(Violation("noise-variance-negative", f"sigma^2 = {scenario.noise_variance}"))
    if not (0 <= scenario.antenna_index < arr.m_r):
        v.append(Violation("antenna-index-out-of-range",
                           f"antenna_index = {scenario.antenna_index}, m_r = {arr.m_r}"))
    return v


# --- config-file ingestion -------------------------------------------------

_TOP_KEYS = {"ofdm", "array", "paths", "offsets", "noise_variance", "antenna_index", "seed"}
_OFDM_KEYS = {"f_c", "delta_f", "n_c", "n_cp", "g_symbols", "k_pad", "t_sam"}
_ARRAY_KEYS = {"m_r", "m_t", "spacing", "wavelength", "precoder"}
_PATH_KEYS = {"gain", "delay", "velocity", "aoa", "aod", "aoa_deg", "aod_deg"}
_OFFSET_KEYS = {"cfo", "to", "cfo_drift", "to_drift"}


def _reject_unknown(mapping: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise ValueError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _as_complex(value: Any, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ValueError(f"{where}: expected a number or [re, im] pair, got {value!r}")


def _angle(entry: dict, base: str, where: str) -> float:
    deg_key = f"{base}_deg"
    if base in entry and deg_key in entry:
        raise ValueError(f"{where}: give either {base} (rad) or {deg_key}, not both")
    if deg_key in entry:
        return math.radians(float(entry[deg_key]))
    return float(entry.get(base, 0.0))


def scenario_from_dict(doc: dict) -> Scenario:
    """Build a Scenario from a parsed config document.

    Schema (unknown keys anywhere are an error)::

        ofdm:    f_c, delta_f, n_c, n_cp, g_symbols, k_pad [, t_sam]
        array:   m_r, m_t [, spacing, wavelength, precoder]   (optional section)
        paths:   list of {gain, delay [, velocity, aoa|aoa_deg, aod|aod_deg]}
        offsets: {cfo, to, cfo_drift, to_drift}               (optional section)
        noise_variance, antenna_index, seed                   (optional scalars)

    ``gain`` and precoder entries are numbers or [re, im] pairs. Array spacing
    and wavelength default to half-wavelength geometry at f_c.
    """
    if not isinstance(doc, dict):
        raise ValueError("scenario document must be a table/object")
    _reject_unknown(doc, _TOP_KEYS, "scenario")
    for section in ("ofdm", "paths"):
        if section not in doc:
            raise ValueError(f"scenario is missing required section '{section}'")

    o = doc["ofdm"]
    _reject_unknown(o, _OFDM_KEYS, "ofdm")
    for key in ("f_c", "delta_f", "n_c", "n_cp", "g_symbols"):
        if key not in o:
            raise ValueError(f"ofdm is missing required key '{key}'")
    ofdm = OfdmParams(
        f_c=float(o["f_c"]),
        delta_f=float(o["delta_f"]),
        n_c=int(o["n_c"]),
        n_cp=int(o["n_cp"]),
        g_symbols=int(o["g_symbols"]),
        k_pad=int(o.get("k_pad", 1)),
        t_sam=float(o["t_sam"]) if "t_sam" in o else None,
    )

    a = doc.get("array", {"m_r": 1, "m_t": 1})
    _reject_unknown(a, _ARRAY_KEYS, "array")
    lam = float(a.get("wavelength", SPEED_OF_LIGHT / ofdm.f_c))
    precoder = None
    if "precoder" in a:
        precoder = np.array([_as_complex(x, "array.precoder") for x in a["precoder"]])
    array = ArrayParams(
        m_r=int(a.get("m_r", 1)),
        m_t=int(a.get("m_t", 1)),
        spacing=float(a.get("spacing", lam / 2.0)),
        wavelength=lam,
        precoder=precoder,
    )

    paths = []
    for i, entry in enumerate(doc["paths"]):
        where = f"paths[{i}]"
        _reject_unknown(entry, _PATH_KEYS, where)
        if "gain" not in entry or "delay" not in entry:
            raise ValueError(f"{where}: 'gain' and 'delay' are required")
        paths.append(PathParams(
            gain=_as_complex(entry["gain"], f"{where}.gain"),
            delay=float(entry["delay"]),
            velocity=float(entry.get("velocity", 0.0)),
            aoa=_angle(entry, "aoa", where),
            aod=_angle(entry, "aod", where),
        ))

    off = doc.get("offsets", {})
    _reject_unknown(off, _OFFSET_KEYS, "offsets")
    offsets = OffsetState(
        cfo=float(off.get("cfo", 0.0)),
        to=float(off.get("to", 0.0)),
        cfo_drift=float(off.get("cfo_drift", 0.0)),
        to_drift=float(off.get("to_drift", 0.0)),
    )

    return Scenario(
        ofdm=ofdm,
        array=array,
        paths=tuple(paths),
        offsets=offsets,
        noise_variance=float(doc.get("noise_variance", 0.0)),
        antenna_index=int(doc.get("antenna_index", 0)),
        seed=int(doc.get("seed", 0)),
    )


def load_scenario(path: str | Path) -> Scenario:
    """Read a Scenario from a TOML (.toml) or JSON config file."""
    return scenario_from_dict(load_document(path))


def load_document(path: str | Path) -> dict:
    """Parse a TOML or JSON file into a plain dict (format chosen by suffix)."""
    path = Path(path)
    if path.suffix.lower() == ".toml":
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
