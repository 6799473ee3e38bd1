"""Monte Carlo campaigns over SNR and window choices, plus theory bridging.

One trial = synthesize a reference frame and a drifted frame at a given
noise level, run the full map -> fingerprint -> correlation -> argmax
pipeline for every window (and optionally the MUSIC surrogate), and score
the squared delay-cell error against the grid-quantized injected drift.

Determinism contract: every trial's RNG seed derives only from
(master_seed, snr_index, trial_index), trial results land in a buffer
indexed by those coordinates, and reduction walks the buffer in a fixed
order, so curves are bit-identical no matter how many worker threads ran.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._common import round_half_up, wrap_signed
from .channel import synth_snapshot, unit_symbols
from .ddmap import SubarrayConfig, music_map, transform_fft2d
from .estimator import cross_correlate, estimate_offsets, extract_fingerprint, locate_static_row
from .scenario import Scenario, _reject_unknown, derive_grids, load_document, scenario_from_dict, validate
from .theory import MeanSpectrum, mse_theoretical, optimal_spectrum, simulate_argmax_mse, spectrum_from_window
from .windows import WINDOW_KINDS, make_window

MUSIC_LABEL = "music"

_SEED_MASK = 0xFFFFFFFF


class CampaignError(RuntimeError):
    """Campaign-level failure, e.g. too many trials errored."""


@dataclass(frozen=True, eq=False)
class CampaignConfig:
    scenario: Scenario
    snr_grid_db: tuple[float, ...]
    windows: tuple[str, ...] = ("rectangular", "hamming", "hann", "blackman")
    use_music: bool = True
    music_model_order: int | None = None  # default: number of configured paths
    music_delay_subarray: int | None = None  # default: floor(2*N_c/3)
    trials_per_point: int = 500
    drift_cfo_hz: float = 0.0
    drift_to_s: float = 0.0
    output_dir: str | None = None
    master_seed: int = 0
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))
        object.__setattr__(self, "windows", tuple(self.windows))
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be >= 1")
        if len(self.snr_grid_db) == 0:
            raise ValueError("snr grid must be nonempty")
        for kind in self.windows:
            if kind not in WINDOW_KINDS:
                raise ValueError(f"unknown window kind {kind!r}")
        if not self.windows and not self.use_music:
            raise ValueError("campaign needs at least one window or the music flag")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.windows) + ((MUSIC_LABEL,) if self.use_music else ())


@dataclass(frozen=True)
class CurvePoint:
    snr_db: float
    mse_cells_sq: float
    mse_seconds_sq: float
    trials: int
    ci95: float
    failed: int = 0
    row_mismatches: int = 0  # trials whose Doppler-row shift was wrong
    histogram: dict = field(default_factory=dict)  # signed col error -> count


@dataclass(frozen=True)
class MseCurve:
    window_label: str
    points: tuple[CurvePoint, ...]


@dataclass(frozen=True)
class CampaignTruth:
    row_cells: int
    col_cells: int
    residual_row_cells: float  # drift minus its grid quantization
    residual_col_cells: float


@dataclass(frozen=True)
class CampaignResult:
    curves: tuple[MseCurve, ...]
    truth: CampaignTruth
    failed_trials: int
    total_trials: int
    errors: tuple[str, ...]  # first few trial error messages, diagnostics


def trial_seed(master_seed: int, snr_index: int, trial_index: int) -> int:
    """Documented seed derivation: one 32-bit state from the coordinate triple."""
    seq = np.random.SeedSequence([master_seed & _SEED_MASK, snr_index, trial_index])
    return int(seq.generate_state(1, np.uint64)[0] & _SEED_MASK)


def signal_power(scenario: Scenario) -> float:
    """Mean squared magnitude of a noiseless snapshot entry."""
    clean = replace(scenario, noise_variance=0.0)
    snap = synth_snapshot(clean, data=unit_symbols(scenario.ofdm.n_c), frame_id=0)
    return float(np.mean(np.abs(snap.data) ** 2))


def _drifted(scenario: Scenario, drift_cfo_hz: float, drift_to_s: float) -> Scenario:
    off = scenario.offsets
    return replace(
        scenario,
        offsets=replace(off, cfo=off.cfo + drift_cfo_hz, to=off.to + drift_to_s),
    )


def _run_trial(config: CampaignConfig, sigma_sq: float, snr_index: int, trial_index: int,
               grid, wins, order: int, smoothing: SubarrayConfig):
    """One paired reference/drifted pipeline pass; returns per-label scores."""
    seed = trial_seed(config.master_seed, snr_index, trial_index)
    base = replace(config.scenario, noise_variance=sigma_sq, seed=seed)
    ref_scn = base
    new_scn = _drifted(base, config.drift_cfo_hz, config.drift_to_s)
    ref_snap = synth_snapshot(ref_scn, frame_id=0)
    new_snap = synth_snapshot(new_scn, frame_id=1)
    k_pad = config.scenario.ofdm.k_pad
    n_cols = grid.n_delay_bins
    col_true = round_half_up(config.drift_to_s / grid.t_r)
    row_true = round_half_up(config.drift_cfo_hz / grid.f_r)

    scores = {}
    for label in config.labels:
        if label == MUSIC_LABEL:
            ref_map = music_map(ref_snap, grid, order, smoothing=smoothing)
            new_map = music_map(new_snap, grid, order, smoothing=smoothing)
        else:
            win_g, win_nc = wins[label]
            ref_map = transform_fft2d(ref_snap, win_g, win_nc, k_pad, grid=grid)
            new_map = transform_fft2d(new_snap, win_g, win_nc, k_pad, grid=grid)
        k0 = locate_static_row(ref_map)
        fingerprint = extract_fingerprint(ref_map, k0)
        corr = cross_correlate(new_map, fingerprint)
        est = estimate_offsets(corr, grid, k0)
        col_err = wrap_signed(est.col_shift - col_true, n_cols)
        row_err = wrap_signed(est.row_shift - row_true, grid.n_doppler_bins)
        scores[label] = (col_err, row_err)
    return scores


def run_campaign(config: CampaignConfig) -> CampaignResult:
    """Run the full (window x SNR x trial) grid and reduce to MSE curves.

    Trials whose pipeline raises are counted per point and excluded from the
    statistics; the campaign aborts with CampaignError if more than 1% of
    all trials failed.
    """
    problems = validate(config.scenario)
    if problems:
        raise ValueError(f"invalid scenario: {problems[0].code}: {problems[0].message}")
    grid = derive_grids(config.scenario.ofdm)
    ofdm = config.scenario.ofdm
    wins = {
        kind: (make_window(kind, ofdm.g_symbols), make_window(kind, ofdm.n_c))
        for kind in config.windows
    }
    order = config.music_model_order or len(config.scenario.paths)
    smoothing = SubarrayConfig(delay_subarray=config.music_delay_subarray)
    power = signal_power(config.scenario)
    sigmas = [power / (10.0 ** (snr / 10.0)) for snr in config.snr_grid_db]

    n_snr = len(config.snr_grid_db)
    n_trials = config.trials_per_point
    # indexed result buffer: one slot per (snr, trial), filled in any order
    buffer: list[list] = [[None] * n_trials for _ in range(n_snr)]

    def work(coord):
        i, j = coord
        try:
            return i, j, _run_trial(config, sigmas[i], i, j, grid, wins, order, smoothing)
        except Exception as exc:  # recorded, not dropped
            return i, j, exc

    coords = [(i, j) for i in range(n_snr) for j in range(n_trials)]
    if config.threads == 1:
        outcomes = map(work, coords)
    else:
        pool = ThreadPoolExecutor(max_workers=config.threads)
        try:
            outcomes = list(pool.map(work, coords))
        finally:
            pool.shutdown(wait=True)
    for i, j, payload in outcomes:
        buffer[i][j] = payload

    # sequential, order-fixed reduction
    t_r_sq = grid.t_r ** 2
    messages: list[str] = []
    for i, snr in enumerate(config.snr_grid_db):
        for j in range(n_trials):
            if isinstance(buffer[i][j], Exception) and len(messages) < 10:
                messages.append(f"snr={snr} trial={j}: {buffer[i][j]!r}")
    curves = []
    for label in config.labels:
        points = []
        for i, snr in enumerate(config.snr_grid_db):
            sq_errors = []
            hist: dict[int, int] = {}
            failed = 0
            row_bad = 0
            for j in range(n_trials):
                payload = buffer[i][j]
                if isinstance(payload, Exception):
                    failed += 1
                    continue
                col_err, row_err = payload[label]
                sq_errors.append(float(col_err) ** 2)
                hist[int(col_err)] = hist.get(int(col_err), 0) + 1
                if row_err != 0:
                    row_bad += 1
            if sq_errors:
                arr = np.asarray(sq_errors)
                mse = float(arr.mean())
                ci95 = float(1.96 * arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
            else:
                mse, ci95 = float("nan"), float("nan")
            points.append(
                CurvePoint(
                    snr_db=float(snr),
                    mse_cells_sq=mse,
                    mse_seconds_sq=mse * t_r_sq,
                    trials=len(sq_errors),
                    ci95=ci95,
                    failed=failed,
                    row_mismatches=row_bad,
                    histogram=dict(sorted(hist.items())),
                )
            )
        curves.append(MseCurve(window_label=label, points=tuple(points)))

    # failures are per (snr, trial) slot, shared by all labels
    failed_total = sum(
        isinstance(buffer[i][j], Exception) for i in range(n_snr) for j in range(n_trials)
    )
    total = n_snr * n_trials
    if failed_total > 0.01 * total:
        raise CampaignError(
            f"{failed_total}/{total} trials failed (>1%): " + "; ".join(messages[:3])
        )

    col_cells = round_half_up(config.drift_to_s / grid.t_r)
    row_cells = round_half_up(config.drift_cfo_hz / grid.f_r)
    truth = CampaignTruth(
        row_cells=row_cells,
        col_cells=col_cells,
        residual_row_cells=config.drift_cfo_hz / grid.f_r - row_cells,
        residual_col_cells=config.drift_to_s / grid.t_r - col_cells,
    )
    return CampaignResult(
        curves=tuple(curves),
        truth=truth,
        failed_trials=failed_total,
        total_trials=total,
        errors=tuple(messages),
    )


_CAMPAIGN_KEYS = {
    "snr_grid_db", "windows", "use_music", "music_model_order", "music_delay_subarray",
    "trials_per_point", "drift_cfo_hz", "drift_to_s", "output_dir", "master_seed", "threads",
}


def campaign_from_dict(doc: dict) -> CampaignConfig:
    """Build a CampaignConfig from {scenario: {...}, campaign: {...}} data."""
    if not isinstance(doc, dict):
        raise ValueError("campaign document must be a table")
    _reject_unknown(doc, {"scenario", "campaign"}, "top-level")
    if "scenario" not in doc or "campaign" not in doc:
        raise ValueError("campaign document needs [scenario] and [campaign] sections")
    scenario = scenario_from_dict(doc["scenario"])
    section = doc["campaign"]
    if not isinstance(section, dict):
        raise ValueError("campaign section must be a table")
    _reject_unknown(section, _CAMPAIGN_KEYS, "campaign")
    if "snr_grid_db" not in section:
        raise ValueError("campaign section needs snr_grid_db")
    kwargs = dict(section)
    kwargs["snr_grid_db"] = tuple(float(v) for v in kwargs["snr_grid_db"])
    if "windows" in kwargs:
        kwargs["windows"] = tuple(str(w) for w in kwargs["windows"])
    return CampaignConfig(scenario=scenario, **kwargs)


def load_campaign(path) -> CampaignConfig:
    """Read a campaign config from a TOML or JSON file."""
    return campaign_from_dict(load_document(path))


# --- theory vs simulation -----------------------------------------------


@dataclass(frozen=True)
class TheoryComparisonRow:
    label: str  # "snr=-20dB" or "sigma=0.300"
    empirical_mse: float
    empirical_se: float
    theoretical_mse: float

    @property
    def ratio(self) -> float:
        if self.theoretical_mse > 0.0:
            return self.empirical_mse / self.theoretical_mse
        return float("nan")


@dataclass(frozen=True)
class TheoryComparisonReport:
    mode: str
    rows: tuple[TheoryComparisonRow, ...]


@dataclass(frozen=True, eq=False)
class SyntheticComparisonConfig:
    """Gaussian-row experiment feeding the argmax model directly."""

    kn_c: int
    sigma_bar_grid: tuple[float, ...]
    target_index: float
    spectrum_kind: str = "onehot"  # or a window kind
    k_pad: int = 4
    trials: int = 100_000
    master_seed: int = 0

    def build_spectrum(self, sigma_bar: float) -> MeanSpectrum:
        if self.spectrum_kind == "onehot":
            values = optimal_spectrum(self.target_index, self.kn_c)
            return MeanSpectrum(values=values, sigma_bar_sq=sigma_bar ** 2,
                                target_index=self.target_index)
        if self.kn_c % self.k_pad:
            raise ValueError("kn_c must be divisible by k_pad for window spectra")
        win = make_window(self.spectrum_kind, self.kn_c // self.k_pad)
        return spectrum_from_window(win, self.k_pad, self.target_index, sigma_bar ** 2)


def run_theory_comparison_synthetic(config: SyntheticComparisonConfig) -> TheoryComparisonReport:
    rows = []
    for idx, sigma_bar in enumerate(config.sigma_bar_grid):
        spectrum = config.build_spectrum(float(sigma_bar))
        rng = np.random.default_rng(
            np.random.SeedSequence([config.master_seed & _SEED_MASK, idx])
        )
        emp, se = simulate_argmax_mse(spectrum, config.trials, rng)
        theo = mse_theoretical(spectrum).mse
        rows.append(
            TheoryComparisonRow(
                label=f"sigma={sigma_bar:.3f}",
                empirical_mse=emp,
                empirical_se=se,
                theoretical_mse=theo,
            )
        )
    return TheoryComparisonReport(mode="synthetic", rows=tuple(rows))


@dataclass(frozen=True, eq=False)
class ChannelComparisonConfig:
    """Bridge the full channel pipeline to the Gaussian row model.

    Per SNR point the mean searched row and its off-peak variance are
    measured over the trials, fed to the theoretical MSE, and compared with
    the empirical argmax MSE of the same rows.
    """

    scenario: Scenario
    snr_grid_db: tuple[float, ...]
    window: str = "rectangular"
    drift_cfo_hz: float = 0.0
    drift_to_s: float = 0.0
    trials: int = 200
    master_seed: int = 0


def run_theory_comparison_channel(config: ChannelComparisonConfig) -> TheoryComparisonReport:
    grid = derive_grids(config.scenario.ofdm)
    ofdm = config.scenario.ofdm
    win_g = make_window(config.window, ofdm.g_symbols)
    win_nc = make_window(config.window, ofdm.n_c)
    power = signal_power(config.scenario)
    n_cols = grid.n_delay_bins
    target = config.drift_to_s / grid.t_r
    col_true = round_half_up(target)
    row_true = round_half_up(config.drift_cfo_hz / grid.f_r)
    off_peak = np.abs(((np.arange(n_cols) - col_true + n_cols // 2) % n_cols) - n_cols // 2) > 3

    rows = []
    for idx, snr in enumerate(config.snr_grid_db):
        sigma_sq = power / (10.0 ** (snr / 10.0))
        samples = np.empty((config.trials, n_cols))
        sq_err = np.empty(config.trials)
        for j in range(config.trials):
            seed = trial_seed(config.master_seed, idx, j)
            base = replace(config.scenario, noise_variance=sigma_sq, seed=seed)
            ref_snap = synth_snapshot(base, frame_id=0)
            new_snap = synth_snapshot(
                _drifted(base, config.drift_cfo_hz, config.drift_to_s), frame_id=1
            )
            ref_map = transform_fft2d(ref_snap, win_g, win_nc, ofdm.k_pad, grid=grid)
            new_map = transform_fft2d(new_snap, win_g, win_nc, ofdm.k_pad, grid=grid)
            k0 = locate_static_row(ref_map)
            corr = cross_correlate(new_map, extract_fingerprint(ref_map, k0))
            searched = (k0 + row_true) % grid.n_doppler_bins
            row_mag = np.abs(corr.data[searched])
            samples[j] = row_mag
            sq_err[j] = (float(np.argmax(row_mag)) - target) ** 2
        mean_row = samples.mean(axis=0)
        sigma_bar_sq = float(samples[:, off_peak].var(axis=0, ddof=1).mean())
        theo = mse_theoretical(
            MeanSpectrum(values=mean_row, sigma_bar_sq=sigma_bar_sq, target_index=target)
        ).mse
        rows.append(
            TheoryComparisonRow(
                label=f"snr={snr:g}dB",
                empirical_mse=float(sq_err.mean()),
                empirical_se=float(sq_err.std(ddof=1) / np.sqrt(config.trials)),
                theoretical_mse=theo,
            )
        )
    return TheoryComparisonReport(mode="channel", rows=tuple(rows))
