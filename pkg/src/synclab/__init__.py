"""Fingerprint-spectrum synchronization lab for OFDM passive sensing.

Synthesizes multipath OFDM snapshots with clock offsets, forms windowed
delay-Doppler maps, estimates CFO/TO drift by circular cross-correlation of
the static fingerprint row, and evaluates the matching peak-probability /
MSE theory, including the asymptotically optimal spectrum and the circulant
window construction.
"""

from ._kernels import kernel_backend
from .campaign import (
    MUSIC_LABEL,
    CampaignConfig,
    CampaignError,
    CampaignResult,
    ChannelComparisonConfig,
    CurvePoint,
    MseCurve,
    SyntheticComparisonConfig,
    campaign_from_dict,
    load_campaign,
    run_campaign,
    run_theory_comparison_channel,
    run_theory_comparison_synthetic,
    signal_power,
    trial_seed,
)
from .channel import (
    DataSymbols,
    SnapshotMatrix,
    delay_vector,
    doppler_vector,
    load_snapshot,
    path_amplitude,
    random_qpsk,
    save_snapshot,
    synth_snapshot,
    unit_symbols,
)
from .ddmap import (
    DelayDopplerMap,
    RankDeficientCovariance,
    SubarrayConfig,
    dtft_oracle,
    extract_cut,
    load_map,
    music_map,
    save_map,
    transform_fft2d,
    write_cut_csv,
    zero_pad,
)
from .estimator import (
    CorrelationMap,
    FingerprintSpectrum,
    SyncEstimate,
    cross_correlate,
    estimate_offsets,
    extract_fingerprint,
    locate_static_row,
)
from .presets import desk_campaign, desk_scenario, full_scale_campaign, full_scale_scenario
from .reports import emit_reports, environment_fingerprint, write_curves_csv
from .scenario import (
    ArrayParams,
    GridSpec,
    OfdmParams,
    OffsetState,
    PathParams,
    Scenario,
    Violation,
    derive_grids,
    load_scenario,
    scenario_from_dict,
    steering_vector,
    validate,
)
from .theory import (
    CirculantShift,
    CirculantSpec,
    MeanSpectrum,
    SingularCirculantError,
    TheoreticalMse,
    circulant_shift_matrix,
    forward_spectrum_from_rho,
    lag_weights,
    mse_asymptotic_optimal,
    mse_theoretical,
    optimal_spectrum,
    peak_probability_vector,
    prob_peak_index,
    q_function,
    rho_for_target_spectrum,
    simulate_argmax_mse,
    spectrum_from_window,
)
from .windows import (
    WINDOW_KINDS,
    AmbiguousPeakError,
    SpectrumMetrics,
    Window,
    circular_autocorrelation,
    mainlobe_metrics,
    make_window,
    padded_spectrum,
    rank_windows,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
