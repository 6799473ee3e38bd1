import numpy as np
import pytest
import scipy.signal.windows as sps_windows

from synclab import (
    AmbiguousPeakError,
    circular_autocorrelation,
    mainlobe_metrics,
    make_window,
    padded_spectrum,
    rank_windows,
)

SPEC_ABS_TOL = 1e-9


def dtft(taps, freqs):
    """Direct synthesis-kernel transform, the slow oracle for padded_spectrum."""
    k = np.arange(len(taps))
    return np.array([np.sum(taps * np.exp(2j * np.pi * f * k)) for f in freqs])


def test_rectangular_taps():
    assert np.array_equal(make_window("rectangular", 4).taps, np.ones(4))


def test_hann_endpoints_vanish():
    taps = make_window("hann", 4).taps.real
    assert taps[0] == 0.0 and taps[-1] == 0.0
    assert taps[1] > 0.0


def test_hann_matches_scipy():
    for n in (4, 9, 64):
        got = make_window("hann", n).taps.real
        assert np.allclose(got, sps_windows.hann(n, sym=True), atol=1e-12)


def test_hamming_min_tap_and_scipy():
    for n in (5, 16, 63):
        taps = make_window("hamming", n).taps.real
        assert taps.min() == pytest.approx(0.08, abs=1e-12)
        assert np.allclose(taps, sps_windows.hamming(n, sym=True), atol=1e-12)


def test_blackman_matches_scipy():
    got = make_window("blackman", 32).taps.real
    assert np.allclose(got, sps_windows.blackman(32, sym=True), atol=1e-12)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError, match="unknown window kind"):
        make_window("kaiser", 8)


def test_padded_spectrum_against_direct_transform(rng):
    win = make_window("hamming", 12)
    k_pad = 4
    spec = padded_spectrum(win, k_pad)
    freqs = np.arange(12 * k_pad) / (12 * k_pad)
    want = dtft(win.taps, freqs)
    assert np.abs(spec - want).max() < SPEC_ABS_TOL


def test_padded_spectrum_dc_bin_is_tap_sum():
    win = make_window("rectangular", 8)
    spec = padded_spectrum(win, 4)
    assert spec[0] == pytest.approx(8.0, abs=1e-12)


def test_rect_spectrum_nulls_at_multiples_of_k():
    spec = np.abs(padded_spectrum(make_window("rectangular", 8), 4))
    nulls = np.where(spec < 1e-9)[0]
    assert np.array_equal(nulls, np.arange(4, 32, 4))


def test_autocorrelation_against_direct_sum(rng):
    spec = rng.standard_normal(24) + 1j * rng.standard_normal(24)
    rho = circular_autocorrelation(spec)
    n = len(spec)
    direct = np.array(
        [np.sum(spec[(np.arange(n) + q) % n] * np.conj(spec)) for q in range(n)]
    )
    assert np.abs(rho - direct).max() < 1e-9


def test_autocorrelation_zero_lag_is_energy(rng):
    spec = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    rho = circular_autocorrelation(spec)
    assert rho[0].real == pytest.approx(np.sum(np.abs(spec) ** 2), rel=1e-12)
    assert abs(rho[0].imag) < 1e-9
    # zero lag dominates every other lag
    assert np.all(np.abs(rho[1:]) <= rho[0].real + 1e-9)


def test_rect_null_to_null_is_2k():
    m = mainlobe_metrics(padded_spectrum(make_window("rectangular", 64), 16))
    assert m.null_to_null_bins == pytest.approx(2 * 16, abs=1e-12)


def test_hann_null_to_null_near_4k():
    # symmetric hann has true nulls at 2/(N-1), half a bin past 2/N on this
    # grid, so the discrete measurement may overshoot 4K by up to 2 bins
    m = mainlobe_metrics(padded_spectrum(make_window("hann", 64), 16))
    assert abs(m.null_to_null_bins - 4 * 16) <= 2.0


def test_rect_sidelobe_level():
    m = mainlobe_metrics(padded_spectrum(make_window("rectangular", 64), 16))
    assert m.peak_sidelobe_db == pytest.approx(-13.26, abs=0.1)


def test_width_below_null_span():
    for kind in ("rectangular", "hamming", "hann", "blackman"):
        m = mainlobe_metrics(padded_spectrum(make_window(kind, 64), 8))
        assert m.mainlobe_width_bins < m.null_to_null_bins


def test_mainlobe_widths_strictly_ordered():
    widths = [
        mainlobe_metrics(padded_spectrum(make_window(kind, 64), 16)).mainlobe_width_bins
        for kind in ("rectangular", "hamming", "hann", "blackman")
    ]
    assert widths[0] < widths[1] < widths[2] < widths[3]


def test_rank_windows_order():
    wins = [make_window(k, 64) for k in ("blackman", "hann", "rectangular", "hamming")]
    ranked = rank_windows(wins, 16)
    assert [w.kind for w in ranked] == ["rectangular", "hamming", "hann", "blackman"]


def test_metrics_reject_flat_spectrum():
    with pytest.raises(AmbiguousPeakError):
        mainlobe_metrics(np.ones(32))


def test_metrics_reject_zero_spectrum():
    with pytest.raises(AmbiguousPeakError):
        mainlobe_metrics(np.zeros(16))


def test_metrics_handle_offcenter_peak():
    # peak near the wrap edge must still measure a symmetric mainlobe
    spec = padded_spectrum(make_window("hann", 32), 8)
    rolled = np.roll(spec, -3)
    a = mainlobe_metrics(spec)
    b = mainlobe_metrics(rolled)
    assert b.mainlobe_width_bins == pytest.approx(a.mainlobe_width_bins, abs=1e-9)
    assert b.null_to_null_bins == pytest.approx(a.null_to_null_bins, abs=1e-9)
