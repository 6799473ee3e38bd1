import math

import numpy as np
import pytest

from synclab import (
    ArrayParams,
    OfdmParams,
    OffsetState,
    PathParams,
    Scenario,
    delay_vector,
    doppler_vector,
    load_snapshot,
    path_amplitude,
    random_qpsk,
    save_snapshot,
    synth_snapshot,
    unit_symbols,
)
from synclab.channel import DataSymbols

ABS_TOL = 1e-12
ROUND_TRIP_RTOL = 1e-9

C_LIGHT = 299792458.0


def tiny_scenario(paths=None, offsets=None, noise=0.0, seed=11, m=0, m_r=4, m_t=2):
    ofdm = OfdmParams(f_c=28e9, delta_f=1.2e5, n_c=16, n_cp=2, g_symbols=8, k_pad=2)
    if paths is None:
        paths = (PathParams(gain=0.8 * np.exp(0.4j), delay=3e-7, aoa=0.7, aod=1.1),)
    return Scenario(
        ofdm=ofdm,
        array=ArrayParams.half_wavelength(m_r=m_r, m_t=m_t, f_c=ofdm.f_c),
        paths=tuple(paths),
        offsets=offsets or OffsetState(cfo=300.0, to=2e-7),
        noise_variance=noise,
        antenna_index=m,
        seed=seed,
    )


def stacked_model(scenario):
    """Independent oracle: literal evaluation of the rank-one path sum."""
    ofdm = scenario.ofdm
    arr = scenario.array
    m = scenario.antenna_index
    out = np.zeros((ofdm.g_symbols, ofdm.n_c), dtype=np.complex128)
    for path in scenario.paths:
        carrier = np.exp(-2j * np.pi * ofdm.f_c * (scenario.offsets.to + path.delay))
        step = 2 * np.pi * arr.spacing / arr.wavelength
        omega_r = np.exp(1j * step * m * math.cos(path.aoa))
        omega_t = np.array([np.exp(1j * step * k * math.cos(path.aod)) for k in range(arr.m_t)])
        alpha = path.gain * carrier * omega_r * (omega_t @ arr.precoder)
        f_eff = 2 * path.velocity / C_LIGHT * ofdm.f_c + scenario.offsets.cfo
        for g in range(ofdm.g_symbols):
            theta = np.exp(-2j * np.pi * f_eff * (g * ofdm.t_sym + ofdm.t_cp))
            for n in range(ofdm.n_c):
                tau = np.exp(-2j * np.pi * n * ofdm.delta_f * (scenario.offsets.to + path.delay))
                out[g, n] += alpha * theta * tau
    return out


def test_path_amplitude_all_phases_zero():
    sc = tiny_scenario(
        paths=(PathParams(gain=1.0, delay=0.0, aoa=np.pi / 2, aod=np.pi / 2),),
        offsets=OffsetState(),
        m_t=1,
    )
    # single tx element, uniform precoder = [1.0]
    assert path_amplitude(sc, 0, 0) == pytest.approx(1.0, abs=ABS_TOL)


def test_path_amplitude_half_cycle_negates():
    # pick delay so f_c * (to + tau) = 0.5 exactly
    sc = tiny_scenario(
        paths=(PathParams(gain=0.6, delay=0.5 / 28e9, aoa=np.pi / 2, aod=np.pi / 2),),
        offsets=OffsetState(),
        m_t=1,
    )
    assert path_amplitude(sc, 0, 0) == pytest.approx(-0.6, abs=1e-10)


def test_path_amplitude_matches_direct_product(rng):
    sc = tiny_scenario(m=2)
    got = path_amplitude(sc, 0, 2)
    want = stacked_model(sc)[0, 0] / (
        np.exp(-2j * np.pi * (2 * sc.paths[0].velocity / C_LIGHT * sc.ofdm.f_c + sc.offsets.cfo) * sc.ofdm.t_cp)
        * 1.0
    )
    # stacked model entry (0,0) = alpha * theta[0] * tau[0], tau[0] = 1
    assert got == pytest.approx(want, rel=1e-12)


def test_doppler_vector_static_no_cfo_flat():
    sc = tiny_scenario(offsets=OffsetState())
    v = doppler_vector(sc, 0)
    assert np.allclose(v, np.ones(8), atol=ABS_TOL)


def test_doppler_vector_one_cycle_per_frame():
    ofdm = tiny_scenario().ofdm
    cfo = 1.0 / (ofdm.g_symbols * ofdm.t_sym)
    sc = tiny_scenario(offsets=OffsetState(cfo=cfo))
    v = doppler_vector(sc, 0)
    step = v[1:] / v[:-1]
    expected = np.exp(-2j * np.pi / ofdm.g_symbols)
    assert np.allclose(step, expected, atol=1e-12)


def test_doppler_and_cfo_interchangeable():
    f_d = 2 * 5.0 / C_LIGHT * 28e9  # about 933.33 Hz
    moving = tiny_scenario(
        paths=(PathParams(gain=1.0, delay=1e-7, velocity=5.0),), offsets=OffsetState()
    )
    offset = tiny_scenario(
        paths=(PathParams(gain=1.0, delay=1e-7),), offsets=OffsetState(cfo=f_d)
    )
    assert np.allclose(doppler_vector(moving, 0), doppler_vector(offset, 0), atol=1e-9)


def test_delay_vector_zero_delay_flat():
    sc = tiny_scenario(paths=(PathParams(gain=1.0, delay=0.0),), offsets=OffsetState())
    assert np.allclose(delay_vector(sc, 0), np.ones(16), atol=ABS_TOL)


def test_delay_vector_on_grid_is_dft_column():
    ofdm = tiny_scenario().ofdm
    p = 3
    sc = tiny_scenario(
        paths=(PathParams(gain=1.0, delay=p * ofdm.t_sam),), offsets=OffsetState()
    )
    v = delay_vector(sc, 0)
    n = np.arange(ofdm.n_c)
    assert np.allclose(v, np.exp(-2j * np.pi * n * p / ofdm.n_c), atol=1e-12)


def test_delay_vector_matches_direct_formula():
    sc = tiny_scenario()
    total = sc.offsets.to + sc.paths[0].delay
    n = np.arange(sc.ofdm.n_c)
    want = np.exp(-2j * np.pi * n * sc.ofdm.delta_f * total)
    assert np.allclose(delay_vector(sc, 0), want, atol=ABS_TOL)


def test_single_path_snapshot_is_rank_one():
    sc = tiny_scenario()
    snap = synth_snapshot(sc, frame_id=0)
    svals = np.linalg.svd(snap.data, compute_uv=False)
    assert svals[1] / svals[0] < 1e-9
    mags = np.abs(snap.data)
    assert mags.max() / mags.min() - 1.0 < 1e-9  # unimodular outer product


def test_round_trip_matches_stacked_model(rng):
    paths = (
        PathParams(gain=0.9, delay=2.5e-7, aoa=0.3, aod=0.8),
        PathParams(gain=0.5 * np.exp(1.2j), delay=6e-7, velocity=7.0, aoa=1.4, aod=2.0),
        PathParams(gain=0.3 * np.exp(-0.9j), delay=4.2e-7, velocity=-3.5, aoa=2.2, aod=1.0),
    )
    sc = tiny_scenario(paths=paths, m=1)
    data = random_qpsk(sc.ofdm.n_c, rng)
    snap = synth_snapshot(sc, data=data, frame_id=0)
    want = stacked_model(sc)
    err = np.abs(snap.data - want).max() / np.abs(want).max()
    assert err < ROUND_TRIP_RTOL


def test_linearity_over_paths():
    p1 = PathParams(gain=0.9, delay=2.5e-7, aoa=0.3)
    p2 = PathParams(gain=0.2, delay=1e-7, aoa=2.1)
    p3 = PathParams(gain=0.4j, delay=5e-7, velocity=4.0, aoa=1.2)
    all_three = synth_snapshot(tiny_scenario(paths=(p1, p2, p3)), data=unit_symbols(16))
    part_a = synth_snapshot(tiny_scenario(paths=(p1,)), data=unit_symbols(16))
    part_b = synth_snapshot(tiny_scenario(paths=(p2, p3)), data=unit_symbols(16))
    assert np.abs(all_three.data - part_a.data - part_b.data).max() < 1e-12


def test_snapshot_deterministic():
    sc = tiny_scenario(noise=0.3)
    a = synth_snapshot(sc, frame_id=5)
    b = synth_snapshot(sc, frame_id=5)
    assert np.array_equal(a.data, b.data)
    c = synth_snapshot(sc, frame_id=6)
    assert not np.array_equal(a.data, c.data)


def test_noise_moments():
    # no signal: drop to a zero-gain path, pure noise should have variance sigma^2
    sc = tiny_scenario(paths=(PathParams(gain=0.0, delay=0.0),), noise=0.25, seed=3)
    samples = []
    for frame in range(40):
        samples.append(synth_snapshot(sc, frame_id=frame).data.ravel())
    z = np.concatenate(samples)
    power = np.mean(np.abs(z) ** 2)
    # 40*128 = 5120 complex samples; se of |z|^2 mean is sigma^2/sqrt(n)
    assert power == pytest.approx(0.25, rel=0.06)
    assert abs(np.mean(z.real)) < 0.02 and abs(np.mean(z.imag)) < 0.02


def test_drift_phase_factor_between_frames():
    ofdm = tiny_scenario().ofdm
    d_cfo, d_to = 250.0, 4e-8
    base = tiny_scenario(offsets=OffsetState(cfo=300.0, to=2e-7))
    drifted = tiny_scenario(offsets=OffsetState(cfo=300.0 + d_cfo, to=2e-7 + d_to))
    a = synth_snapshot(base, data=unit_symbols(16), frame_id=0).data
    b = synth_snapshot(drifted, data=unit_symbols(16), frame_id=0).data
    g = np.arange(ofdm.g_symbols)[:, None]
    n = np.arange(ofdm.n_c)[None, :]
    carrier = np.exp(-2j * np.pi * ofdm.f_c * d_to)
    phase = carrier * np.exp(-2j * np.pi * (d_cfo * (g * ofdm.t_sym + ofdm.t_cp) + n * ofdm.delta_f * d_to))
    assert np.abs(b - a * phase).max() < 1e-9 * np.abs(a).max()


def test_non_unit_data_rejected():
    sc = tiny_scenario()
    bad = DataSymbols(np.array([1.0 + 0j] * 15 + [1.5 + 0j]), constellation="unit")
    with pytest.raises(ValueError, match="unit magnitude"):
        synth_snapshot(sc, data=bad)


def test_exact_mode_reduces_to_approx_without_frequency_error():
    sc = tiny_scenario(
        paths=(PathParams(gain=0.7, delay=3e-7),), offsets=OffsetState(to=1e-7)
    )
    approx = synth_snapshot(sc, data=unit_symbols(16), frame_id=0)
    exact = synth_snapshot(sc, data=unit_symbols(16), frame_id=0, exact=True)
    assert np.abs(approx.data - exact.data).max() < 1e-12


def test_exact_mode_error_small_for_slow_paths(rng):
    sc = tiny_scenario(
        paths=(
            PathParams(gain=0.1, delay=4e-7),
            PathParams(gain=1.0, delay=2e-7, velocity=5.0),
        ),
        offsets=OffsetState(cfo=200.0),
    )
    data = random_qpsk(16, rng)
    approx = synth_snapshot(sc, data=data, frame_id=0)
    exact = synth_snapshot(sc, data=data, frame_id=0, exact=True)
    rel = np.abs(approx.data - exact.data).max() / np.abs(exact.data).max()
    # worst-case intra-symbol rotation angle (rad) bounds the relative error
    f_eff = 2 * 5.0 / C_LIGHT * 28e9 + 200.0
    bound = 2 * np.pi * f_eff * sc.ofdm.n_c * sc.ofdm.t_sam
    assert bound / 10 < rel < 2 * bound


def test_dump_round_trip(tmp_path, rng):
    sc = tiny_scenario(noise=0.1)
    snap = synth_snapshot(sc, frame_id=42)
    path = tmp_path / "snap.bin"
    save_snapshot(snap, path)
    back = load_snapshot(path)
    assert back.frame_id == 42
    assert back.data.shape == snap.data.shape
    # complex64 storage: relative error bounded by float32 epsilon
    assert np.abs(back.data - snap.data).max() < 1e-6 * np.abs(snap.data).max()


def test_dump_rejects_foreign_file(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"not a snapshot at all")
    with pytest.raises(ValueError):
        load_snapshot(path)
