import json
import math

import numpy as np
import pytest

from synclab import (
    ArrayParams,
    OfdmParams,
    OffsetState,
    PathParams,
    Scenario,
    derive_grids,
    scenario_from_dict,
    steering_vector,
    validate,
)
from synclab.scenario import load_scenario

REL_TOL = 1e-12


def small_ofdm(**kw):
    base = dict(f_c=28e9, delta_f=1e5, n_c=128, n_cp=16, g_symbols=32, k_pad=1)
    base.update(kw)
    return OfdmParams(**base)


def one_path_scenario(**kw):
    ofdm = kw.pop("ofdm", small_ofdm())
    base = dict(
        ofdm=ofdm,
        array=ArrayParams.half_wavelength(m_r=4, m_t=2, f_c=ofdm.f_c),
        paths=(PathParams(gain=1.0, delay=1e-7),),
        offsets=OffsetState(),
    )
    base.update(kw)
    return Scenario(**base)


def test_sample_interval_derived():
    ofdm = small_ofdm()
    assert ofdm.t_sam == pytest.approx(1.0 / (128 * 1e5), rel=REL_TOL)
    assert ofdm.t_sym == pytest.approx(144 * ofdm.t_sam, rel=REL_TOL)
    assert ofdm.t_cp == pytest.approx(16 * ofdm.t_sam, rel=REL_TOL)


def test_delay_cell_full_size():
    grid = derive_grids(small_ofdm())
    # 1/(K*N_c*delta_f) with K=1: hand value 78.125 ns
    assert grid.t_r == pytest.approx(78.125e-9, rel=REL_TOL)


def test_delay_cell_halves_with_padding():
    grid = derive_grids(small_ofdm(k_pad=2))
    assert grid.t_r == pytest.approx(39.0625e-9, rel=REL_TOL)


def test_doppler_cell_direct_arithmetic():
    # oracle: f_r = 1/(K*G*T_sym), T_sym = 144*t_sam = 1.125e-5 s
    ofdm = small_ofdm()
    grid = derive_grids(ofdm)
    by_hand = 1.0 / (32 * 144 * ofdm.t_sam)
    assert by_hand == pytest.approx(2777.7777777777774, rel=1e-12)
    assert grid.f_r == pytest.approx(by_hand, rel=REL_TOL)


def test_grid_tiles_unambiguous_span():
    ofdm = small_ofdm(k_pad=4, n_c=64, g_symbols=16)
    grid = derive_grids(ofdm)
    assert grid.n_delay_bins == 4 * 64
    assert grid.n_doppler_bins == 4 * 16
    assert grid.n_delay_bins * grid.t_r == pytest.approx(1.0 / ofdm.delta_f, rel=REL_TOL)
    assert grid.n_doppler_bins * grid.f_r == pytest.approx(1.0 / ofdm.t_sym, rel=REL_TOL)


def test_steering_broadside_is_flat():
    v = steering_vector(5, 0.005, 0.01, math.pi / 2)
    assert np.allclose(v, np.ones(5), atol=1e-12)


def test_steering_single_element():
    assert np.allclose(steering_vector(1, 0.005, 0.01, 0.3), [1.0])


def test_steering_endfire_alternates():
    lam = 0.0107
    v = steering_vector(4, lam / 2, lam, 0.0)
    assert np.allclose(v, [1, -1, 1, -1], atol=1e-12)


def test_steering_unimodular(rng):
    lam = 0.0107
    for angle in rng.uniform(0, np.pi, size=8):
        v = steering_vector(6, lam / 2, lam, angle)
        assert np.max(np.abs(np.abs(v) - 1.0)) < 1e-12


def test_full_size_config_validates():
    sc = one_path_scenario()
    assert validate(sc) == []


def test_no_static_path_flagged():
    sc = one_path_scenario(paths=(PathParams(gain=1.0, delay=1e-7, velocity=3.0),))
    codes = [v.code for v in validate(sc)]
    assert "no-static-path" in codes


def test_delay_exceeding_symbol_flagged():
    sc = one_path_scenario(paths=(PathParams(gain=1.0, delay=1.5 / 1e5),))
    codes = [v.code for v in validate(sc)]
    assert "delay-exceeds-symbol" in codes


def test_drift_ranges_flagged():
    ofdm = small_ofdm()
    sc = one_path_scenario(offsets=OffsetState(cfo_drift=0.6 / ofdm.t_sym))
    assert "cfo-drift-out-of-range" in [v.code for v in validate(sc)]
    sc = one_path_scenario(offsets=OffsetState(to_drift=0.6 / ofdm.delta_f))
    assert "to-drift-out-of-range" in [v.code for v in validate(sc)]


def test_bad_precoder_flagged():
    arr = ArrayParams(m_r=4, m_t=2, spacing=0.005, wavelength=0.0107,
                      precoder=np.array([1.0, 1.0]))
    sc = one_path_scenario(array=arr)
    assert "precoder-not-unit-norm" in [v.code for v in validate(sc)]


def test_antenna_index_checked():
    sc = one_path_scenario(antenna_index=7)
    assert "antenna-index-out-of-range" in [v.code for v in validate(sc)]


def test_doppler_from_velocity():
    p = PathParams(gain=1.0, delay=0.0, velocity=5.0)
    # 2*v/c * f_c at 28 GHz: 933.33 Hz
    assert p.doppler_hz(28e9) == pytest.approx(2 * 5.0 / 299792458.0 * 28e9, rel=REL_TOL)
    assert p.doppler_hz(28e9) == pytest.approx(933.33, rel=1e-3)


def test_config_dict_round_trip():
    doc = {
        "ofdm": {"f_c": 28e9, "delta_f": 1e5, "n_c": 64, "n_cp": 8, "g_symbols": 16, "k_pad": 2},
        "array": {"m_r": 4, "m_t": 2, "spacing": 0.005, "wavelength": 0.0107},
        "paths": [
            {"gain": [1.0, 0.0], "delay": 2e-7, "aoa_deg": 45.0},
            {"gain": 0.5, "delay": 4e-7, "velocity": 6.0, "aoa": 1.0},
        ],
        "offsets": {"cfo": 400.0, "to": 1e-7, "cfo_drift": 200.0, "to_drift": 5e-8},
        "noise_variance": 0.01,
        "antenna_index": 1,
        "seed": 99,
    }
    sc = scenario_from_dict(doc)
    assert validate(sc) == []
    assert sc.ofdm.n_c == 64
    assert sc.paths[0].aoa == pytest.approx(math.radians(45.0))
    assert sc.paths[1].velocity == 6.0
    assert sc.offsets.cfo == 400.0
    assert sc.antenna_index == 1


def test_unknown_keys_rejected():
    doc = {
        "ofdm": {"f_c": 1e9, "delta_f": 1e5, "n_c": 16, "n_cp": 2, "g_symbols": 4},
        "paths": [{"gain": 1.0, "delay": 0.0}],
        "bogus": 1,
    }
    with pytest.raises(ValueError, match="bogus"):
        scenario_from_dict(doc)


def test_angle_given_both_ways_rejected():
    doc = {
        "ofdm": {"f_c": 1e9, "delta_f": 1e5, "n_c": 16, "n_cp": 2, "g_symbols": 4},
        "paths": [{"gain": 1.0, "delay": 0.0, "aoa": 0.5, "aoa_deg": 30.0}],
    }
    with pytest.raises(ValueError):
        scenario_from_dict(doc)


def test_load_scenario_json(tmp_path):
    doc = {
        "ofdm": {"f_c": 1e9, "delta_f": 1e5, "n_c": 16, "n_cp": 2, "g_symbols": 4},
        "paths": [{"gain": 1.0, "delay": 0.0}],
    }
    path = tmp_path / "scn.json"
    path.write_text(json.dumps(doc))
    sc = load_scenario(path)
    assert sc.ofdm.n_c == 16
    assert len(sc.paths) == 1


def test_load_scenario_toml(tmp_path):
    text = "\n".join(
        [
            "[ofdm]",
            "f_c = 1e9",
            "delta_f = 1e5",
            "n_c = 16",
            "n_cp = 2",
            "g_symbols = 4",
            "[[paths]]",
            "gain = 1.0",
            "delay = 0.0",
        ]
    )
    path = tmp_path / "scn.toml"
    path.write_text(text)
    sc = load_scenario(path)
    assert sc.ofdm.g_symbols == 4


def test_offsets_advance():
    o = OffsetState(cfo=100.0, to=1e-7, cfo_drift=50.0, to_drift=2e-8)
    o2 = o.advanced()
    assert o2.cfo == pytest.approx(150.0)
    assert o2.to == pytest.approx(1.2e-7)
    assert o2.cfo_drift == o.cfo_drift
