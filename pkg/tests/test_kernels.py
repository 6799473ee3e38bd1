import numpy as np
import pytest
from scipy import integrate, special, stats

from synclab import _kernels
from synclab._kernels import (
    log_gaussian_cdf,
    music_denominator,
    peak_probabilities,
    peak_probability,
)

PARITY_ATOL = 1e-10


def test_backend_flag_is_consistent():
    assert _kernels.BACKEND in ("numba", "numpy")
    assert _kernels.BACKEND == ("numba" if _kernels.USE_NUMBA else "numpy")


def test_log_gaussian_cdf_matches_scipy_deep_tail():
    x = np.array([-40.0, -20.0, -8.0, -1.0, 0.0, 1.0, 5.0, 38.0])
    got = log_gaussian_cdf(x)
    want = special.log_ndtr(x)
    assert np.allclose(got, want, rtol=1e-12, atol=1e-12)
    assert np.all(np.isfinite(got))
    # deep-tail magnitude sanity: log Phi(-40) ~ -804, not -inf
    assert got[0] < -700.0


def test_peak_probability_matches_scipy_quadrature():
    s = np.array([0.9, 0.1, 0.55, 0.4])
    sigma = 0.35

    def integrand(b, q):
        pdf = stats.norm.pdf(b, loc=s[q], scale=sigma)
        cdf = np.prod([stats.norm.cdf(b, loc=s[i], scale=sigma) for i in range(s.size) if i != q])
        return pdf * cdf

    for q in range(s.size):
        want, err = integrate.quad(
            integrand, s[q] - 10 * sigma, s[q] + 10 * sigma, args=(q,), epsabs=1e-12
        )
        got = peak_probability(s, sigma, q)
        assert got == pytest.approx(want, abs=max(1e-10, 10 * err)), q


def test_peak_probabilities_vector_matches_scalar(rng):
    s = rng.uniform(0, 1, 12)
    sigma = 0.25
    vec = peak_probabilities(s, sigma)
    for q in (0, 5, 11):
        assert vec[q] == pytest.approx(peak_probability(s, sigma, q), rel=1e-12)
    assert abs(vec.sum() - 1.0) < 1e-8


def test_music_denominator_matches_dense_oracle(rng):
    w_len, n_noise, n_grid = 10, 6, 32
    subspace = rng.standard_normal((w_len, n_noise)) + 1j * rng.standard_normal((w_len, n_noise))
    got = music_denominator(subspace, n_grid)
    want = np.empty(n_grid)
    for j in range(n_grid):
        a = np.exp(-2j * np.pi * np.arange(w_len) * j / n_grid)
        want[j] = np.real(a.conj() @ subspace @ subspace.conj().T @ a)
    assert np.allclose(got, want, rtol=1e-10, atol=1e-10)


def test_music_denominator_zero_subspace():
    assert np.allclose(music_denominator(np.zeros((4, 2), dtype=np.complex128), 8), 0.0)


def test_backends_agree(rng):
    # run both implementation families directly regardless of active backend
    if not _kernels.HAS_NUMBA:
        pytest.skip("numba backend not importable here")
    s = rng.uniform(0, 1, 16)
    sigma = 0.3
    np_probs = _kernels._np_peak_probabilities(s, sigma)
    nb_probs = _kernels._nb_peak_probabilities(s, sigma, _kernels._GL15_X, _kernels._GL15_W,
                                               _kernels._GL7_X, _kernels._GL7_W)
    assert np.abs(np_probs - nb_probs).max() < PARITY_ATOL

    x = np.linspace(-30, 8, 77)
    assert np.abs(_kernels._np_log_gaussian_cdf(x) - _kernels._nb_log_gaussian_cdf(x)).max() < 1e-9

    sub = rng.standard_normal((8, 3)) + 1j * rng.standard_normal((8, 3))
    a = _kernels._np_music_denominator(sub, 24)
    b = _kernels._nb_music_denominator(sub, 24)
    assert np.abs(a - b).max() < PARITY_ATOL * np.abs(a).max()


def test_disable_flag_selects_numpy_backend(tmp_path):
    import subprocess
    import sys

    code = "import synclab; print(synclab.kernel_backend())"
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True,
        text=True,
        env={"PATH": "/usr/bin:/bin", "SYNCLAB_DISABLE_NUMBA": "1"},
        check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_inputs_are_validated():
    with pytest.raises(ValueError):
        peak_probability(np.ones(4), -1.0, 0)
    with pytest.raises(ValueError):
        peak_probability(np.ones(4), 0.5, 7)
    with pytest.raises(ValueError):
        peak_probabilities(np.ones((2, 2)), 0.5)
