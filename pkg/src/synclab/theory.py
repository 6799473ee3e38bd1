"""Peak-probability and MSE theory for the correlation row, plus the
circulant window construction.

The searched correlation row is modelled as a real Gaussian vector with
mean ``s`` (unit peak at the drift cell) and per-element variance
``sigma_bar_sq``.  The probability that cell q wins the argmax is a 1-D
integral of the Gaussian density at q times the product of CDFs everywhere
else; products of hundreds of CDFs underflow, so the quadrature works in
the log domain (see _kernels).  Index arithmetic is 0-based throughout,
which is what makes the uniform-spectrum MSE come out to sum(q^2)/n.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import special

from ._common import round_half_up
from ._kernels import peak_probabilities, peak_probability
from .windows import Window, circular_autocorrelation, padded_spectrum

logger = logging.getLogger(__name__)

# relative floor under which a circulant spectral coefficient counts as zero
_SINGULAR_RTOL = 1e-9
# lags this far off the cell grid get rounded with a warning
_LAG_GRID_TOL = 1e-9


class SingularCirculantError(ValueError):
    """The lag-weight circulant has a (near-)zero spectral coefficient."""


@dataclass(frozen=True, eq=False)
class MeanSpectrum:
    """Mean of the searched correlation row plus its noise variance."""

    values: np.ndarray  # real, length KN_c, unit peak by convention
    sigma_bar_sq: float  # per-element Gaussian variance
    target_index: float  # drift location in cells, may be fractional

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("mean spectrum needs at least 2 cells")
        if not np.all(np.isfinite(vals)):
            raise ValueError("mean spectrum must be finite")
        if not (np.isfinite(self.sigma_bar_sq) and self.sigma_bar_sq > 0.0):
            raise ValueError("sigma_bar_sq must be positive and finite")
        if not np.isfinite(self.target_index):
            raise ValueError("target_index must be finite")

    @property
    def sigma_bar(self) -> float:
        return float(np.sqrt(self.sigma_bar_sq))

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class TheoreticalMse:
    mse: float  # grid cells squared
    probabilities: np.ndarray  # per-index argmax probabilities


@dataclass(frozen=True, eq=False)
class CirculantSpec:
    """Gain products accumulated at their delay lags, one slot per cell."""

    phi_tilde: np.ndarray  # complex, length n
    j_matrix_size: int

    def __post_init__(self):
        phi = np.asarray(self.phi_tilde, dtype=np.complex128)
        object.__setattr__(self, "phi_tilde", phi)
        if phi.shape != (self.j_matrix_size,):
            raise ValueError("phi_tilde length must equal j_matrix_size")

    def spectral_coefficients(self) -> np.ndarray:
        """Eigenvalues of the circulant under the synthesis-kernel DFT."""
        n = self.j_matrix_size
        return n * np.fft.ifft(self.phi_tilde)


@dataclass(frozen=True)
class CirculantShift:
    """Right cyclic-shift permutation; apply(x)[j] = x[(j-1) mod n].

    Stands in for the n x n shift matrix acting on row vectors; only the
    index map is ever materialized.
    """

    n: int

    def apply(self, vec: np.ndarray, power: int = 1) -> np.ndarray:
        v = np.asarray(vec)
        if v.shape[-1] != self.n:
            raise ValueError(f"vector length {v.shape[-1]} does not match n={self.n}")
        return np.roll(v, power % self.n, axis=-1)


def circulant_shift_matrix(n: int) -> CirculantShift:
    """The cyclic-shift operator of size n (as a permutation, never dense)."""
    if n < 2:
        raise ValueError("shift operator needs n >= 2")
    return CirculantShift(n)


def q_function(x):
    """Gaussian upper-tail probability Q(x) = 1 - Phi(x)."""
    return 0.5 * special.erfc(np.asarray(x, dtype=np.float64) / np.sqrt(2.0))


def prob_peak_index(spectrum: MeanSpectrum, q: int) -> float:
    """Probability that cell q is the argmax of the noisy correlation row."""
    n = len(spectrum)
    if not 0 <= q < n:
        raise ValueError(f"index {q} out of range for {n} cells")
    return peak_probability(spectrum.values, spectrum.sigma_bar, q)


def peak_probability_vector(spectrum: MeanSpectrum) -> np.ndarray:
    """All argmax probabilities; sums to 1 up to quadrature tolerance."""
    return peak_probabilities(spectrum.values, spectrum.sigma_bar)


def mse_theoretical(spectrum: MeanSpectrum) -> TheoreticalMse:
    """Sum of P(argmax = q) * (q - target)^2 over the unwrapped index metric."""
    probs = peak_probability_vector(spectrum)
    q = np.arange(len(spectrum), dtype=np.float64)
    mse = float(np.sum(probs * (q - spectrum.target_index) ** 2))
    return TheoreticalMse(mse=mse, probabilities=probs)


def optimal_spectrum(target_index: float, kn_c: int) -> np.ndarray:
    """One-hot mean spectrum at the rounded target cell."""
    if kn_c < 2:
        raise ValueError("kn_c must be >= 2")
    s = np.zeros(kn_c, dtype=np.float64)
    s[round_half_up(target_index) % kn_c] = 1.0
    return s


def mse_asymptotic_optimal(kn_c: int, sigma_bar_sq: float, target_index: float) -> float:
    """Closed-form MSE of the one-hot spectrum.

    Every off-target cell has the same win probability (mean 0, one unit
    competitor, kn_c-2 zero competitors), so the MSE is that single integral
    times the sum of squared index offsets.  The integral is evaluated with
    the identical log-domain quadrature as prob_peak_index, which is the
    point: the result must match mse_theoretical(one-hot) to tight relative
    tolerance for integer targets.  For fractional targets this sum skips
    the rounded target cell itself and is only an approximation.
    """
    if kn_c < 2:
        raise ValueError("kn_c must be >= 2")
    if not (np.isfinite(sigma_bar_sq) and sigma_bar_sq > 0.0):
        raise ValueError("sigma_bar_sq must be positive and finite")
    s = optimal_spectrum(target_index, kn_c)
    t = round_half_up(target_index) % kn_c
    probe = (t + 1) % kn_c  # any off-target index, all share one probability
    p_off = peak_probability(s, float(np.sqrt(sigma_bar_sq)), probe)
    q = np.arange(kn_c, dtype=np.float64)
    weights = (q - target_index) ** 2
    weights[t] = 0.0
    return float(p_off * np.sum(weights))


def spectrum_from_window(
    window: Window, k_pad: int, target_index: float, sigma_bar_sq: float
) -> MeanSpectrum:
    """Mean correlation row a window would produce for a single static path.

    The expected row is the window spectrum's circular autocorrelation,
    magnitude-normalized to a unit peak and rolled so the peak sits at the
    rounded target cell.
    """
    rho = circular_autocorrelation(padded_spectrum(window, k_pad))
    mag = np.abs(rho)
    values = np.roll(mag / mag[0], round_half_up(target_index))
    return MeanSpectrum(values=values, sigma_bar_sq=sigma_bar_sq, target_index=target_index)


def simulate_argmax_mse(
    spectrum: MeanSpectrum, trials: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Monte Carlo argmax MSE of rows drawn N(s, sigma_bar_sq I).

    Returns (mse, standard error of the mse) on the same unwrapped index
    metric as mse_theoretical.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = len(spectrum)
    draws = spectrum.values[None, :] + spectrum.sigma_bar * rng.standard_normal((trials, n))
    idx = np.argmax(draws, axis=1)
    sq = (idx - spectrum.target_index) ** 2
    return float(np.mean(sq)), float(np.std(sq) / np.sqrt(trials))


def _lag_cells(lag: float) -> int:
    r = round_half_up(lag)
    if abs(lag - r) > _LAG_GRID_TOL:
        logger.warning("off-grid lag %.6f cells rounded to %d", lag, r)
    return r


def lag_weights(paths, n: int) -> CirculantSpec:
    """Accumulate alpha_l * conj(alpha_l') at lag (lag_l - lag_l') mod n.

    paths: sequence of (amplitude: complex, lag_cells: real) per path.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not paths:
        raise ValueError("need at least one path")
    amps = np.array([complex(a) for a, _ in paths])
    lags = [_lag_cells(float(l)) for _, l in paths]
    phi = np.zeros(n, dtype=np.complex128)
    for a_l, d_l in zip(amps, lags):
        for a_k, d_k in zip(amps, lags):
            phi[(d_l - d_k) % n] += a_l * np.conj(a_k)
    return CirculantSpec(phi_tilde=phi, j_matrix_size=n)


def forward_spectrum_from_rho(rho: np.ndarray, paths) -> np.ndarray:
    """Mean row from a window autocorrelation: s[q] = sum_d phi[d] rho[(q+d) mod n].

    Computed through the DFT, which diagonalizes the underlying circulant;
    no dense matrix is ever formed.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    spec = lag_weights(paths, rho.size)
    return np.fft.ifft(np.fft.fft(rho) * spec.spectral_coefficients())


def rho_for_target_spectrum(s: np.ndarray, paths) -> np.ndarray:
    """Invert the forward model: the autocorrelation whose mean row equals s.

    Divides the DFT of s by the circulant's spectral coefficients; raises
    SingularCirculantError when any coefficient sits within a relative
    floor of zero (the construction is then non-invertible, e.g. two
    equal-gain paths half the grid apart).
    """
    s = np.asarray(s, dtype=np.complex128)
    spec = lag_weights(paths, s.size)
    coeff = spec.spectral_coefficients()
    scale = float(np.max(np.abs(coeff)))
    if scale <= 0.0 or np.min(np.abs(coeff)) <= _SINGULAR_RTOL * scale:
        raise SingularCirculantError(
            "circulant spectral coefficient vanishes; spectrum not achievable"
        )
    return np.fft.ifft(np.fft.fft(s) / coeff)
