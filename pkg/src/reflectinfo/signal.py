"""OFDM observation model: steering vectors, mean signal, gradients, noise.

The mean received vector at subcarrier p is a sum over paths of
gain * exp(-j*w_p*delay) * a_rx(aoa) * a_tx(aod)^T * pilot[p], with w_p the
baseband angular frequency of the subcarrier. Gradients are analytic in all
5 real parameters per path (delay, local departure/arrival angles, gain
real/imaginary parts).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import SubcarrierNotInUse
from .geometry import SPEED_OF_LIGHT, ArrayGeometry

PARAMS_PER_PATH = 5  # (tau, aod, aoa, Re gain, Im gain)


@dataclass(frozen=True)
class OfdmConfig:
    """OFDM waveform and link-budget parameters.

    tx_power_dbm is the expected total pilot energy per subcarrier across Tx
    antennas; power bookkeeping is dBm-native (linear values in milliwatt).
    """

    f_c_hz: float
    n_subcarriers: int
    delta_f_hz: float
    subcarriers: tuple  # used subcarrier indices, ordered
    tx_power_dbm: float = 0.0
    noise_figure_db: float = 8.0
    noise_density_dbm_hz: float = -174.0
    pilot_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "subcarriers", tuple(int(p) for p in self.subcarriers))
        if len(self.subcarriers) == 0:
            raise ValueError("subcarrier set must be nonempty")
        if self.delta_f_hz <= 0:
            raise ValueError("subcarrier spacing must be positive")
        half = self.n_subcarriers / 2
        for p in self.subcarriers:
            if not (-half <= p < half):
                raise ValueError(f"subcarrier index {p} outside [-N/2, N/2)")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f_c_hz

    @property
    def omega_c(self) -> float:
        return 2.0 * math.pi * self.f_c_hz

    @property
    def bandwidth_hz(self) -> float:
        return self.delta_f_hz * (max(self.subcarriers) - min(self.subcarriers))

    def omega(self, p: int) -> float:
        """Baseband angular frequency of subcarrier p."""
        return 2.0 * math.pi * p * self.delta_f_hz


@dataclass(frozen=True, eq=False)
class ChannelParams:
    """Per-path channel parameters: delays, local angles, complex gains."""

    delays: np.ndarray
    aod_local: np.ndarray
    aoa_local: np.ndarray
    gains: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "delays", np.asarray(self.delays, dtype=float))
        object.__setattr__(self, "aod_local", np.asarray(self.aod_local, dtype=float))
        object.__setattr__(self, "aoa_local", np.asarray(self.aoa_local, dtype=float))
        object.__setattr__(self, "gains", np.asarray(self.gains, dtype=complex))
        n = len(self.delays)
        if not (len(self.aod_local) == len(self.aoa_local) == len(self.gains) == n):
            raise ValueError("per-path arrays must have equal length")
        if np.any(self.delays <= 0):
            raise ValueError("delays must be positive")

    @property
    def n_paths(self) -> int:
        return len(self.delays)

    def as_vector(self) -> np.ndarray:
        """Real parameter vector, 5 entries per path."""
        out = np.empty(PARAMS_PER_PATH * self.n_paths)
        for l in range(self.n_paths):
            out[5 * l : 5 * l + 5] = (
                self.delays[l],
                self.aod_local[l],
                self.aoa_local[l],
                self.gains[l].real,
                self.gains[l].imag,
            )
        return out

    @staticmethod
    def from_vector(vec: np.ndarray) -> "ChannelParams":
        vec = np.asarray(vec, dtype=float)
        n = len(vec) // PARAMS_PER_PATH
        blocks = vec.reshape(n, PARAMS_PER_PATH)
        return ChannelParams(
            delays=blocks[:, 0],
            aod_local=blocks[:, 1],
            aoa_local=blocks[:, 2],
            gains=blocks[:, 3] + 1j * blocks[:, 4],
        )


@dataclass(frozen=True, eq=False)
class PilotSignal:
    """Constant-amplitude random-phase pilot symbols, one row per subcarrier."""

    symbols: np.ndarray  # shape (n_used_subcarriers, n_tx), complex
    subcarriers: tuple

    def __post_init__(self):
        object.__setattr__(self, "symbols", np.asarray(self.symbols, dtype=complex))
        object.__setattr__(self, "subcarriers", tuple(int(p) for p in self.subcarriers))
        index = {p: i for i, p in enumerate(self.subcarriers)}
        object.__setattr__(self, "_index", index)

    def at(self, p: int) -> np.ndarray:
        try:
            return self.symbols[self._index[p]]
        except KeyError:
            raise SubcarrierNotInUse(f"subcarrier {p} is not in the pilot set") from None


def make_pilot(config: OfdmConfig, n_tx: int) -> PilotSignal:
    """Draw the pilot: per-antenna amplitude sqrt(P/n_tx), seeded uniform phases."""
    amplitude = math.sqrt(10.0 ** (0.1 * config.tx_power_dbm) / n_tx)
    rng = np.random.default_rng(config.pilot_seed)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=(len(config.subcarriers), n_tx))
    return PilotSignal(amplitude * np.exp(1j * phases), config.subcarriers)


def steering_vector(array: ArrayGeometry, theta_local: float, f_c_hz: float) -> np.ndarray:
    """Array response for a plane wave from direction theta_local (array frame).

    Entry j is exp(j * w_c * d_j * cos(psi_j - theta) / c); all entries have
    unit modulus.
    """
    omega_c = 2.0 * math.pi * f_c_hz
    d = np.array([e[0] for e in array.elements])
    psi = np.array([e[1] for e in array.elements])
    phase = omega_c * d * np.cos(psi - theta_local) / SPEED_OF_LIGHT
    return np.exp(1j * phase)


def steering_vector_derivative(
    array: ArrayGeometry, theta_local: float, f_c_hz: float
) -> np.ndarray:
    """Entrywise derivative of steering_vector with respect to the angle."""
    omega_c = 2.0 * math.pi * f_c_hz
    d = np.array([e[0] for e in array.elements])
    psi = np.array([e[1] for e in array.elements])
    phase = omega_c * d * np.cos(psi - theta_local) / SPEED_OF_LIGHT
    dphase = omega_c * d * np.sin(psi - theta_local) / SPEED_OF_LIGHT
    return 1j * dphase * np.exp(1j * phase)


def _path_terms(config, params, tx_array, rx_array, pilot, p):
    """Per-path building blocks shared by mean_signal and its gradient."""
    x = pilot.at(p)
    omega_p = config.omega(p)
    terms = []
    for l in range(params.n_paths):
        a_tx = steering_vector(tx_array, params.aod_local[l], config.f_c_hz)
        a_rx = steering_vector(rx_array, params.aoa_local[l], config.f_c_hz)
        scalar_tx = a_tx @ x
        delay_factor = np.exp(-1j * omega_p * params.delays[l])
        terms.append((a_tx, a_rx, scalar_tx, delay_factor))
    return x, omega_p, terms


def mean_signal(
    config: OfdmConfig,
    params: ChannelParams,
    tx_array: ArrayGeometry,
    rx_array: ArrayGeometry,
    pilot: PilotSignal,
    p: int,
) -> np.ndarray:
    """Noise-free received vector at subcarrier p, length n_rx."""
    _, _, terms = _path_terms(config, params, tx_array, rx_array, pilot, p)
    out = np.zeros(rx_array.n_elements, dtype=complex)
    for l, (_, a_rx, scalar_tx, delay_factor) in enumerate(terms):
        out += params.gains[l] * delay_factor * scalar_tx * a_rx
    return out


def mean_signal_gradient(
    config: OfdmConfig,
    params: ChannelParams,
    tx_array: ArrayGeometry,
    rx_array: ArrayGeometry,
    pilot: PilotSignal,
    p: int,
) -> np.ndarray:
    """Jacobian of the mean signal at subcarrier p, shape (n_rx, 5 * n_paths).

    Column order per path: delay, local departure angle, local arrival angle,
    gain real part, gain imaginary part.
    """
    x, omega_p, terms = _path_terms(config, params, tx_array, rx_array, pilot, p)
    grad = np.zeros((rx_array.n_elements, PARAMS_PER_PATH * params.n_paths), dtype=complex)
    for l, (_, a_rx, scalar_tx, delay_factor) in enumerate(terms):
        h = params.gains[l]
        unit_term = delay_factor * scalar_tx * a_rx  # path term with gain 1
        da_tx = steering_vector_derivative(tx_array, params.aod_local[l], config.f_c_hz)
        da_rx = steering_vector_derivative(rx_array, params.aoa_local[l], config.f_c_hz)
        base = 5 * l
        grad[:, base + 0] = -1j * omega_p * h * unit_term
        grad[:, base + 1] = h * delay_factor * (da_tx @ x) * a_rx
        grad[:, base + 2] = h * delay_factor * scalar_tx * da_rx
        grad[:, base + 3] = unit_term
        grad[:, base + 4] = 1j * unit_term
    return grad


def path_gain(d: float, gamma: float, f_c_hz: float, phase_seed) -> complex:
    """Complex path gain: free-space magnitude scaled by the reflection loss.

    Magnitude sqrt(gamma) * wavelength / (4 * pi * d); phase uniform in
    [0, 2*pi) drawn deterministically from phase_seed.
    """
    if d <= 0:
        raise ValueError("distance must be positive")
    if not (0.0 <= gamma <= 1.0):
        raise ValueError("gamma must lie in [0, 1]")
    magnitude = math.sqrt(gamma) * (SPEED_OF_LIGHT / f_c_hz) / (4.0 * math.pi * d)
    phase = np.random.default_rng(phase_seed).uniform(0.0, 2.0 * math.pi)
    return magnitude * complex(math.cos(phase), math.sin(phase))


def noise_variance(config: OfdmConfig) -> float:
    """Noise variance per subcarrier entry, in milliwatt."""
    return 10.0 ** (0.1 * (config.noise_figure_db + config.noise_density_dbm_hz)) * (
        config.n_subcarriers * config.delta_f_hz
    )


def narrowband_check(
    config: OfdmConfig, tx_array: ArrayGeometry, rx_array: ArrayGeometry
) -> tuple:
    """Check the narrowband assumption: fractional bandwidth vs aperture.

    Returns (fractional_bandwidth, wavelength_over_aperture, ok) and issues a
    warning when the assumption is violated. A zero aperture never warns.
    """
    frac_bw = config.bandwidth_hz / config.f_c_hz
    d_max = max(tx_array.max_dimension(), rx_array.max_dimension())
    lam_over_d = math.inf if d_max == 0.0 else config.wavelength / d_max
    ok = frac_bw < lam_over_d
    if not ok:
        warnings.warn(
            f"narrowband assumption violated: B/f_c = {frac_bw:.3g} >= "
            f"wavelength/aperture = {lam_over_d:.3g}",
            stacklevel=2,
        )
    return frac_bw, lam_over_d, ok
