"""Observation-model tests: OFDM config, pilots, steering, signal gradients."""

import math

import numpy as np
import pytest

from reflectinfo import (
    ChannelParams,
    OfdmConfig,
    SubcarrierNotInUse,
    make_pilot,
    mean_signal,
    mean_signal_gradient,
    narrowband_check,
    noise_variance,
    path_gain,
    steering_vector,
    steering_vector_derivative,
    uca_array,
    ula_array,
)
from fdcheck import fd_signal_gradient

SMALL = OfdmConfig(
    f_c_hz=38e9,
    n_subcarriers=64,
    delta_f_hz=120e3,
    subcarriers=tuple(p for p in range(-8, 9) if p != 0),
    tx_power_dbm=0.0,
    noise_figure_db=8.0,
    noise_density_dbm_hz=-174.0,
    pilot_seed=5,
)


def small_params(rng, n_paths=2):
    return ChannelParams(
        delays=rng.uniform(3e-8, 2e-7, n_paths),
        aod_local=rng.uniform(-math.pi, math.pi, n_paths),
        aoa_local=rng.uniform(-math.pi, math.pi, n_paths),
        gains=rng.normal(size=n_paths) + 1j * rng.normal(size=n_paths),
    )


def test_config_validation():
    with pytest.raises(ValueError, match="nonempty"):
        OfdmConfig(38e9, 64, 120e3, ())
    with pytest.raises(ValueError, match="outside"):
        OfdmConfig(38e9, 64, 120e3, (40,))
    with pytest.raises(ValueError, match="spacing"):
        OfdmConfig(38e9, 64, -1.0, (1,))


def test_config_derived_quantities():
    cfg = OfdmConfig(38e9, 1024, 120e3, tuple(p for p in range(-420, 421) if p != 0))
    assert cfg.wavelength == pytest.approx(299792458.0 / 38e9)
    assert cfg.bandwidth_hz == pytest.approx(840 * 120e3)
    assert cfg.omega(7) == pytest.approx(2 * math.pi * 7 * 120e3)


def test_pilot_power_and_determinism():
    pilot = make_pilot(SMALL, n_tx=4)
    power_mw = 10 ** (0.1 * SMALL.tx_power_dbm)
    # constant per-entry magnitude; total power split across antennas
    np.testing.assert_allclose(np.abs(pilot.symbols), math.sqrt(power_mw / 4))
    np.testing.assert_allclose(
        np.sum(np.abs(pilot.symbols) ** 2, axis=1), power_mw, rtol=1e-12
    )
    again = make_pilot(SMALL, n_tx=4)
    np.testing.assert_array_equal(pilot.symbols, again.symbols)
    other = make_pilot(
        OfdmConfig(38e9, 64, 120e3, SMALL.subcarriers, pilot_seed=6), n_tx=4
    )
    assert np.any(pilot.symbols != other.symbols)


def test_pilot_rejects_unused_subcarrier():
    pilot = make_pilot(SMALL, n_tx=2)
    with pytest.raises(SubcarrierNotInUse):
        pilot.at(0)
    assert pilot.at(1).shape == (2,)


def test_channel_params_vector_roundtrip():
    rng = np.random.default_rng(1)
    params = small_params(rng, 3)
    back = ChannelParams.from_vector(params.as_vector())
    np.testing.assert_allclose(back.delays, params.delays)
    np.testing.assert_allclose(back.gains, params.gains)


def test_channel_params_validation():
    with pytest.raises(ValueError, match="delays"):
        ChannelParams([0.0], [0.0], [0.0], [1.0])
    with pytest.raises(ValueError, match="equal length"):
        ChannelParams([1e-8], [0.0, 0.1], [0.0], [1.0])


def test_steering_vector_phase_reference():
    arr = uca_array(8, 0.02)
    vec = steering_vector(arr, 0.3, 38e9)
    assert vec.shape == (8,)
    np.testing.assert_allclose(np.abs(vec), 1.0)
    # a single reference element has no phase
    single = steering_vector(ula_array(1, 0.01), 1.2, 38e9)
    np.testing.assert_allclose(single, [1.0])


def test_steering_vector_derivative_matches_fd():
    arr = uca_array(8, 0.02)
    h = 1e-7
    for theta in (-2.0, 0.4, 2.9):
        analytic = steering_vector_derivative(arr, theta, 38e9)
        fd = (steering_vector(arr, theta + h, 38e9) - steering_vector(arr, theta - h, 38e9)) / (
            2 * h
        )
        np.testing.assert_allclose(analytic, fd, atol=1e-6 * np.abs(analytic).max())


def test_mean_signal_single_path_scalar_arrays():
    one = ula_array(1, 0.01)
    params = ChannelParams([1e-7], [0.2], [-0.4], [0.5 - 0.25j])
    pilot = make_pilot(SMALL, n_tx=1)
    p = 3
    m = mean_signal(SMALL, params, one, one, pilot, p)
    expected = (0.5 - 0.25j) * np.exp(-1j * SMALL.omega(p) * 1e-7) * pilot.at(p)
    np.testing.assert_allclose(m, expected, rtol=1e-12)


def test_mean_signal_gradient_matches_fd():
    rng = np.random.default_rng(42)
    tx = ula_array(3, 0.004)
    rx = uca_array(4, 0.006)
    params = small_params(rng, 2)
    pilot = make_pilot(SMALL, n_tx=3)
    for p in (-8, 2, 7):
        analytic = mean_signal_gradient(SMALL, params, tx, rx, pilot, p)
        fd = fd_signal_gradient(SMALL, params, tx, rx, pilot, p)
        err = np.linalg.norm(analytic - fd) / np.linalg.norm(analytic)
        assert err < 1e-7


def test_path_gain_magnitude_and_phase_determinism():
    lam = 299792458.0 / 38e9
    g = path_gain(20.0, 0.1, 38e9, (0, 1))
    assert abs(g) == pytest.approx(math.sqrt(0.1) * lam / (4 * math.pi * 20.0))
    assert path_gain(20.0, 0.1, 38e9, (0, 1)) == g
    assert path_gain(20.0, 0.1, 38e9, (0, 2)) != g
    with pytest.raises(ValueError):
        path_gain(0.0, 0.1, 38e9, 0)
    with pytest.raises(ValueError):
        path_gain(20.0, -0.5, 38e9, 0)


def test_noise_variance_reference_value():
    cfg = OfdmConfig(38e9, 1024, 120e3, (1,), noise_figure_db=8.0, noise_density_dbm_hz=-174.0)
    assert noise_variance(cfg) == pytest.approx(10 ** (0.1 * (8 - 174)) * 1024 * 120e3)


def test_narrowband_check_ok_and_violation():
    tx = ula_array(32, 0.5 * SMALL.wavelength)
    rx = uca_array(16, 0.02)
    frac_bw, lam_over_d, ok = narrowband_check(SMALL, tx, rx)
    assert ok and frac_bw < lam_over_d

    wide = OfdmConfig(38e9, 4096, 60e6, tuple(p for p in range(-2000, 2001) if p != 0))
    with pytest.warns(UserWarning, match="narrowband"):
        _, _, ok = narrowband_check(wide, tx, rx)
    assert not ok


def test_narrowband_check_zero_aperture_never_warns(recwarn):
    one = ula_array(1, 0.01)
    _, lam_over_d, ok = narrowband_check(SMALL, one, one)
    assert ok and math.isinf(lam_over_d)
    assert len(recwarn) == 0
