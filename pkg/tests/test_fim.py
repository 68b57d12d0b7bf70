"""Numerical FIM tests: channel FIM, Jacobian, priors, Schur reduction."""

import math

import numpy as np
import pytest

from reflectinfo import (
    PERFECT,
    ChannelParams,
    OfdmConfig,
    PriorSpec,
    Point2,
    Reflector,
    Scenario,
    SingularFim,
    SingularNuisanceBlock,
    SingularPriorCovariance,
    VaPrior,
    asymptotic_channel_fim,
    asymptotic_path_infos,
    channel_fim,
    efim_poc,
    fix_parameters,
    gain_reduced_channel_fim,
    hybrid_fim,
    invert_spd,
    jacobian_T,
    make_pilot,
    peb,
    prior_fim,
    reciprocal_condition,
    scenario_paths,
    uca_array,
    ula_array,
    unit,
    unit_perp,
)
from reflectinfo.fim import _prior_block
from fdcheck import fd_jacobian_T

CFG = OfdmConfig(
    f_c_hz=38e9,
    n_subcarriers=64,
    delta_f_hz=120e3,
    subcarriers=tuple(p for p in range(-8, 9) if p != 0),
    pilot_seed=3,
)
ONE = ula_array(1, 0.01)


def room_scenario(include_los=True, active=(0,), clock_offset_m=0.0):
    walls = (
        Reflector(Point2(0.0, -12.5), math.pi / 2),
        Reflector(Point2(0.0, 12.5), -math.pi / 2),
    )
    return Scenario(
        tx_position=Point2(0.0, 0.0),
        tx_array=ula_array(3, 0.004, axis_angle=math.pi / 2),
        rx_position=Point2(12.5, 5.0),
        rx_array=uca_array(4, 0.006),
        rx_orientation=0.4,
        clock_offset_m=clock_offset_m,
        reflectors=walls,
        include_los=include_los,
        active_reflectors=active,
    )


def room_channel(scenario, gains_scale=1.0):
    rng = np.random.default_rng(11)
    paths = scenario_paths(scenario)
    n = len(paths)
    params = ChannelParams(
        delays=[p.tau for p in paths],
        aod_local=[p.theta_tx_local for p in paths],
        aoa_local=[p.theta_rx_local for p in paths],
        gains=gains_scale * (rng.normal(size=n) + 1j * rng.normal(size=n)),
    )
    pilot = make_pilot(CFG, scenario.tx_array.n_elements)
    return paths, params, pilot


def test_channel_fim_symmetric_psd_and_noise_scaling():
    sc = room_scenario()
    _, params, pilot = room_channel(sc)
    J = channel_fim(CFG, params, sc.tx_array, sc.rx_array, pilot)
    np.testing.assert_allclose(J, J.T)
    w = np.linalg.eigvalsh(J)
    assert w.min() > -1e-9 * w.max()
    quieter = OfdmConfig(
        CFG.f_c_hz, CFG.n_subcarriers, CFG.delta_f_hz, CFG.subcarriers,
        noise_figure_db=CFG.noise_figure_db + 10.0, pilot_seed=CFG.pilot_seed,
    )
    J10 = channel_fim(quieter, params, sc.tx_array, sc.rx_array, pilot)
    np.testing.assert_allclose(J10, J / 10.0, rtol=1e-12)


@pytest.mark.parametrize("include_los,active,clock", [
    (True, (0,), 0.0),
    (True, (0, 1), 2.5),
    (False, (0, 1), -1.0),
    (True, (), 0.0),
])
def test_jacobian_matches_finite_differences(include_los, active, clock):
    sc = room_scenario(include_los=include_los, active=active, clock_offset_m=clock)
    T = jacobian_T(sc)
    T_fd = fd_jacobian_T(sc)
    assert np.linalg.norm(T - T_fd) / np.linalg.norm(T) < 1e-7
    # gains carry no position information
    n_paths = sc.n_paths
    for l in range(n_paths):
        assert np.all(T[:, 5 * l + 3 : 5 * l + 5] == 0.0)


def test_prior_block_rotation():
    prior = VaPrior(2.0, 0.5, 0.0)
    block = _prior_block(prior, theta_rx=0.0)
    np.testing.assert_allclose(block, np.diag([1 / 4.0, 1 / 0.25]), atol=1e-12)
    theta = 0.7
    rotated = _prior_block(prior, theta)
    rot = np.column_stack([unit(theta), unit_perp(theta)])
    np.testing.assert_allclose(rot.T @ rotated @ rot, np.diag([1 / 4.0, 1 / 0.25]), atol=1e-12)


def test_prior_validation():
    with pytest.raises(ValueError):
        VaPrior(-1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        VaPrior(1.0, 1.0, 1.0)
    with pytest.raises(SingularPriorCovariance):
        _prior_block(VaPrior(1.0, 1.0, 1.0 - 1e-13), 0.0)


def test_prior_fim_layout():
    sc = room_scenario(active=(0, 1))
    paths = scenario_paths(sc)
    spec = PriorSpec(clock_sigma_s=1e-9, va=(VaPrior(1.0, 1.0), None))
    P = prior_fim(spec, paths)
    assert P.shape == (8, 8)
    c = 299792458.0
    assert P[3, 3] == pytest.approx(1.0 / (c * 1e-9) ** 2)
    assert np.linalg.norm(P[4:6, 4:6]) > 0.0
    assert np.linalg.norm(P[6:8, 6:8]) == 0.0
    # PERFECT contributes nothing here (elimination happens downstream)
    spec2 = PriorSpec(clock_sigma_s=PERFECT, va=(PERFECT, None))
    P2 = prior_fim(spec2, paths)
    assert np.linalg.norm(P2) == 0.0


def test_prior_fim_entry_count_mismatch():
    sc = room_scenario(active=(0, 1))
    with pytest.raises(ValueError, match="one VA prior entry"):
        prior_fim(PriorSpec(va=(None,)), scenario_paths(sc))


def test_gain_reduction_equals_explicit_nuisance_treatment():
    sc = room_scenario(active=(0, 1))
    paths, params, pilot = room_channel(sc)
    J = channel_fim(CFG, params, sc.tx_array, sc.rx_array, pilot)
    T = jacobian_T(sc, paths)
    n_paths = len(paths)
    geo = [5 * l + i for l in range(n_paths) for i in range(3)]
    gain = [5 * l + i for l in range(n_paths) for i in (3, 4)]
    # extended parameter vector (position params, gains): Schur the gains out
    T_geo = T[:, geo]
    big = np.block(
        [
            [T_geo @ J[np.ix_(geo, geo)] @ T_geo.T, T_geo @ J[np.ix_(geo, gain)]],
            [J[np.ix_(gain, geo)] @ T_geo.T, J[np.ix_(gain, gain)]],
        ]
    )
    n_pos = T.shape[0]
    expected = big[:n_pos, :n_pos] - big[:n_pos, n_pos:] @ np.linalg.solve(
        big[n_pos:, n_pos:], big[n_pos:, :n_pos]
    )
    reduced = gain_reduced_channel_fim(J)
    np.testing.assert_allclose(T @ reduced @ T.T, expected, rtol=1e-9, atol=1e-9)
    # gain rows/cols are zeroed
    assert np.linalg.norm(reduced[np.ix_(gain, gain)]) == 0.0


def test_gain_reduction_rejects_singular_gain_block():
    with pytest.raises(SingularNuisanceBlock):
        gain_reduced_channel_fim(np.zeros((5, 5)))


def test_efim_matches_manual_schur():
    rng = np.random.default_rng(2)
    n = 8  # 4 position params + 2 mirror points
    root = rng.normal(size=(n, n))
    hybrid = root @ root.T + np.eye(n)
    expected = hybrid[:4, :4] - hybrid[:4, 4:] @ np.linalg.solve(hybrid[4:, 4:], hybrid[4:, :4])
    np.testing.assert_allclose(efim_poc(hybrid), expected, rtol=1e-10, atol=1e-10)


def test_efim_perfect_va_elimination():
    rng = np.random.default_rng(4)
    root = rng.normal(size=(8, 8))
    hybrid = root @ root.T + np.eye(8)
    # eliminating the first mirror point = dropping its rows/cols, then Schur
    keep = [0, 1, 2, 3, 6, 7]
    sub = hybrid[np.ix_(keep, keep)]
    expected = sub[:4, :4] - sub[:4, 4:] @ np.linalg.solve(sub[4:, 4:], sub[4:, :4])
    np.testing.assert_allclose(efim_poc(hybrid, perfect_vas=(0,)), expected, rtol=1e-10)
    # eliminating every mirror point keeps the plain 4x4 block
    np.testing.assert_allclose(efim_poc(hybrid, perfect_vas=(0, 1)), hybrid[:4, :4])


def test_efim_singular_nuisance_block():
    hybrid = np.zeros((6, 6))
    hybrid[:4, :4] = np.eye(4)
    with pytest.raises(SingularNuisanceBlock) as excinfo:
        efim_poc(hybrid)
    assert excinfo.value.path_index == 0
    out = efim_poc(hybrid, allow_pinv=True)
    np.testing.assert_allclose(out, np.eye(4))


def test_fix_parameters():
    mat = np.arange(16.0).reshape(4, 4)
    reduced = fix_parameters(mat, ("orientation", "clock"))
    np.testing.assert_allclose(reduced, mat[np.ix_([0, 1], [0, 1])])
    np.testing.assert_allclose(fix_parameters(mat, ()), mat)
    with pytest.raises(ValueError, match="unknown parameter"):
        fix_parameters(mat, ("delay",))


def test_fixing_commutes_with_schur():
    rng = np.random.default_rng(9)
    root = rng.normal(size=(8, 8))
    hybrid = root @ root.T + np.eye(8)
    first = fix_parameters(efim_poc(hybrid), ("orientation", "clock"))
    # fixing before the reduction: drop rows 2,3 of the full matrix, Schur after
    keep = [0, 1, 4, 5, 6, 7]
    sub = hybrid[np.ix_(keep, keep)]
    second = sub[:2, :2] - sub[:2, 2:] @ np.linalg.solve(sub[2:, 2:], sub[2:, :2])
    np.testing.assert_allclose(first, second, rtol=1e-10)


def test_invert_spd_and_peb():
    mat = np.diag([4.0, 9.0])
    inverse, rcond = invert_spd(mat)
    np.testing.assert_allclose(inverse, np.diag([0.25, 1.0 / 9.0]))
    assert rcond == pytest.approx(4.0 / 9.0)
    assert peb(mat) == pytest.approx(math.sqrt(0.25 + 1.0 / 9.0))


def test_invert_spd_singular_direction():
    direction = np.array([1.0, 1.0]) / math.sqrt(2.0)
    mat = np.eye(2) - np.outer(direction, direction)
    with pytest.raises(SingularFim) as excinfo:
        invert_spd(mat)
    null = excinfo.value.null_direction
    assert abs(abs(null @ direction) - 1.0) < 1e-10
    assert reciprocal_condition(mat) < 1e-14


def test_asymptotic_infos_gain_schur():
    block = np.zeros((5, 5))
    block[:3, :3] = np.diag([4.0, 5.0, 6.0])
    block[3:, 3:] = np.eye(2)
    block[0, 3] = block[3, 0] = 1.0  # delay-gain coupling costs delay information
    infos = asymptotic_path_infos(block)
    np.testing.assert_allclose(infos, [[3.0, 5.0, 6.0]])
    diag = asymptotic_channel_fim(block)
    np.testing.assert_allclose(np.diag(diag), [3.0, 5.0, 6.0, 0.0, 0.0])
    assert np.linalg.norm(diag - np.diag(np.diag(diag))) == 0.0


def test_hybrid_fim_adds_prior():
    sc = room_scenario()
    paths, params, pilot = room_channel(sc)
    J = gain_reduced_channel_fim(channel_fim(CFG, params, sc.tx_array, sc.rx_array, pilot))
    T = jacobian_T(sc, paths)
    bare = hybrid_fim(J, T, PriorSpec(va=(None,)), paths)
    prior = PriorSpec(clock_sigma_s=1e-9, va=(VaPrior(0.5, 0.5),))
    full = hybrid_fim(J, T, prior, paths)
    np.testing.assert_allclose(full - bare, prior_fim(prior, paths), atol=1e-12)
    np.testing.assert_allclose(full, full.T)
