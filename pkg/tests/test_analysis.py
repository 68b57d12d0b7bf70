"""Sweep-driver tests: grids, eigen/PEB sweeps, validation report."""

import math

import numpy as np
import pytest

from reflectinfo import SingularFim, SweepGrid, default_grid, eigen_structure
from reflectinfo.analysis import (
    CASE_REFLECTORS,
    build_channel,
    eigen_sweep,
    peb_sweep,
    random_scene,
    validation_report,
)
from reflectinfo import cli, fim

ROOM = "configs/room.toml"


@pytest.fixture(scope="module")
def loaded():
    return cli.load_config(ROOM)


def test_default_grid():
    grid = default_grid()
    assert len(grid.sigma_values) == 61
    assert grid.sigma_values[0] == pytest.approx(1e-3)
    assert grid.sigma_values[-1] == pytest.approx(1e3)
    assert grid.fixed == ("orientation", "clock")
    single = default_grid(points=1, sigma_min=0.5)
    np.testing.assert_allclose(single.sigma_values, [0.5])


def test_grid_validation():
    with pytest.raises(ValueError):
        SweepGrid(np.array([1.0, -1.0]))
    with pytest.raises(ValueError):
        SweepGrid(np.array([2.0, 1.0]))


def test_eigen_structure_known_matrix():
    mat = np.diag([2.0, 5.0])
    w, dirs = eigen_structure(mat)
    np.testing.assert_allclose(w, [5.0, 2.0])
    np.testing.assert_allclose(dirs, [90.0, 0.0], atol=1e-12)
    # directions are lines: always in [0, 180)
    rng = np.random.default_rng(5)
    for _ in range(25):
        root = rng.normal(size=(2, 2))
        _, dirs = eigen_structure(root @ root.T)
        assert np.all((0.0 <= dirs) & (dirs < 180.0))


def test_build_channel_gain_conventions(loaded):
    paths, params, _ = build_channel(
        loaded.scenario, loaded.ofdm, loaded.reflector_gammas
    )
    lam = loaded.ofdm.wavelength
    assert paths[0].is_los
    # direct path: unit reflection coefficient; bounce paths: sqrt(gamma)
    assert abs(params.gains[0]) == pytest.approx(lam / (4 * math.pi * paths[0].d))
    for l in (1, 2, 3):
        assert abs(params.gains[l]) == pytest.approx(
            math.sqrt(0.1) * lam / (4 * math.pi * paths[l].d)
        )
    np.testing.assert_allclose(params.delays, [p.tau for p in paths])


def test_eigen_sweep_rows(loaded):
    grid = default_grid(points=9)
    rows = eigen_sweep(loaded.scenario, loaded.ofdm, grid, loaded.reflector_gammas)
    assert len(rows) == 9
    lam1 = np.array([r.lambda1 for r in rows])
    lam2 = np.array([r.lambda2 for r in rows])
    assert np.all(lam1 >= lam2)
    assert np.all(np.diff(lam1) <= 1e-9 * lam1[:-1])
    for row in rows:
        assert 0.0 <= row.dir1_deg < 180.0
        assert abs((row.dir2_deg - row.dir1_deg) % 180.0 - 90.0) < 1e-6
        assert row.sigma_ref > 0


def test_eigen_sweep_needs_bounce_path():
    import dataclasses

    rng = np.random.default_rng(0)
    scenario, _, _, _ = random_scene(rng)
    los_only = dataclasses.replace(
        scenario,
        rx_position=scenario.tx_position.__class__(
            scenario.tx_position.x + 1.0, scenario.tx_position.y
        ),
        include_los=True,
        active_reflectors=(),
    )
    cfg = cli.load_config(ROOM).ofdm
    with pytest.raises(ValueError, match="single-bounce"):
        eigen_sweep(los_only, cfg, default_grid(points=2), (1.0,))


def test_peb_sweep_cases(loaded):
    grid = default_grid(points=7)
    for case in ("A", "B"):
        rows = peb_sweep(loaded.scenario, loaded.ofdm, grid, case, loaded.reflector_gammas)
        assert len(rows) == 7
        assert all(r.case == case for r in rows)
        assert all(r.peb_rx > 0 and r.peb_va1 > 0 for r in rows)
        assert not any(r.singular for r in rows)
        # mirror-point bound cannot beat its own prior
        for r in rows:
            assert r.peb_va1 <= r.sigma_ref * (1 + 1e-9)


def test_peb_sweep_case_validation(loaded):
    with pytest.raises(ValueError, match="unknown case"):
        peb_sweep(loaded.scenario, loaded.ofdm, default_grid(points=2), "C",
                  loaded.reflector_gammas)
    import dataclasses

    two_walls = dataclasses.replace(
        loaded.scenario, reflectors=loaded.scenario.reflectors[:2], active_reflectors=(0, 1)
    )
    with pytest.raises(ValueError, match="reflector index 2"):
        peb_sweep(two_walls, loaded.ofdm, default_grid(points=2), "B",
                  loaded.reflector_gammas)
    assert CASE_REFLECTORS == {"A": (0, 1), "B": (0, 2)}


def test_peb_sweep_flags_singular_rows(loaded, monkeypatch):
    calls = {"n": 0}
    original = fim.invert_spd

    def failing(matrix, rcond_threshold=fim.RCOND_THRESHOLD):
        calls["n"] += 1
        if calls["n"] % 2 == 0:
            raise SingularFim("forced", null_direction=np.zeros(matrix.shape[0]))
        return original(matrix, rcond_threshold)

    monkeypatch.setattr(fim, "invert_spd", failing)
    rows = peb_sweep(loaded.scenario, loaded.ofdm, default_grid(points=4), "A",
                     loaded.reflector_gammas)
    assert len(rows) == 4  # singular rows flagged, not dropped
    flagged = [r for r in rows if r.singular]
    assert len(flagged) == 2
    assert all(math.isinf(r.peb_rx) and math.isinf(r.peb_va1) for r in flagged)


def test_validation_report_deterministic():
    a = validation_report(n_trials=40, seed=7)
    b = validation_report(n_trials=40, seed=7)
    assert a.format() == b.format()
    assert a.passed
    assert "overall: PASS" in a.format()
    assert len(a.checks) == 7


def test_validation_report_empty():
    report = validation_report(n_trials=0, seed=0)
    assert report.passed
    assert report.checks == ()
    assert "trials=0" in report.format()


def test_validation_report_tolerance_hook():
    report = validation_report(n_trials=10, seed=1, tolerance_scale=1e-20)
    assert not report.passed
    assert "FAIL" in report.format()


def test_random_scene_well_separated():
    rng = np.random.default_rng(99)
    for _ in range(50):
        scenario, path, info, prior = random_scene(rng)
        assert path.d_tx_surface >= 0.5
        assert path.d_rx_surface >= 0.5
        assert abs(math.cos(path.delta_theta / 2.0)) >= 0.05
        assert info.tau_info > 0 and info.aod_info > 0 and info.aoa_info > 0
        assert abs(prior.rho) <= 0.9
        assert scenario.n_nlos == 1
