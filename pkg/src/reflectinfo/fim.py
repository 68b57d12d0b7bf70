"""Numerical Fisher-information machinery.

Channel-parameter FIM from analytic signal gradients, the Jacobian mapping
channel parameters to position parameters, Gaussian priors (clock and
virtual-anchor location), hybrid FIM assembly, Schur-complement reduction to
the 4 parameters of interest (Rx position, orientation, clock offset),
parameter fixing, and position-error-bound extraction. This module is the
numerical oracle that the closed forms are validated against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    SingularFim,
    SingularNuisanceBlock,
    SingularPriorCovariance,
)
from .geometry import SPEED_OF_LIGHT, Scenario, scenario_paths, unit, unit_perp
from .signal import PARAMS_PER_PATH, mean_signal_gradient, noise_variance

RCOND_THRESHOLD = 1e-14


class _Perfect:
    """Sentinel marking exactly known quantities (handled by elimination)."""

    def __repr__(self):
        return "PERFECT"


PERFECT = _Perfect()


@dataclass(frozen=True)
class VaPrior:
    """Gaussian prior on one virtual-anchor location.

    sigma_par / sigma_perp are the standard deviations along and across the
    Rx-to-anchor direction; rho is their correlation.
    """

    sigma_par: float
    sigma_perp: float
    rho: float = 0.0

    def __post_init__(self):
        if self.sigma_par <= 0 or self.sigma_perp <= 0:
            raise ValueError("prior standard deviations must be positive")
        if not abs(self.rho) < 1.0:
            raise ValueError("correlation must satisfy |rho| < 1")


@dataclass(frozen=True)
class PriorSpec:
    """Prior information: clock sigma (seconds) and one entry per NLOS path.

    Each entry is a VaPrior, None (no prior) or PERFECT (exact knowledge);
    same sentinels apply to the clock.
    """

    clock_sigma_s: object = None
    va: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "va", tuple(self.va))


def channel_fim(config, params, tx_array, rx_array, pilot) -> np.ndarray:
    """FIM of the 5-per-path real channel parameters from the observation model."""
    n = PARAMS_PER_PATH * params.n_paths
    accum = np.zeros((n, n))
    for p in config.subcarriers:
        grad = mean_signal_gradient(config, params, tx_array, rx_array, pilot, p)
        accum += (grad.conj().T @ grad).real
    fim = (2.0 / noise_variance(config)) * accum
    return 0.5 * (fim + fim.T)


def gain_reduced_channel_fim(channel_fim_matrix: np.ndarray) -> np.ndarray:
    """Schur-complement all path gains out of the channel FIM.

    The gains are nuisance parameters without priors, so eliminating them
    here is exactly equivalent to carrying them into the hybrid FIM and
    reducing at the end. Returns a matrix of the original size with the
    reduced information in the geometry rows/columns and zero gain
    rows/columns, ready for the position Jacobian (whose gain columns are
    zero).

    Raises:
        SingularNuisanceBlock: the joint gain block cannot be inverted.
    """
    n_paths = channel_fim_matrix.shape[0] // PARAMS_PER_PATH
    geo = [PARAMS_PER_PATH * l + i for l in range(n_paths) for i in range(3)]
    gain = [PARAMS_PER_PATH * l + i for l in range(n_paths) for i in (3, 4)]
    a = channel_fim_matrix[np.ix_(geo, geo)]
    b = channel_fim_matrix[np.ix_(geo, gain)]
    d = channel_fim_matrix[np.ix_(gain, gain)]
    w = np.linalg.eigvalsh(0.5 * (d + d.T))
    if w.max() <= 0.0 or w.min() <= RCOND_THRESHOLD * w.max():
        raise SingularNuisanceBlock(
            "gain nuisance block is numerically singular", path_index=None
        )
    reduced = a - b @ np.linalg.solve(d, b.T)
    out = np.zeros_like(channel_fim_matrix)
    out[np.ix_(geo, geo)] = 0.5 * (reduced + reduced.T)
    return out


def jacobian_T(scenario: Scenario, paths=None) -> np.ndarray:
    """Jacobian of channel parameters with respect to position parameters.

    Row order: (rx_x, rx_y, orientation, clock_offset, va_1_x, va_1_y, ...);
    column order: 5 per path as in the channel parameter vector. Gain columns
    are identically zero (gains carry no position information).
    """
    if paths is None:
        paths = scenario_paths(scenario)
    n_nlos = sum(0 if p.is_los else 1 for p in paths)
    T = np.zeros((4 + 2 * n_nlos, PARAMS_PER_PATH * len(paths)))
    p_tx = scenario.tx_position.as_array()
    nlos_pos = 0
    for l, path in enumerate(paths):
        c0 = PARAMS_PER_PATH * l
        u_r = unit(path.theta_rx)
        up_r = unit_perp(path.theta_rx)
        # delay column
        T[0:2, c0] = -u_r / SPEED_OF_LIGHT
        T[3, c0] = 1.0 / SPEED_OF_LIGHT
        # arrival-angle column (local): orientation enters with slope -1
        T[0:2, c0 + 2] = up_r / path.d
        T[2, c0 + 2] = -1.0
        if path.is_los:
            # departure angle of the direct path follows the arrival angle
            T[0:2, c0 + 1] = up_r / path.d
        else:
            rows = slice(4 + 2 * nlos_pos, 6 + 2 * nlos_pos)
            T[0:2, c0 + 1] = -up_r / path.d
            # mirror-point columns
            T[rows, c0] = u_r / SPEED_OF_LIGHT
            va = path.p_va.as_array()
            rel = va - p_tx
            r_va = float(np.hypot(rel[0], rel[1]))
            phi_va = math.atan2(rel[1], rel[0])
            T[rows, c0 + 1] = -2.0 * unit_perp(phi_va) / r_va + up_r / path.d
            T[rows, c0 + 2] = -up_r / path.d
            nlos_pos += 1
    return T


def _prior_block(prior: VaPrior, theta_rx: float) -> np.ndarray:
    """Information matrix of one VA prior in global coordinates."""
    if 1.0 - abs(prior.rho) < 1e-12:
        raise SingularPriorCovariance(
            f"prior correlation {prior.rho} is numerically singular"
        )
    s_par, s_perp, rho = prior.sigma_par, prior.sigma_perp, prior.rho
    denom = 1.0 - rho**2
    s_inv = np.array(
        [
            [1.0 / (denom * s_par**2), -rho / (denom * s_par * s_perp)],
            [-rho / (denom * s_par * s_perp), 1.0 / (denom * s_perp**2)],
        ]
    )
    rot = np.column_stack([unit(theta_rx), unit_perp(theta_rx)])
    return rot @ s_inv @ rot.T


def prior_fim(priors: PriorSpec, paths) -> np.ndarray:
    """Additive prior information over the position parameters.

    VA blocks hold the inverse prior covariance in global coordinates; None
    and PERFECT entries contribute zero here (PERFECT is applied later by
    parameter elimination, never by large finite values). The clock prior
    contributes 1/(c*sigma_clk)^2 on the clock-offset axis.
    """
    nlos = [p for p in paths if not p.is_los]
    if len(priors.va) != len(nlos):
        raise ValueError(
            f"need one VA prior entry per NLOS path ({len(nlos)}), got {len(priors.va)}"
        )
    size = 4 + 2 * len(nlos)
    out = np.zeros((size, size))
    clock = priors.clock_sigma_s
    if clock is not None and clock is not PERFECT:
        if clock <= 0:
            raise ValueError("clock sigma must be positive")
        out[3, 3] = 1.0 / (SPEED_OF_LIGHT * clock) ** 2
    for k, (path, prior) in enumerate(zip(nlos, priors.va)):
        if prior is None or prior is PERFECT:
            continue
        rows = slice(4 + 2 * k, 6 + 2 * k)
        out[rows, rows] = _prior_block(prior, path.theta_rx)
    return out


def hybrid_fim(channel_fim_matrix, T, priors: PriorSpec, paths) -> np.ndarray:
    """Hybrid FIM over the position parameters: observation plus prior.

    The channel matrix must already have the gain nuisance removed (see
    gain_reduced_channel_fim) or be an asymptotic diagonal; the Jacobian's
    zero gain columns would otherwise treat the gains as known.
    """
    obs = T @ channel_fim_matrix @ T.T
    full = obs + prior_fim(priors, paths)
    return 0.5 * (full + full.T)


def efim_poc(
    hybrid: np.ndarray,
    perfect_vas=(),
    allow_pinv: bool = False,
) -> np.ndarray:
    """Schur-complement EFIM over (rx_x, rx_y, orientation, clock_offset).

    VA coordinates are nuisance parameters: exactly known ones (listed in
    perfect_vas by NLOS path position) are eliminated by dropping their rows
    and columns; the rest are Schur-complemented away.

    Raises:
        SingularNuisanceBlock: the VA block cannot be inverted (unless
            allow_pinv, which falls back to a pseudoinverse).
    """
    size = hybrid.shape[0]
    n_nlos = (size - 4) // 2
    perfect = set(int(k) for k in perfect_vas)
    keep = list(range(4))
    kept_positions = []
    for k in range(n_nlos):
        if k not in perfect:
            keep.extend([4 + 2 * k, 5 + 2 * k])
            kept_positions.append(k)
    red = hybrid[np.ix_(keep, keep)]
    if len(kept_positions) == 0:
        return red[:4, :4].copy()
    a = red[:4, :4]
    b = red[:4, 4:]
    d = red[4:, 4:]
    w, v = np.linalg.eigh(0.5 * (d + d.T))
    w_max = float(w.max()) if len(w) else 0.0
    if w_max <= 0.0 or w.min() <= RCOND_THRESHOLD * w_max:
        if not allow_pinv:
            offending = None
            for i, k in enumerate(kept_positions):
                block = d[2 * i : 2 * i + 2, 2 * i : 2 * i + 2]
                bw = np.linalg.eigvalsh(0.5 * (block + block.T))
                if bw.max() <= 0.0 or bw.min() <= RCOND_THRESHOLD * bw.max():
                    offending = k
                    break
            raise SingularNuisanceBlock(
                "VA nuisance block is numerically singular"
                + ("" if offending is None else f" (path position {offending})"),
                path_index=offending,
            )
        inv_w = np.where(w > RCOND_THRESHOLD * w_max, 1.0 / np.where(w > 0, w, 1.0), 0.0)
        d_inv = v @ np.diag(inv_w) @ v.T
        out = a - b @ d_inv @ b.T
    else:
        out = a - b @ np.linalg.solve(d, b.T)
    return 0.5 * (out + out.T)


_FIXABLE = {"orientation": 2, "clock": 3}


def fix_parameters(fim: np.ndarray, known) -> np.ndarray:
    """Treat parameters as exactly known by deleting their rows and columns.

    known is a subset of {"orientation", "clock"}; works on the 4x4 EFIM or
    on any position-parameter matrix whose rows 2 and 3 are orientation and
    clock offset. Equivalent to the limit of infinite prior information.
    """
    drop = set()
    for name in known:
        if name not in _FIXABLE:
            raise ValueError(f"unknown parameter {name!r}; expected orientation/clock")
        drop.add(_FIXABLE[name])
    keep = [i for i in range(fim.shape[0]) if i not in drop]
    return fim[np.ix_(keep, keep)]


def invert_spd(matrix: np.ndarray, rcond_threshold: float = RCOND_THRESHOLD):
    """Invert a symmetric PSD matrix with a condition report.

    Returns (inverse, reciprocal_condition).

    Raises:
        SingularFim: reciprocal condition below the threshold; the error
            carries a null-space direction for diagnosis.
    """
    sym = 0.5 * (matrix + matrix.T)
    w, v = np.linalg.eigh(sym)
    w_max = float(w.max())
    if w_max <= 0.0 or w.min() <= rcond_threshold * w_max:
        direction = v[:, int(np.argmin(w))]
        raise SingularFim(
            f"matrix is numerically singular (rcond {w.min() / w_max if w_max > 0 else 0:.3g})",
            null_direction=direction,
        )
    inverse = (v / w) @ v.T
    return inverse, float(w.min() / w_max)


def reciprocal_condition(matrix: np.ndarray) -> float:
    """Smallest-to-largest eigenvalue magnitude ratio of the symmetric part."""
    w = np.abs(np.linalg.eigvalsh(0.5 * (matrix + matrix.T)))
    if w.max() == 0.0:
        return 0.0
    return float(w.min() / w.max())


def peb(fim: np.ndarray, indices=(0, 1)) -> float:
    """Position error bound: sqrt of the sum of inverse-FIM diagonal entries."""
    inverse, _ = invert_spd(fim)
    return float(math.sqrt(sum(inverse[i, i] for i in indices)))


def asymptotic_path_infos(channel_fim_matrix: np.ndarray) -> np.ndarray:
    """Per-path information intensities in the path-orthogonality limit.

    Ignores inter-path coupling, removes the gain nuisance parameters of each
    path by a 2x2 Schur complement, and keeps the diagonal of the remaining
    3x3 block. Returns shape (n_paths, 3): delay, departure-angle and
    arrival-angle intensities.
    """
    n_paths = channel_fim_matrix.shape[0] // PARAMS_PER_PATH
    out = np.zeros((n_paths, 3))
    for l in range(n_paths):
        block = channel_fim_matrix[
            PARAMS_PER_PATH * l : PARAMS_PER_PATH * (l + 1),
            PARAMS_PER_PATH * l : PARAMS_PER_PATH * (l + 1),
        ]
        gain_block = block[3:, 3:]
        if np.linalg.norm(gain_block) == 0.0:
            efim3 = block[:3, :3]
        else:
            efim3 = block[:3, :3] - block[:3, 3:] @ np.linalg.solve(gain_block, block[3:, :3])
        out[l] = np.maximum(np.diag(efim3), 0.0)
    return out


def asymptotic_channel_fim(channel_fim_matrix: np.ndarray) -> np.ndarray:
    """Diagonal channel FIM retaining only the per-path intensities."""
    infos = asymptotic_path_infos(channel_fim_matrix)
    n_paths = infos.shape[0]
    diag = np.zeros(PARAMS_PER_PATH * n_paths)
    for l in range(n_paths):
        diag[PARAMS_PER_PATH * l : PARAMS_PER_PATH * l + 3] = infos[l]
    return np.diag(diag)
