"""Closed-form per-path EFIM over (rx position, orientation, clock offset).

Each path contributes information through four-dimensional direction vectors
tied to its delay and angle measurements. For a single-bounce path with a
Gaussian prior on its mirror-point location, the 4x4 contribution has an
explicit 3x3 core whose entries are rational in the path geometry, the three
measurement intensities and the prior parameters; the perfect-knowledge and
no-knowledge limits reduce to a rank-3 sum and a rank-1 outer product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometry, MissingMeasurement, ZeroDistance
from .fim import PERFECT, VaPrior
from .geometry import SPEED_OF_LIGHT, PathGeometry, unit, unit_perp

C2 = SPEED_OF_LIGHT**2


@dataclass(frozen=True)
class DiagonalPathInfo:
    """Measurement intensities of one path: delay, departure and arrival angle."""

    tau_info: float
    aod_info: float
    aoa_info: float

    def __post_init__(self):
        if self.tau_info < 0 or self.aod_info < 0 or self.aoa_info < 0:
            raise ValueError("information intensities must be nonnegative")


@dataclass(frozen=True, eq=False)
class ZVectors:
    """Direction vectors over (rx_x, rx_y, orientation, clock_offset)."""

    z_tau: np.ndarray
    z_aod: np.ndarray
    z_aoa: np.ndarray

    def stacked(self) -> np.ndarray:
        """4x3 matrix with the three vectors as columns."""
        return np.column_stack([self.z_tau, self.z_aod, self.z_aoa])


@dataclass(frozen=True, eq=False)
class MlMatrix:
    """Core 3x3 matrix of a path's EFIM, with its prior-block determinant.

    The constants a, b, f, g, p, q are the geometry/prior combinations the
    entries are built from; delta_theta is the arrival-minus-departure angle.
    """

    matrix: np.ndarray
    det_va: float
    a: float
    b: float
    f: float
    g: float
    p: float
    q: float
    delta_theta: float


@dataclass(frozen=True, eq=False)
class NoPriorResult:
    """Rank-1 information of a single-bounce path without mirror-point prior."""

    intensity: float
    z: np.ndarray  # over (rx_x, rx_y, orientation, clock_offset)
    matrix: np.ndarray  # intensity * outer(z, z)


def z_vectors(path: PathGeometry) -> ZVectors:
    """Measurement direction vectors of a path.

    The delay vector points against the arrival direction with unit clock
    slope; the angle vectors are tangential, the arrival one additionally
    carrying the orientation slope -d.
    """
    u_r = unit(path.theta_rx)
    up_r = unit_perp(path.theta_rx)
    z_tau = np.array([-u_r[0], -u_r[1], 0.0, 1.0])
    z_aod = np.array([up_r[0], up_r[1], 0.0, 0.0])
    z_aoa = np.array([up_r[0], up_r[1], -path.d, 0.0])
    return ZVectors(z_tau, z_aod, z_aoa)


def _check_nlos(path: PathGeometry):
    if path.is_los:
        raise ValueError("operation applies to single-bounce paths only")
    if path.d <= 0 or path.d_tx_surface <= 0:
        raise ZeroDistance("path legs must have positive length")
    if abs(math.cos(path.delta_theta / 2.0)) < 1e-12:
        raise DegenerateGeometry("half-angle cosine vanishes; grazing geometry")


def m_matrix(path: PathGeometry, info: DiagonalPathInfo, prior: VaPrior) -> MlMatrix:
    """Core 3x3 matrix and prior-block determinant of a single-bounce path.

    Basis order: (delay, departure angle, arrival angle) directions. The
    entries combine the measurement intensities with the mirror-point prior
    expressed in the rotated (along/across arrival direction) frame.
    """
    _check_nlos(path)
    j_tau, j_aod, j_aoa = info.tau_info, info.aod_info, info.aoa_info
    d = path.d
    d_ts = path.d_tx_surface
    dth = path.delta_theta
    s_par, s_perp, rho = prior.sigma_par, prior.sigma_perp, prior.rho

    a = math.tan(dth / 2.0) / d_ts
    b = 1.0 / d - 1.0 / d_ts
    denom = 1.0 - rho**2
    s11 = 1.0 / (denom * s_par**2)
    s22 = 1.0 / (denom * s_perp**2)
    r1 = rho / (denom * s_par * s_perp)
    f = j_aoa / d**2 + s22
    g = 1.0 + 2.0 * rho * s_par * s_perp * j_aod * a * b
    p = j_aoa / d**2 + 1.0 / s_perp**2
    q = j_tau / C2 + s11

    det_va = (
        j_tau / C2 * (j_aod * b**2 + f)
        + (p + j_aod * b * (b + 2.0 * rho * a * s_par / s_perp)) / (denom * s_par**2)
        + j_aod * a**2 * f
    )

    m = np.empty((3, 3))
    m[0, 0] = (j_tau / C2) * (j_aod * a**2 * f + s11 * (j_aod * b**2 + j_aoa / d**2 + g / s_perp**2))
    m[1, 1] = (j_aod / d**2) * ((j_tau / C2) * f + s11 * p)
    m[2, 2] = (j_aoa / d**2) * (j_aod * b**2 * q + s22 * (j_tau / C2 + j_aod * a**2 + g / s_par**2))
    m[0, 1] = m[1, 0] = (j_tau / C2) * (j_aod / d) * (a * f + b * r1)
    m[0, 2] = m[2, 0] = (j_tau / C2) * (j_aoa / d**2) * (r1 - j_aod * a * b)
    m[1, 2] = m[2, 1] = -(j_aod / d) * (j_aoa / d**2) * (b * q + a * r1)
    return MlMatrix(m, det_va, a, b, f, g, p, q, dth)


def nlos_efim(path: PathGeometry, info: DiagonalPathInfo, prior: VaPrior) -> np.ndarray:
    """4x4 EFIM contribution of a single-bounce path with a finite prior."""
    core = m_matrix(path, info, prior)
    z = z_vectors(path).stacked()
    out = z @ core.matrix @ z.T / core.det_va
    return 0.5 * (out + out.T)


def _rank_one_sum(path: PathGeometry, info: DiagonalPathInfo) -> np.ndarray:
    zv = z_vectors(path)
    return (
        info.tau_info / C2 * np.outer(zv.z_tau, zv.z_tau)
        + info.aod_info / path.d**2 * np.outer(zv.z_aod, zv.z_aod)
        + info.aoa_info / path.d**2 * np.outer(zv.z_aoa, zv.z_aoa)
    )


def nlos_efim_perfect_prior(path: PathGeometry, info: DiagonalPathInfo) -> np.ndarray:
    """Limit of exactly known mirror point: the path acts like a direct path."""
    return _rank_one_sum(path, info)


def no_prior_direction(path: PathGeometry) -> np.ndarray:
    """Information direction of a prior-free single-bounce path.

    The position part is parallel to the reflecting surface, independent of
    the Tx and Rx placement.
    """
    _check_nlos(path)
    half = path.delta_theta / 2.0
    up_ref = unit_perp(path.theta_ref)
    return np.array(
        [up_ref[0], up_ref[1], -path.d_rx_surface * math.cos(half), math.sin(half)]
    )


def nlos_efim_no_prior(
    path: PathGeometry, info: DiagonalPathInfo, strict: bool = False
) -> NoPriorResult:
    """Limit of no mirror-point knowledge: rank-1 information.

    All three measurement intensities are needed for any information to
    survive; with any of them zero the result is the zero matrix, or, with
    strict=True, a MissingMeasurement error.
    """
    _check_nlos(path)
    z = no_prior_direction(path)
    j_tau, j_aod, j_aoa = info.tau_info, info.aod_info, info.aoa_info
    if j_tau == 0.0 or j_aod == 0.0 or j_aoa == 0.0:
        if strict:
            raise MissingMeasurement(
                "all three measurement intensities are required for prior-free information"
            )
        return NoPriorResult(0.0, z, np.zeros((4, 4)))
    d = path.d
    d_ts = path.d_tx_surface
    half = path.delta_theta / 2.0
    a = math.tan(half) / d_ts
    b = 1.0 / d - 1.0 / d_ts
    det_inf = (j_tau / C2) * (j_aod * b**2 + j_aoa / d**2) + j_aod * a**2 * j_aoa / d**2
    intensity = (
        j_tau * j_aod * j_aoa / (det_inf * C2 * d**2 * d_ts**2 * math.cos(half) ** 2)
    )
    return NoPriorResult(intensity, z, intensity * np.outer(z, z))


def det_va_no_prior_limit(path: PathGeometry, info: DiagonalPathInfo) -> float:
    """Finite limit of the prior-block determinant as the prior vanishes."""
    _check_nlos(path)
    a = math.tan(path.delta_theta / 2.0) / path.d_tx_surface
    b = 1.0 / path.d - 1.0 / path.d_tx_surface
    f_inf = info.aoa_info / path.d**2
    return info.tau_info / C2 * (info.aod_info * b**2 + f_inf) + info.aod_info * a**2 * f_inf


def poc_efim_closed_form(paths, infos, priors, clock_sigma_s=None) -> np.ndarray:
    """Closed-form 4x4 EFIM over (rx position, orientation, clock offset).

    Direct paths contribute their three rank-1 terms; single-bounce paths
    contribute according to their prior entry (VaPrior, None for no prior,
    PERFECT for exact knowledge). clock_sigma_s may be a float, None (no
    prior) or PERFECT (adds nothing here; fix the parameter downstream).
    """
    priors = list(priors)
    n_nlos = sum(0 if p.is_los else 1 for p in paths)
    if len(priors) != n_nlos:
        raise ValueError(f"need one prior entry per single-bounce path ({n_nlos})")
    out = np.zeros((4, 4))
    nlos_pos = 0
    for path, info in zip(paths, infos):
        if path.is_los:
            out += _rank_one_sum(path, info)
            continue
        prior = priors[nlos_pos]
        nlos_pos += 1
        if prior is PERFECT:
            out += nlos_efim_perfect_prior(path, info)
        elif prior is None:
            out += nlos_efim_no_prior(path, info).matrix
        else:
            out += nlos_efim(path, info, prior)
    if clock_sigma_s is not None and clock_sigma_s is not PERFECT:
        out[3, 3] += 1.0 / (SPEED_OF_LIGHT * clock_sigma_s) ** 2
    return out
