"""2D scene construction and per-path geometry.

Builds arrays, reflectors and virtual anchors (mirror images of the Tx across
flat reflectors), derives all per-path quantities (lengths, delays, departure
and arrival angles, surface legs) and the one-parameter family of geometries
that reproduce a given delay/angle measurement triple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateGeometry,
    LambdaOutOfRange,
    NoValidReflection,
    ZeroDistance,
)

SPEED_OF_LIGHT = 299792458.0  # m/s


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


def unit(angle: float) -> np.ndarray:
    """Unit vector [cos(angle), sin(angle)]."""
    return np.array([math.cos(angle), math.sin(angle)])


def unit_perp(angle: float) -> np.ndarray:
    """Unit vector rotated -90 deg: [sin(angle), -cos(angle)]."""
    return np.array([math.sin(angle), -math.cos(angle)])


@dataclass(frozen=True)
class Point2:
    """Point in the 2D plane, in meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("point components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @staticmethod
    def from_array(arr) -> "Point2":
        return Point2(float(arr[0]), float(arr[1]))

    def distance_to(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class ArrayGeometry:
    """Antenna array as polar element offsets from its reference point.

    Each element is (distance_m, angle_rad) in the array's own frame; the
    kind tag records how the layout was built and is not used in computations.
    """

    elements: tuple  # of (d, psi) pairs
    kind: str = "custom"

    def __post_init__(self):
        if len(self.elements) < 1:
            raise ValueError("array needs at least one element")
        object.__setattr__(
            self, "elements", tuple((float(d), float(psi)) for d, psi in self.elements)
        )
        for d, _ in self.elements:
            if d < 0:
                raise ValueError("element distance must be >= 0")

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    def element_positions(self) -> np.ndarray:
        """Element coordinates in the array frame, shape (n, 2)."""
        return np.array([[d * math.cos(psi), d * math.sin(psi)] for d, psi in self.elements])

    def max_dimension(self) -> float:
        """Largest inter-element distance (array aperture)."""
        pos = self.element_positions()
        if len(pos) == 1:
            return 0.0
        diff = pos[:, None, :] - pos[None, :, :]
        return float(np.sqrt((diff**2).sum(-1)).max())


def ula_array(n_elements: int, spacing: float, axis_angle: float = 0.0) -> ArrayGeometry:
    """Uniform linear array centered on its reference point.

    Elements lie on a line through the reference point in the direction
    axis_angle, with the given inter-element spacing.
    """
    if n_elements < 1:
        raise ValueError("n_elements must be >= 1")
    elements = []
    for j in range(n_elements):
        offset = (j - (n_elements - 1) / 2.0) * spacing
        if offset >= 0:
            elements.append((offset, wrap_angle(axis_angle)))
        else:
            elements.append((-offset, wrap_angle(axis_angle + math.pi)))
    return ArrayGeometry(tuple(elements), kind="ula")


def uca_array(n_elements: int, radius: float, phase: float = 0.0) -> ArrayGeometry:
    """Uniform circular array of the given radius around its reference point."""
    if n_elements < 1:
        raise ValueError("n_elements must be >= 1")
    elements = tuple(
        (radius, wrap_angle(phase + 2.0 * math.pi * j / n_elements)) for j in range(n_elements)
    )
    return ArrayGeometry(elements, kind="uca")


@dataclass(frozen=True)
class Reflector:
    """Flat (infinite) reflecting surface.

    anchor: any point on the surface; normal_angle: direction of the surface
    normal, stored wrapped to (-pi, pi].
    """

    anchor: Point2
    normal_angle: float

    def __post_init__(self):
        object.__setattr__(self, "normal_angle", wrap_angle(float(self.normal_angle)))

    def signed_distance(self, point: Point2) -> float:
        """Signed distance of a point from the surface along the normal."""
        n = unit(self.normal_angle)
        return float((point.as_array() - self.anchor.as_array()) @ n)


def virtual_anchor(reflector: Reflector, p_tx: Point2) -> Point2:
    """Mirror image of the Tx reference point across the reflector line."""
    n = unit(reflector.normal_angle)
    a = reflector.anchor.as_array()
    p = p_tx.as_array()
    mirrored = p + 2.0 * ((a - p) @ n) * n
    return Point2.from_array(mirrored)


def incidence_point(p_tx: Point2, p_rx: Point2, reflector: Reflector) -> Point2:
    """Specular bounce point of the single-bounce path on the reflector.

    The bounce point is the intersection of the segment from the mirrored Tx
    to the Rx with the reflector line; it exists only when Tx and Rx lie
    strictly on the same side of the surface.

    Raises:
        NoValidReflection: if Tx/Rx are on opposite sides (or on the surface),
            or the intersection falls outside the open segment.
    """
    s_tx = reflector.signed_distance(p_tx)
    s_rx = reflector.signed_distance(p_rx)
    if s_tx * s_rx <= 0.0:
        raise NoValidReflection(
            "Tx and Rx must lie strictly on the same side of the reflector "
            f"(signed distances {s_tx:.6g}, {s_rx:.6g})"
        )
    p_va = virtual_anchor(reflector, p_tx).as_array()
    # segment p_va -> p_rx crosses the surface at parameter t in (0, 1)
    t = s_tx / (s_tx + s_rx)
    if not (0.0 < t < 1.0):
        raise NoValidReflection("no bounce point inside the open segment")
    return Point2.from_array(p_va + t * (p_rx.as_array() - p_va))


@dataclass(frozen=True)
class Scenario:
    """Physical scene: arrays, poses, clock offset, reflectors, active paths.

    clock_offset_m is the Tx/Rx synchronization error expressed as a distance
    (offset in seconds times the speed of light). active_reflectors selects
    which reflectors generate single-bounce paths, in path order; the direct
    path, when included, always comes first.
    """

    tx_position: Point2
    tx_array: ArrayGeometry
    rx_position: Point2
    rx_array: ArrayGeometry
    rx_orientation: float
    clock_offset_m: float
    reflectors: tuple
    include_los: bool = True
    active_reflectors: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "reflectors", tuple(self.reflectors))
        object.__setattr__(self, "active_reflectors", tuple(int(i) for i in self.active_reflectors))
        if not self.include_los and len(self.active_reflectors) == 0:
            raise ValueError("at least one active path is required")
        for i in self.active_reflectors:
            if not (0 <= i < len(self.reflectors)):
                raise ValueError(f"reflector index {i} out of range")
            try:
                # must admit a valid specular bounce
                incidence_point(self.tx_position, self.rx_position, self.reflectors[i])
            except NoValidReflection as exc:
                raise NoValidReflection(f"reflector {i}: {exc}") from None

    @property
    def n_paths(self) -> int:
        return int(self.include_los) + len(self.active_reflectors)

    @property
    def n_nlos(self) -> int:
        return len(self.active_reflectors)


@dataclass(frozen=True)
class PathGeometry:
    """All derived quantities of one propagation path.

    Angles are global unless suffixed _local; the reflector-related fields
    (virtual anchor, bounce point, surface legs, half-angle inputs) are None
    for the direct path.
    """

    index: int
    is_los: bool
    reflector_index: int | None
    p_va: Point2 | None
    p_s: Point2 | None
    d: float  # path length, m
    tau: float  # absolute delay incl. clock offset, s
    theta_tx: float  # global departure angle
    theta_rx: float  # global arrival angle
    theta_tx_local: float
    theta_rx_local: float
    theta_ref: float | None  # surface normal direction consistent with delta_theta
    delta_theta: float | None  # arrival minus departure angle, wrapped
    d_tx_surface: float | None
    d_rx_surface: float | None


def path_geometry(scenario: Scenario, path_index: int) -> PathGeometry:
    """Derive the full geometry of the path at the given active-path index."""
    if not (0 <= path_index < scenario.n_paths):
        raise ValueError(f"path index {path_index} out of range")
    p_tx = scenario.tx_position
    p_rx = scenario.rx_position

    if scenario.include_los and path_index == 0:
        d = p_rx.distance_to(p_tx)
        if d <= 1e-12:
            raise ZeroDistance("Tx and Rx coincide")
        theta_rx = math.atan2(p_tx.y - p_rx.y, p_tx.x - p_rx.x)
        theta_tx = wrap_angle(theta_rx - math.pi)
        return PathGeometry(
            index=0,
            is_los=True,
            reflector_index=None,
            p_va=None,
            p_s=None,
            d=d,
            tau=(d + scenario.clock_offset_m) / SPEED_OF_LIGHT,
            theta_tx=theta_tx,
            theta_rx=theta_rx,
            theta_tx_local=theta_tx,
            theta_rx_local=wrap_angle(theta_rx - scenario.rx_orientation),
            theta_ref=None,
            delta_theta=None,
            d_tx_surface=None,
            d_rx_surface=None,
        )

    refl_pos = path_index - int(scenario.include_los)
    refl_idx = scenario.active_reflectors[refl_pos]
    reflector = scenario.reflectors[refl_idx]
    p_va = virtual_anchor(reflector, p_tx)
    p_s = incidence_point(p_tx, p_rx, reflector)
    d = p_rx.distance_to(p_va)
    if d <= 1e-12:
        raise ZeroDistance("Rx coincides with the virtual anchor")
    d_tx_surface = p_s.distance_to(p_tx)
    d_rx_surface = p_rx.distance_to(p_s)
    if d_tx_surface <= 1e-12 or d_rx_surface <= 1e-12:
        raise ZeroDistance("Tx or Rx lies on the reflecting surface")
    theta_rx = math.atan2(p_va.y - p_rx.y, p_va.x - p_rx.x)
    phi_va = math.atan2(p_va.y - p_tx.y, p_va.x - p_tx.x)
    theta_tx = wrap_angle(2.0 * phi_va - theta_rx)
    delta_theta = wrap_angle(theta_rx - theta_tx)
    # keep the surface direction on the same branch as delta_theta so that
    # downstream half-angle expressions stay sign-consistent
    theta_ref = wrap_angle(theta_rx - delta_theta / 2.0)
    return PathGeometry(
        index=path_index,
        is_los=False,
        reflector_index=refl_idx,
        p_va=p_va,
        p_s=p_s,
        d=d,
        tau=(d + scenario.clock_offset_m) / SPEED_OF_LIGHT,
        theta_tx=theta_tx,
        theta_rx=theta_rx,
        theta_tx_local=theta_tx,
        theta_rx_local=wrap_angle(theta_rx - scenario.rx_orientation),
        theta_ref=theta_ref,
        delta_theta=delta_theta,
        d_tx_surface=d_tx_surface,
        d_rx_surface=d_rx_surface,
    )


def scenario_paths(scenario: Scenario) -> list:
    """PathGeometry for every active path, in path order."""
    return [path_geometry(scenario, i) for i in range(scenario.n_paths)]


def locus_family(
    p_tx: Point2,
    tau: float,
    theta_tx: float,
    theta_rx: float,
    lam: float,
) -> tuple:
    """One member of the family of geometries consistent with a measurement triple.

    For a single-bounce path, a (delay, departure angle, arrival angle) triple
    does not pin down the Rx: there is a one-parameter family of
    (p_rx, p_va, p_s) triples reproducing it, indexed by the Tx-to-bounce
    distance lam in (0, c*tau). The Rx locus is a segment along the surface
    normal. The delay is interpreted with zero clock offset.

    Returns:
        (p_rx, p_va, p_s) as Point2.

    Raises:
        LambdaOutOfRange: lam outside (0, c*tau).
        DegenerateGeometry: grazing geometry (half-angle cosine zero).
    """
    r = SPEED_OF_LIGHT * tau
    if not (0.0 < lam < r):
        raise LambdaOutOfRange(f"lam must lie in (0, {r:.6g}), got {lam:.6g}")
    delta_theta = wrap_angle(theta_rx - theta_tx)
    cos_half = math.cos(delta_theta / 2.0)
    if abs(cos_half) < 1e-12:
        raise DegenerateGeometry("half-angle cosine vanishes; grazing geometry")
    theta_ref = wrap_angle(theta_rx - delta_theta / 2.0)
    base = p_tx.as_array()
    along_normal = 2.0 * lam * cos_half * unit(theta_ref)
    p_rx = base - r * unit(theta_rx) + along_normal
    p_va = base + along_normal
    p_s = base + lam * unit(theta_tx)
    return Point2.from_array(p_rx), Point2.from_array(p_va), Point2.from_array(p_s)
