"""Wedge parameterisation, coordinate systems, and vacuum-region checks.

The conductor fills the interior angle; the vacuum sector is the azimuth
range (phi_face0, phi_face0 + vacuum_angle).  The Dirichlet zeros of the
cylindrical series fall exactly on the two conductor faces with this
convention, and the fractional indices are

    nu = vacuum_angle / pi,     mu_m = m * pi / vacuum_angle = m / nu.

Both choices are enforced by the half-space equivalence and on-face
boundary-condition suites rather than trusted on paper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "WedgeGeometry",
    "PointCart",
    "PointCyl",
    "PointSph",
    "make_wedge",
    "convert",
    "to_cartesian",
    "to_cylindrical",
    "to_spherical",
    "in_vacuum",
    "InVacuum",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class WedgeGeometry:
    """Perfectly conducting wedge with its edge along the z axis."""

    interior_angle: float
    phi_face0: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.interior_angle < _TWO_PI):
            raise ValueError(
                f"interior angle must lie in (0, 2*pi), got {self.interior_angle!r}"
            )

    @property
    def vacuum_angle(self) -> float:
        return _TWO_PI - self.interior_angle

    @property
    def nu(self) -> float:
        return self.vacuum_angle / math.pi

    def mu(self, m) -> float:
        """Fractional azimuthal index mu_m = m * pi / vacuum_angle."""
        return np.asarray(m, dtype=float) * math.pi / self.vacuum_angle

    def relative_azimuth(self, phi):
        """Azimuth measured from the first face, wrapped to [0, 2*pi)."""
        return np.mod(np.asarray(phi, dtype=float) - self.phi_face0, _TWO_PI)


@dataclass(frozen=True)
class PointCart:
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class PointCyl:
    rho: float
    phi: float
    z: float

    def __post_init__(self):
        if self.rho < 0.0:
            raise ValueError(f"rho must be >= 0, got {self.rho!r}")


@dataclass(frozen=True)
class PointSph:
    r: float
    theta: float
    phi: float

    def __post_init__(self):
        if self.r < 0.0:
            raise ValueError(f"r must be >= 0, got {self.r!r}")
        if not (0.0 <= self.theta <= math.pi):
            raise ValueError(f"theta must lie in [0, pi], got {self.theta!r}")


def make_wedge(interior_angle: float, phi_face0: float = 0.0) -> WedgeGeometry:
    """Build a wedge; vacuum_angle = 2*pi - interior_angle, nu = vacuum_angle/pi."""
    return WedgeGeometry(float(interior_angle), float(phi_face0))


def to_cartesian(point) -> PointCart:
    if isinstance(point, PointCart):
        return point
    if isinstance(point, PointCyl):
        return PointCart(point.rho * math.cos(point.phi), point.rho * math.sin(point.phi), point.z)
    if isinstance(point, PointSph):
        st = math.sin(point.theta)
        return PointCart(
            point.r * st * math.cos(point.phi),
            point.r * st * math.sin(point.phi),
            point.r * math.cos(point.theta),
        )
    raise TypeError(f"not a point: {point!r}")


def to_cylindrical(point) -> PointCyl:
    if isinstance(point, PointCyl):
        return point
    c = to_cartesian(point)
    return PointCyl(math.hypot(c.x, c.y), math.atan2(c.y, c.x) % _TWO_PI, c.z)


def to_spherical(point) -> PointSph:
    if isinstance(point, PointSph):
        return point
    c = to_cartesian(point)
    r = math.sqrt(c.x * c.x + c.y * c.y + c.z * c.z)
    theta = math.acos(min(1.0, max(-1.0, c.z / r))) if r > 0.0 else 0.0
    return PointSph(r, theta, math.atan2(c.y, c.x) % _TWO_PI)


_CONVERTERS = {
    PointCart: to_cartesian,
    PointCyl: to_cylindrical,
    PointSph: to_spherical,
    "cartesian": to_cartesian,
    "cylindrical": to_cylindrical,
    "spherical": to_spherical,
}


def convert(point, target):
    """Convert a point to the target system (class or name)."""
    try:
        conv = _CONVERTERS[target]
    except KeyError:
        raise ValueError(f"unknown target system: {target!r}") from None
    return conv(point)


class InVacuum(NamedTuple):
    inside: bool
    face_distance: float


def in_vacuum(point, wedge: WedgeGeometry) -> InVacuum:
    """Whether the point lies strictly in the vacuum sector, plus the
    perpendicular distance to the nearest conductor face (or to the edge
    when that is nearer).  Points on a face, in the conductor, or on the
    edge report inside=False with distance 0.
    """
    cyl = to_cylindrical(point)
    if cyl.rho == 0.0:
        return InVacuum(False, 0.0)
    rel = float(wedge.relative_azimuth(cyl.phi))
    tv = wedge.vacuum_angle
    if not (0.0 < rel < tv):
        return InVacuum(False, 0.0)

    def face_dist(delta):
        # distance from (rho, delta) to the half-plane at relative azimuth 0
        if delta < math.pi / 2.0:
            return cyl.rho * math.sin(delta)
        return cyl.rho  # perpendicular foot misses the half-plane; edge is nearest

    return InVacuum(True, min(face_dist(rel), face_dist(tv - rel)))
