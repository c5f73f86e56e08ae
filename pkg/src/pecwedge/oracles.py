"""Analytic references: free-space Im G, the image-dipole half-space Im G,
and the series-vs-oracle error report.

The image construction is the exact solution for the interior angle pi and
anchors every equivalence suite; its sign convention is fixed by the
tangential-field boundary condition, which the tests check directly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .geometry import PointCart, to_cartesian

__all__ = [
    "HalfSpaceFrame",
    "im_g_free",
    "im_g_halfspace",
    "free_space_ldos",
    "series_vs_oracle_report",
]


def free_space_ldos(k: float) -> float:
    """Coincidence value Im G0(r, r) = k/(6 pi) on the diagonal."""
    return k / (6.0 * math.pi)


def _as_vec(point) -> np.ndarray:
    if isinstance(point, np.ndarray):
        return point.astype(float)
    if isinstance(point, (tuple, list)):
        return np.asarray(point, dtype=float)
    c = to_cartesian(point)
    return np.array([c.x, c.y, c.z])


def im_g_free(r, r_prime, k: float) -> np.ndarray:
    """Imaginary part of the homogeneous-space dyadic Green tensor.

    Closed form; the coincidence limit (k/6 pi) * I is returned exactly for
    separations below 1e-9 wavelengths where the difference formula would
    lose digits.
    """
    if k <= 0.0:
        raise ValueError(f"k must be positive, got {k!r}")
    a = _as_vec(r)
    b = _as_vec(r_prime)
    R = a - b
    d = float(np.linalg.norm(R))
    if k * d < 2e-9 * math.pi:
        return free_space_ldos(k) * np.eye(3)
    u = k * d
    rh = R / d
    c_iso = math.sin(u) * (1.0 - 1.0 / u**2) + math.cos(u) / u
    c_rad = math.sin(u) * (3.0 / u**2 - 1.0) - 3.0 * math.cos(u) / u
    return (c_iso * np.eye(3) + c_rad * np.outer(rh, rh)) / (4.0 * math.pi * d)


@dataclass(frozen=True)
class HalfSpaceFrame:
    """PEC mirror plane through `origin` with unit `normal` into the vacuum."""

    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))
    normal: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ValueError("normal must be a unit vector")
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float))
        object.__setattr__(self, "normal", n)

    @property
    def reflection(self) -> np.ndarray:
        return np.eye(3) - 2.0 * np.outer(self.normal, self.normal)

    def mirror_point(self, p: np.ndarray) -> np.ndarray:
        return p - 2.0 * float(np.dot(p - self.origin, self.normal)) * self.normal

    def height(self, p: np.ndarray) -> float:
        return float(np.dot(p - self.origin, self.normal))


def im_g_halfspace(r, r_prime, k: float, frame: HalfSpaceFrame | None = None) -> np.ndarray:
    """Im G for a PEC half-space by the image construction.

    Im[G0(r, r') + G_img] with G_img(r, r') = -G0(r, M r') @ M, where M is
    the mirror reflection; the sign makes tangential fields vanish on the
    plane (checked by test, not convention tables).
    """
    frame = frame or HalfSpaceFrame()
    a = _as_vec(r)
    b = _as_vec(r_prime)
    if frame.height(a) <= 0.0 or frame.height(b) <= 0.0:
        raise ValueError("both points must lie strictly on the vacuum side of the mirror")
    M = frame.reflection
    return im_g_free(a, b, k) - im_g_free(a, frame.mirror_point(b), k) @ M


def halfspace_rate(orientation, height: float, k: float) -> float:
    """Normalized rate Gamma/Gamma0 for a dipole at `height` above the mirror."""
    d = np.asarray(orientation, dtype=float)
    d = d / np.linalg.norm(d)
    p = np.array([0.0, height, 0.0])
    G = im_g_halfspace(p, p, k)
    return float(d @ G @ d) / free_space_ldos(k)


def series_vs_oracle_report(
    heights,
    truncations,
    k: float,
    orientation=(0.0, 0.0, 1.0),
    rate_fn=None,
):
    """Relative-error table |series - oracle| / |oracle| per (height, truncation).

    `rate_fn(orientation, height, k, truncation)` supplies the wedge-series
    normalized rate for the interior angle pi; by default the one from
    `rates` is used.  Rows: heights; columns: truncations.
    """
    if rate_fn is None:
        from .rates import halfspace_series_rate

        rate_fn = halfspace_series_rate
    heights = [float(h) for h in heights]
    errors = np.empty((len(heights), len(truncations)))
    t0 = time.perf_counter()
    for i, h in enumerate(heights):
        oracle = halfspace_rate(orientation, h, k)
        for j, tr in enumerate(truncations):
            val = rate_fn(orientation, h, k, tr)
            errors[i, j] = abs(val - oracle) / abs(oracle)
    return {
        "heights": heights,
        "truncations": list(truncations),
        "relative_errors": errors,
        "wall_time_s": time.perf_counter() - t0,
    }
