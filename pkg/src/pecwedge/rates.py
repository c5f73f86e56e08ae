"""Physical observables: normalized spontaneous and cooperative decay rates.

All outputs are dimensionless ratios against the vacuum rate; the material
constants in the underlying matrix elements cancel against the free-space
normalisation Im G0(r, r) = k/(6 pi) I.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import PointCart, WedgeGeometry, in_vacuum, to_cartesian, to_cylindrical, to_spherical
from .parallel import Truncation, zz_batch
from .perpendicular import _Side, _sph_pair_batch, im_g_full

__all__ = ["Dipole", "RateResult", "decay_rate", "cooperative_rate", "field_of_unit_current"]

_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class Dipole:
    """Point dipole: position, unit orientation, transition wavelength."""

    position: PointCart
    orientation: np.ndarray
    wavelength: float

    def __post_init__(self):
        d = np.asarray(self.orientation, dtype=float)
        if d.shape != (3,):
            raise ValueError(f"orientation must be a 3-vector, got {self.orientation!r}")
        norm = float(np.linalg.norm(d))
        if abs(norm - 1.0) > _UNIT_TOL:
            raise ValueError(f"orientation must be unit length (|d| = {norm})")
        if self.wavelength <= 0.0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength!r}")
        object.__setattr__(self, "orientation", d / norm)
        object.__setattr__(self, "position", to_cartesian(self.position))

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.wavelength


@dataclass(frozen=True)
class RateResult:
    normalized_rate: float
    tail_estimate: float
    converged: bool
    components: dict | None = None


def vacuum_cdr_normalization(donor: "Dipole", acceptor: "Dipole") -> float:
    """Default policy: Gamma^C_0 equals the vacuum single-atom rate Gamma_0.

    In Gamma_0 units this is 1, which sends the far-field symmetric CDR map
    to 1 + Gamma_dd^0/Gamma_0 with a unity contour far from the wedge.
    """
    return 1.0


def _sph_triplet(points):
    sph = [to_spherical(p) for p in points]
    return (
        np.array([p.r for p in sph]),
        np.array([p.theta for p in sph]),
        np.array([p.phi for p in sph]),
    )


def _quad_form_batch(points, orientation, wedge, k, trunc, cross_with=None):
    """d . Im G . d for many points, skipping the series a given orientation
    cannot see.  `cross_with` evaluates two-point tensors against one fixed
    point (used by the dipole-dipole term); None means coincidence.

    Returns (values (N,), tails (N,)) in absolute Im G units (1/length).
    """
    d = np.asarray(orientation, dtype=float)
    pts = list(points)
    n = len(pts)
    need_sph = abs(d[0]) > 0.0 or abs(d[1]) > 0.0
    need_zz = abs(d[2]) > 0.0
    vals = np.zeros(n)
    tails = np.zeros(n)
    ra, ta, pa = _sph_triplet(pts)
    if need_sph or (need_zz and abs(d[2]) < 1.0):
        side_a = _Side(ra, ta, pa, wedge, k)
        side_b = None if cross_with is None else _Side(*_sph_triplet([cross_with] * n), wedge, k)
        tensors, t_sph = _sph_pair_batch(side_a, side_b, wedge, k, trunc.m_max, trunc.p_max)
        if need_zz:
            tensors[:, 2, 2] = 0.0  # replaced by the cylindrical value below
        vals += np.einsum("i,nij,j->n", d, tensors, d)
        tails += t_sph
    if need_zz:
        cyl_a = [to_cylindrical(p) for p in pts]
        if cross_with is None:
            rho_b = np.array([c.rho for c in cyl_a])
            phi_b = np.array([c.phi for c in cyl_a])
            dz = np.zeros(n)
        else:
            cb = to_cylindrical(cross_with)
            rho_b = np.full(n, cb.rho)
            phi_b = np.full(n, cb.phi)
            dz = np.array([c.z for c in cyl_a]) - cb.z
        zz, t_zz = zz_batch(
            np.array([c.rho for c in cyl_a]),
            wedge.relative_azimuth(np.array([c.phi for c in cyl_a])),
            rho_b,
            wedge.relative_azimuth(phi_b),
            dz,
            k,
            wedge.nu,
            trunc.m_max,
            trunc.p_max,
        )
        vals += d[2] * d[2] * zz
        tails = np.maximum(tails, t_zz)
    return vals, tails


def _validated_position(dipole: Dipole, wedge: WedgeGeometry, name: str) -> PointCart:
    if not in_vacuum(dipole.position, wedge).inside:
        raise ValueError(f"{name} position lies on the conductor: {dipole.position!r}")
    return dipole.position


def decay_rate(dipole: Dipole, wedge: WedgeGeometry, trunc: Truncation) -> RateResult:
    """Normalized spontaneous decay rate Gamma/Gamma_0 = d.ImG(r,r).d / (k/6pi)."""
    pos = _validated_position(dipole, wedge, "dipole")
    k = dipole.k
    n0 = k / (6.0 * math.pi)
    vals, tails = _quad_form_batch([pos], dipole.orientation, wedge, k, trunc)
    rate = float(vals[0]) / n0
    tail = float(tails[0]) / n0
    return RateResult(rate, tail, tail <= 1e-6 * max(abs(rate), 1.0))


def decay_rate_batch(points, orientation, wedge: WedgeGeometry, k: float, trunc: Truncation):
    """Vectorised Gamma/Gamma_0 over many positions (shared orientation)."""
    d = np.asarray(orientation, dtype=float)
    d = d / np.linalg.norm(d)
    n0 = k / (6.0 * math.pi)
    vals, tails = _quad_form_batch(points, d, wedge, k, trunc)
    return vals / n0, tails / n0


def cooperative_rate(
    donor: Dipole,
    acceptor: Dipole,
    sign: str,
    wedge: WedgeGeometry,
    trunc: Truncation,
    normalization: Callable[[Dipole, Dipole], float] = vacuum_cdr_normalization,
) -> RateResult:
    """Cooperative decay rate of the entangled pair, Gamma^C / Gamma^C_0.

    Gamma^C = Gamma_A/2 + Gamma_D/2 +- Gamma_dd, the sign set by the
    symmetric / antisymmetric initial state.  Both dipoles must share the
    transition wavelength and (by assumption of the two-atom derivation)
    the orientation.  The components breakdown is always populated, in
    Gamma_0 units.
    """
    if sign not in ("symmetric", "antisymmetric"):
        raise ValueError(f"sign must be 'symmetric' or 'antisymmetric', got {sign!r}")
    if abs(donor.wavelength - acceptor.wavelength) > _UNIT_TOL * donor.wavelength:
        raise ValueError("donor and acceptor must share the transition wavelength")
    if np.linalg.norm(donor.orientation - acceptor.orientation) > 1e-9:
        raise ValueError("donor and acceptor must share the dipole orientation")
    pa = _validated_position(acceptor, wedge, "acceptor")
    pd = _validated_position(donor, wedge, "donor")
    k = donor.k
    n0 = k / (6.0 * math.pi)
    d = donor.orientation
    g_a, t_a = _quad_form_batch([pa], d, wedge, k, trunc)
    g_d, t_d = _quad_form_batch([pd], d, wedge, k, trunc)
    g_dd, t_dd = _quad_form_batch([pa], d, wedge, k, trunc, cross_with=pd)
    half_a = float(g_a[0]) / (2.0 * n0)
    half_d = float(g_d[0]) / (2.0 * n0)
    cross = float(g_dd[0]) / n0
    s = 1.0 if sign == "symmetric" else -1.0
    norm = normalization(donor, acceptor)
    rate = (half_a + half_d + s * cross) / norm
    tail = (float(max(t_a[0], t_d[0], t_dd[0]))) / n0 / norm
    return RateResult(
        rate,
        tail,
        tail <= 1e-6 * max(abs(rate), 1.0),
        components={"half_acceptor": half_a, "half_donor": half_d, "cross": cross},
    )


def cdr_map_batch(points, donor: Dipole, wedge: WedgeGeometry, trunc: Truncation):
    """The plotted CDR map quantity (Gamma + Gamma_dd)/Gamma^C_0 over a grid
    of acceptor positions, with Gamma = (Gamma_A + Gamma_D)/2.  Identical to
    the symmetric cooperative rate under the default normalisation."""
    k = donor.k
    n0 = k / (6.0 * math.pi)
    d = donor.orientation
    g_a, t_a = _quad_form_batch(points, d, wedge, k, trunc)
    g_d, t_d = _quad_form_batch([donor.position], d, wedge, k, trunc)
    g_dd, t_dd = _quad_form_batch(points, d, wedge, k, trunc, cross_with=donor.position)
    vals = (g_a / 2.0 + float(g_d[0]) / 2.0 + g_dd) / n0
    tails = np.maximum(np.maximum(t_a, t_dd), float(t_d[0])) / n0
    return vals, tails


def field_of_unit_current(direction, r, r_prime, wedge: WedgeGeometry, k: float, trunc: Truncation):
    """Im G(r, r') . w_hat: imaginary field of the unit current along w_hat."""
    w = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(w)
    if abs(norm - 1.0) > _UNIT_TOL:
        raise ValueError(f"direction must be a unit vector, got norm {norm}")
    G = im_g_full(r, r_prime, wedge, k, trunc)
    return G.matrix @ (w / norm)


def halfspace_series_rate(orientation, height: float, k: float, trunc: Truncation) -> float:
    """Wedge-series Gamma/Gamma_0 at `height` above the interior-angle-pi wedge.

    Used by the convergence report and the equivalence suites; the matching
    oracle is the image construction.
    """
    from .geometry import make_wedge

    wedge = make_wedge(math.pi)
    d = np.asarray(orientation, dtype=float)
    d = d / np.linalg.norm(d)
    dip = Dipole(PointCart(0.0, float(height), 0.0), d, 2.0 * math.pi / k)
    return decay_rate(dip, wedge, trunc).normalized_rate
