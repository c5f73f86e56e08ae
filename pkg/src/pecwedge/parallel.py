"""Cylindrical series for the edge-parallel source: Im Pi_z and Im P_zz.

The double sum evaluated here is

    Im Pi_z = pref * sum_m sin(m phi/nu) sin(m phi'/nu)
              * sum_p J_{m/nu+2p+1/2}(k R1) / (p! Gamma(m/nu+p+1))
              * (k rho rho' / (2 R1))^{m/nu+2p}

with R1 = sqrt(rho^2 + rho'^2 + (z-z')^2) and, in the units used throughout
this package, pref = sqrt(2 pi / (k R1)) / (2 pi nu).  That choice makes the
returned quantity dimensionless and equal to k times the physical Hertz
potential of the unit source, so that

    Im G_zz = (k^2 + d^2/ds^2) Im Pi_z / k,   s = z - z',

recovers k/(6 pi) in free space exactly (the epsilon/Z prefactors cancel in
every normalized rate).

The inner sum cancels catastrophically once the expansion parameter
B = k rho rho' / (2 R1) grows: its largest term is ~ exp(2B) times the
result.  Pairs with B above _FLOAT_B_MAX are therefore evaluated in
adaptive-precision arithmetic; below it, plain vectorised float64 keeps
>= 10 accurate digits.

Only the zz component is assembled here.  The off-diagonal components
sourced by the edge-parallel dipole are not needed by any observable in
this package; if required they follow from the same potential as
Im G_xz = d2/(dx dz') Im Pi_z / k and Im G_yz = d2/(dy dz') Im Pi_z / k
(observation-gradient of the z-divergence), evaluable with the identical
stencil machinery on the transverse coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .geometry import PointCyl, WedgeGeometry, in_vacuum, to_cylindrical
from .specfun import bessel_j, log_gamma

__all__ = ["Truncation", "ImHertzZ", "ZZResult", "im_pi_z", "im_p_zz", "suggest_truncation_parallel"]

_FLOAT_B_MAX = 5.5
# finite-difference step for d^2/ds^2, in wavelengths (spec design decision)
_FD_STEP_WAVELENGTHS = 1e-3
# tail is "converged" when below this fraction of max(|value|, free-space scale)
_TAIL_RTOL = 1e-6
_FREE_SPACE_PI_SCALE = 1.0 / (4.0 * math.pi)


@dataclass(frozen=True)
class Truncation:
    """Series cutoffs: m_max over the angular index, p_max over the radial one
    (the same type serves the spherical expansion, where p_max bounds n)."""

    m_max: int
    p_max: int

    def __post_init__(self):
        if self.m_max < 1 or self.p_max < 1:
            raise ValueError(f"truncation cutoffs must be >= 1, got {self!r}")


@dataclass(frozen=True)
class ImHertzZ:
    value: float
    tail_estimate: float
    converged: bool


@dataclass(frozen=True)
class ZZResult:
    value: float
    tail_estimate: float
    converged: bool


def expansion_parameter(rho, rho_p, dz, k):
    """B = k rho rho' / (2 R1); controls cancellation and required depth."""
    r1 = np.sqrt(np.asarray(rho) ** 2 + np.asarray(rho_p) ** 2 + np.asarray(dz) ** 2)
    return k * np.asarray(rho) * np.asarray(rho_p) / (2.0 * r1)


def suggest_truncation_parallel(max_b: float, wedge: WedgeGeometry) -> Truncation:
    """Cutoffs that push the truncation tail below ~1e-9 for parameter B.

    Empirically the inner sum needs p ~ 2.75 B + const before its terms die
    (the Bessel orders must pass the turning point at 4B).
    """
    depth = 2.75 * max(0.0, max_b) + 14.0
    return Truncation(m_max=int(math.ceil(wedge.nu * depth)), p_max=int(math.ceil(depth)))


def _pi_z_batch_float(rho, phi_rel, rho_p, phip_rel, dz, k, nu, m_max, p_max):
    """Vectorised float64 evaluation; valid for B <= _FLOAT_B_MAX."""
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    rho_p = np.atleast_1d(np.asarray(rho_p, dtype=float))
    phi_rel = np.atleast_1d(np.asarray(phi_rel, dtype=float))
    phip_rel = np.atleast_1d(np.asarray(phip_rel, dtype=float))
    dz = np.atleast_1d(np.asarray(dz, dtype=float))
    r1 = np.sqrt(rho**2 + rho_p**2 + dz**2)
    a = k * r1
    b = k * rho * rho_p / (2.0 * r1)
    logb = np.log(b)
    pref = np.sqrt(2.0 * math.pi / (k * r1)) / (2.0 * math.pi * nu)
    p = np.arange(p_max + 1, dtype=float)
    lg_p = log_gamma(p + 1.0)
    total = np.zeros_like(r1)
    rings = [np.zeros_like(r1), np.zeros_like(r1)]
    p_tail = np.zeros_like(r1)
    for m in range(1, m_max + 1):
        q = m / nu
        ang = np.sin(q * phi_rel) * np.sin(q * phip_rel)
        js = bessel_j((q + 0.5 + 2.0 * p)[:, None], a[None, :])
        logw = (q + 2.0 * p)[:, None] * logb[None, :] - (lg_p + log_gamma(q + p + 1.0))[:, None]
        absj = np.abs(js)
        terms = np.where(absj > 0.0, np.sign(js) * np.exp(np.log(np.where(absj > 0, absj, 1.0)) + logw), 0.0)
        inner = terms.sum(axis=0)
        ring = ang * inner
        total += ring
        rings = [rings[1], ring]
        p_tail += np.abs(ang) * np.abs(terms[-1])
    # the last even/odd ring can vanish by symmetry; pad with the inner-sum tail
    tail = np.maximum(np.maximum(np.abs(rings[0]), np.abs(rings[1])), p_tail)
    return pref * total, pref * tail


def _pi_z_scalar_mp(rho, phi_rel, rho_p, phip_rel, dz, k, nu, m_max, p_max, dps):
    """Adaptive-precision evaluation of one pair; returns (value, tail)."""
    with mp.workdps(dps):
        rho_, rho_p_, dz_, k_, nu_ = map(mp.mpf, (rho, rho_p, dz, k, nu))
        phi_, phip_ = mp.mpf(phi_rel), mp.mpf(phip_rel)
        r1 = mp.sqrt(rho_**2 + rho_p_**2 + dz_**2)
        a = k_ * r1
        b = k_ * rho_ * rho_p_ / (2 * r1)
        logb = mp.log(b)
        pref = mp.sqrt(2 * mp.pi / (k_ * r1)) / (2 * mp.pi * nu_)
        total = mp.mpf(0)
        rings = [mp.mpf(0), mp.mpf(0)]
        p_tail = mp.mpf(0)
        for m in range(1, m_max + 1):
            q = mp.mpf(m) / nu_
            ang = mp.sin(q * phi_) * mp.sin(q * phip_)
            # J ladder over orders q+1/2 .. q+1/2+2p_max by downward recurrence
            top = q + mp.mpf(0.5) + 2 * p_max
            j_hi = mp.besselj(top + 1, a)
            j_lo = mp.besselj(top, a)
            js = [mp.mpf(0)] * (2 * p_max + 1)
            js[2 * p_max] = j_lo
            for j in range(2 * p_max - 1, -1, -1):
                sigma = q + mp.mpf(0.5) + j + 1
                j_m1 = (2 * sigma / a) * j_lo - j_hi
                j_hi, j_lo = j_lo, j_m1
                js[j] = j_m1
            inner = mp.mpf(0)
            last_term = mp.mpf(0)
            for pp in range(p_max + 1):
                lw = (q + 2 * pp) * logb - mp.loggamma(pp + 1) - mp.loggamma(q + pp + 1)
                last_term = js[2 * pp] * mp.e**lw
                inner += last_term
            ring = ang * inner
            total += ring
            rings = [rings[1], ring]
            p_tail += abs(ang) * abs(last_term)
        tail = max(abs(rings[0]), abs(rings[1]), p_tail)
        return float(pref * total), float(pref * tail)


def _required_dps(b_max: float) -> int:
    return 30 + int(math.ceil(0.9 * max(0.0, b_max)))


def _pi_z_values(rho, phi_rel, rho_p, phip_rel, dz, k, nu, m_max, p_max):
    """Dispatch between the float64 and adaptive-precision paths, elementwise."""
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    rho_p = np.atleast_1d(np.asarray(rho_p, dtype=float))
    phi_rel = np.broadcast_to(np.asarray(phi_rel, dtype=float), rho.shape).copy()
    phip_rel = np.broadcast_to(np.asarray(phip_rel, dtype=float), rho.shape).copy()
    dz = np.broadcast_to(np.asarray(dz, dtype=float), rho.shape).copy()
    b = expansion_parameter(rho, rho_p, dz, k)
    vals = np.empty_like(rho)
    tails = np.empty_like(rho)
    fast = b <= _FLOAT_B_MAX
    if np.any(fast):
        v, t = _pi_z_batch_float(
            rho[fast], phi_rel[fast], rho_p[fast], phip_rel[fast], dz[fast], k, nu, m_max, p_max
        )
        vals[fast] = v
        tails[fast] = t
    for i in np.nonzero(~fast)[0]:
        vals[i], tails[i] = _pi_z_scalar_mp(
            rho[i], phi_rel[i], rho_p[i], phip_rel[i], dz[i], k, nu, m_max, p_max, _required_dps(b[i])
        )
    return vals, tails


_STENCIL_UNITS = (0, 1, -1, 2, -2, 4, -4)


def zz_batch(rho, phi_rel, rho_p, phip_rel, s0, k, nu, m_max, p_max):
    """(k^2 + d^2/ds^2) Im Pi_z / k for arrays of source/observation pairs.

    The s-derivative uses the 5-point central stencil with one Richardson
    level, step _FD_STEP_WAVELENGTHS of the wavelength.  Im Pi_z is even in
    s, so shifted evaluations fold onto |s|.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    n = rho.size
    rho_p = np.broadcast_to(np.asarray(rho_p, dtype=float), rho.shape)
    phi_rel = np.broadcast_to(np.asarray(phi_rel, dtype=float), rho.shape)
    phip_rel = np.broadcast_to(np.asarray(phip_rel, dtype=float), rho.shape)
    s0 = np.broadcast_to(np.asarray(s0, dtype=float), rho.shape)
    lam = 2.0 * math.pi / k
    h = _FD_STEP_WAVELENGTHS * lam
    offsets = np.array(_STENCIL_UNITS, dtype=float) * h
    s_grid = np.abs(s0[:, None] + offsets[None, :])  # even in s
    flat = lambda arr: np.repeat(arr, len(_STENCIL_UNITS))
    vals, tails = _pi_z_values(
        flat(rho), flat(phi_rel), flat(rho_p), flat(phip_rel), s_grid.ravel(), k, nu, m_max, p_max
    )
    f = vals.reshape(n, len(_STENCIL_UNITS))
    f0, fp1, fm1, fp2, fm2, fp4, fm4 = (f[:, i] for i in range(7))
    d2_h = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h)
    d2_2h = (-fp4 + 16.0 * fp2 - 30.0 * f0 + 16.0 * fm2 - fm4) / (48.0 * h * h)
    d2 = (16.0 * d2_h - d2_2h) / 15.0
    values = (k * k * f0 + d2) / k
    tail = k * tails.reshape(n, len(_STENCIL_UNITS))[:, 0]
    return values, tail


def _validate_pair(src: PointCyl, obs: PointCyl, k: float, wedge: WedgeGeometry):
    if k <= 0.0:
        raise ValueError(f"k must be positive, got {k!r}")
    for name, pt in (("src", src), ("obs", obs)):
        if pt.rho <= 0.0:
            raise ValueError(f"{name} must have rho > 0 (edge excluded)")
        if not in_vacuum(pt, wedge).inside:
            raise ValueError(f"{name} lies on the conductor or outside the vacuum sector: {pt!r}")


def im_pi_z(src, obs, k: float, wedge: WedgeGeometry, trunc: Truncation) -> ImHertzZ:
    """Imaginary Hertz potential of the edge-parallel unit source (times k).

    Dimensionless; see the module docstring for the normalisation.  The tail
    estimate is the magnitude of the last angular ring.
    """
    src = to_cylindrical(src)
    obs = to_cylindrical(obs)
    _validate_pair(src, obs, k, wedge)
    phi = wedge.relative_azimuth(obs.phi)
    phi_p = wedge.relative_azimuth(src.phi)
    vals, tails = _pi_z_values(
        obs.rho, phi, src.rho, phi_p, obs.z - src.z, k, wedge.nu, trunc.m_max, trunc.p_max
    )
    value, tail = float(vals[0]), float(tails[0])
    scale = max(abs(value), _FREE_SPACE_PI_SCALE)
    return ImHertzZ(value, tail, tail <= _TAIL_RTOL * scale)


def im_p_zz(src, obs, k: float, wedge: WedgeGeometry, trunc: Truncation) -> ZZResult:
    """zz component of Im G from the cylindrical expansion (units 1/length)."""
    src = to_cylindrical(src)
    obs = to_cylindrical(obs)
    _validate_pair(src, obs, k, wedge)
    phi = wedge.relative_azimuth(obs.phi)
    phi_p = wedge.relative_azimuth(src.phi)
    vals, tails = zz_batch(
        np.array([obs.rho]), phi, src.rho, phi_p, obs.z - src.z, k, wedge.nu, trunc.m_max, trunc.p_max
    )
    value, tail = float(vals[0]), float(tails[0])
    scale = max(abs(value), k / (6.0 * math.pi))
    return ZZResult(value, tail, tail <= _TAIL_RTOL * scale)
