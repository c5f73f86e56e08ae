"""Spherical vector-wave expansion of Im G and the assembled full tensor.

Only the regular (spherical-Bessel) radial functions appear: taking the
imaginary part of the outgoing/regular products collapses both radial
orderings to j*j, which is what makes the expansion usable at coincidence.
The series is

    Im G = (pi/2k) sum_{m,n} [M x M' + N x N'] / (l (l+1) Z_{mu n}),

l = mu + n, mu = m pi / vacuum_angle, with

    M = k j_l(kr) m_vec,   N = (1/r) j_l(kr) l_vec + ((r j_l(kr))'/r) n_vec,

and angular vectors (theta-hat, phi-hat, r-hat components; phi measured
from the first conductor face so both faces are Dirichlet/Neumann exact):

    m_vec = -mu sin(mu phi) (T/sin th) th_hat - cos(mu phi) dT/dth ph_hat
    n_vec =  sin(mu phi) dT/dth th_hat + mu cos(mu phi) (T/sin th) ph_hat
    l_vec =  l (l+1) sin(mu phi) T r_hat

with T = T^{-mu}_{mu+n}(cos th).  The azimuthal factors here are the
boundary-condition-consistent ones; the half-space equivalence suite pins
them against the exact image construction.

Everything runs on scaled Legendre ladders (the factor sin(th)^mu / (2^mu
Gamma(mu+1)) and the 1/Z normalisation are combined in log space), so large
fractional orders neither overflow nor hit 0/0 near the edge axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import PointCart, PointSph, WedgeGeometry, in_vacuum, to_cartesian, to_spherical
from .parallel import Truncation, zz_batch
from .specfun import _legendre_ladder, bessel_j, log_gamma

__all__ = [
    "ImGreenTensor",
    "VectorWaveTerm",
    "z_norm",
    "vector_waves",
    "im_s_tensor",
    "im_g_full",
    "suggest_truncation_spherical",
]

_TAIL_RTOL = 1e-6


@dataclass(frozen=True)
class ImGreenTensor:
    matrix: np.ndarray
    r: PointCart
    r_prime: PointCart
    k: float
    tail_estimate: float
    converged: bool


@dataclass(frozen=True)
class VectorWaveTerm:
    m: int
    n: int
    mu: float
    M_vec: np.ndarray  # spherical-basis components (r, theta, phi)
    N_vec: np.ndarray


def suggest_truncation_spherical(max_kr: float, wedge: WedgeGeometry) -> Truncation:
    """Cutoffs for the spherical expansion at radii up to max_kr from the edge.

    The partial sum reconstructs the tensor only out to combined degree
    l ~ kr, so the cutoff follows the usual multipole rule with margin.
    """
    depth = max_kr + 4.05 * max(0.0, max_kr) ** (1.0 / 3.0) + 10.0
    return Truncation(m_max=int(math.ceil(wedge.nu * depth)), p_max=int(math.ceil(depth)))


def _log_z_norm(m: int, n, mu: float, theta_v: float):
    n = np.asarray(n, dtype=float)
    return (
        (math.log(2.0) if m == 0 else 0.0)
        + math.log(math.pi)
        + math.log(theta_v)
        + log_gamma(n + 1.0)
        - math.log(2.0)
        - np.log(2.0 * mu + 2.0 * n + 1.0)
        - log_gamma(2.0 * mu + n + 1.0)
    )


def z_norm(m: int, n: int, wedge: WedgeGeometry) -> float:
    """Normalisation Z_{mu n} = (1+delta_{m0}) pi theta_v n! / (2(2mu+2n+1) Gamma(2mu+n+1))."""
    if m < 0 or n < 0:
        raise ValueError("m and n must be nonnegative integers")
    return float(np.exp(_log_z_norm(m, n, float(wedge.mu(m)), wedge.vacuum_angle)))


def _sph_arrays(points):
    """(r, theta, phi_lab) arrays from an iterable of points."""
    sph = [to_spherical(p) for p in points]
    r = np.array([p.r for p in sph])
    th = np.array([p.theta for p in sph])
    ph = np.array([p.phi for p in sph])
    return r, th, ph


class _Side:
    """Per-point geometry and per-(m) ladders for one side of the outer product."""

    def __init__(self, r, theta, phi_lab, wedge: WedgeGeometry, k: float):
        self.r = np.asarray(r, dtype=float)
        self.theta = np.asarray(theta, dtype=float)
        self.phi_lab = np.asarray(phi_lab, dtype=float)
        self.phi_rel = wedge.relative_azimuth(self.phi_lab)
        self.k = k
        self.kr = k * self.r
        st, ct = np.sin(self.theta), np.cos(self.theta)
        sp, cp = np.sin(self.phi_lab), np.cos(self.phi_lab)
        # spherical basis in lab Cartesian coordinates, shape (3, N)
        self.rhat = np.stack([st * cp, st * sp, ct])
        self.that = np.stack([ct * cp, ct * sp, -st])
        self.phat = np.stack([-sp, cp, np.zeros_like(sp)])

    def load_m(self, mu: float, n_max: int):
        T, U, D, alpha = _legendre_ladder(mu, n_max, np.cos(self.theta))
        orders = mu + np.arange(n_max + 2, dtype=float)
        j_big = bessel_j(orders[:, None] + 0.5, self.kr[None, :])
        js = np.sqrt(np.pi / (2.0 * self.kr))[None, :] * j_big
        sjd = ((1.0 + orders[:-1, None]) * js[:-1] - self.kr[None, :] * js[1:]) / self.r[None, :]
        self.T, self.U, self.D, self.alpha = T, U, D, alpha
        self.js, self.sjd = js, sjd
        self.smu = np.sin(mu * self.phi_rel)
        self.cmu = np.cos(mu * self.phi_rel)
        self.mu = mu

    def waves(self, n: int):
        """Scaled M and N vectors (3, N) in lab Cartesian components."""
        mu, l = self.mu, self.mu + n
        m_vec = (-mu * self.smu * self.U[n]) * self.that + (-self.cmu * self.D[n]) * self.phat
        n_vec = (self.smu * self.D[n]) * self.that + (mu * self.cmu * self.U[n]) * self.phat
        l_vec = (l * (l + 1.0) * self.smu * self.T[n]) * self.rhat
        M = self.k * self.js[n] * m_vec
        N = (1.0 / self.r) * self.js[n] * l_vec + self.sjd[n] * n_vec
        return M, N


def _sph_pair_batch(side_a: _Side, side_b: _Side | None, wedge: WedgeGeometry, k: float,
                    m_max: int, n_max: int):
    """Batched Im G over point pairs; side_b None means coincidence.

    Returns (tensors (N,3,3), tail (N,)); tail is the Frobenius magnitude of
    the final angular ring padded by the final-degree terms.
    """
    theta_v = wedge.vacuum_angle
    n_pts = side_a.r.size
    W = np.zeros((n_pts, 3, 3))
    ring_prev = np.zeros(n_pts)
    ring_last = np.zeros(n_pts)
    n_tail = np.zeros(n_pts)
    for m in range(0, m_max + 1):
        mu = float(wedge.mu(m))
        side_a.load_m(mu, n_max)
        b = side_a if side_b is None else side_b
        if side_b is not None:
            side_b.load_m(mu, n_max)
        ring = np.zeros((n_pts, 3, 3))
        term = np.zeros((n_pts, 3, 3))
        for n in range(0, n_max + 1):
            l = mu + n
            if l == 0.0:
                continue
            MA, NA = side_a.waves(n)
            MB, NB = (MA, NA) if side_b is None else side_b.waves(n)
            logw = side_a.alpha + b.alpha - _log_z_norm(m, n, mu, theta_v) - math.log(l * (l + 1.0))
            w = np.exp(logw)
            term = w[:, None, None] * (
                np.einsum("in,jn->nij", MA, MB) + np.einsum("in,jn->nij", NA, NB)
            )
            ring += term
        W += ring
        ring_prev = ring_last
        ring_last = np.linalg.norm(ring, axis=(1, 2))
        n_tail += np.linalg.norm(term, axis=(1, 2))
    pref = math.pi / (2.0 * k)
    tail = pref * np.maximum(np.maximum(ring_prev, ring_last), n_tail)
    return pref * W, tail


def _batch_from_cart(pts_a, pts_b, wedge, k, m_max, n_max):
    ra, ta, pa = pts_a
    side_a = _Side(ra, ta, pa, wedge, k)
    side_b = None if pts_b is None else _Side(*pts_b, wedge, k)
    return _sph_pair_batch(side_a, side_b, wedge, k, m_max, n_max)


def vector_waves(m: int, n: int, wedge: WedgeGeometry, k: float, point: PointSph) -> VectorWaveTerm:
    """M and N vector wave functions at one point, spherical-basis components."""
    sph = to_spherical(point)
    if sph.r <= 0.0:
        raise ValueError("vector waves require r > 0")
    if not (0.0 < sph.theta < math.pi):
        raise ValueError("vector waves require theta strictly inside (0, pi)")
    if not in_vacuum(point, wedge).inside:
        raise ValueError(f"point lies on the conductor: {point!r}")
    side = _Side(np.array([sph.r]), np.array([sph.theta]), np.array([sph.phi]), wedge, k)
    mu = float(wedge.mu(m))
    side.load_m(mu, n)
    scale = np.exp(side.alpha[0])
    l = mu + n
    smu, cmu = side.smu[0], side.cmu[0]
    m_sph = scale * np.array([0.0, -mu * smu * side.U[n][0], -cmu * side.D[n][0]])
    n_sph = scale * np.array(
        [l * (l + 1.0) * smu * side.T[n][0], smu * side.D[n][0], mu * cmu * side.U[n][0]]
    )
    M = k * side.js[n][0] * m_sph
    N = np.array(
        [
            side.js[n][0] / sph.r * n_sph[0],
            side.sjd[n][0] * n_sph[1],
            side.sjd[n][0] * n_sph[2],
        ]
    )
    return VectorWaveTerm(m=m, n=n, mu=mu, M_vec=M, N_vec=N)


def _validate_point(point, wedge, name):
    sph = to_spherical(point)
    if sph.r <= 0.0:
        raise ValueError(f"{name} must have r > 0")
    if not in_vacuum(point, wedge).inside:
        raise ValueError(f"{name} lies on the conductor or outside the vacuum sector: {point!r}")
    return sph


def _tensor_result(matrix, tail, r, r_prime, k, coincident):
    if coincident:
        matrix = 0.5 * (matrix + matrix.T)
    scale = max(float(np.linalg.norm(matrix)), k / (6.0 * math.pi))
    return ImGreenTensor(
        matrix=matrix,
        r=to_cartesian(r),
        r_prime=to_cartesian(r_prime),
        k=k,
        tail_estimate=float(tail),
        converged=bool(tail <= _TAIL_RTOL * scale),
    )


def im_s_tensor(r, r_prime, wedge: WedgeGeometry, k: float, trunc: Truncation) -> ImGreenTensor:
    """Two-point Im G from the spherical expansion, Cartesian basis.

    All nine entries are returned; the zz entry converges slowly in this
    basis and the assembled tensor (im_g_full) replaces it with the
    cylindrical result.
    """
    if k <= 0.0:
        raise ValueError(f"k must be positive, got {k!r}")
    sa = _validate_point(r, wedge, "r")
    sb = _validate_point(r_prime, wedge, "r_prime")
    coincident = sa == sb
    a = (np.array([sa.r]), np.array([sa.theta]), np.array([sa.phi]))
    bpts = None if coincident else (np.array([sb.r]), np.array([sb.theta]), np.array([sb.phi]))
    tensors, tails = _batch_from_cart(a, bpts, wedge, k, trunc.m_max, trunc.p_max)
    return _tensor_result(tensors[0], tails[0], r, r_prime, k, coincident)


def im_g_full_batch(points_a, points_b, wedge: WedgeGeometry, k: float, trunc: Truncation):
    """Assembled Im G over many pairs (points_b None means coincidence).

    Returns (tensors (N,3,3), tails (N,)); the zz entries come from the
    cylindrical expansion, everything else from the spherical one.
    """
    from .geometry import to_cylindrical

    sa = [_validate_point(p, wedge, "points_a") for p in points_a]
    a = (
        np.array([p.r for p in sa]),
        np.array([p.theta for p in sa]),
        np.array([p.phi for p in sa]),
    )
    if points_b is None:
        bpts = None
        cb = [to_cylindrical(p) for p in points_a]
    else:
        sb = [_validate_point(p, wedge, "points_b") for p in points_b]
        bpts = (
            np.array([p.r for p in sb]),
            np.array([p.theta for p in sb]),
            np.array([p.phi for p in sb]),
        )
        cb = [to_cylindrical(p) for p in points_b]
    tensors, tails = _batch_from_cart(a, bpts, wedge, k, trunc.m_max, trunc.p_max)
    ca = [to_cylindrical(p) for p in points_a]
    zz_vals, zz_tails = zz_batch(
        np.array([c.rho for c in ca]),
        wedge.relative_azimuth(np.array([c.phi for c in ca])),
        np.array([c.rho for c in cb]),
        wedge.relative_azimuth(np.array([c.phi for c in cb])),
        np.array([c.z for c in ca]) - np.array([c.z for c in cb]),
        k,
        wedge.nu,
        trunc.m_max,
        trunc.p_max,
    )
    tensors[:, 2, 2] = zz_vals
    if points_b is None:
        tensors = 0.5 * (tensors + np.transpose(tensors, (0, 2, 1)))
    return tensors, np.maximum(tails, zz_tails)


def im_g_full(r, r_prime, wedge: WedgeGeometry, k: float, trunc: Truncation) -> ImGreenTensor:
    """Assembled Im G: zz from the cylindrical expansion, the rest spherical."""
    sph = im_s_tensor(r, r_prime, wedge, k, trunc)
    from .geometry import to_cylindrical

    ca, cb = to_cylindrical(r), to_cylindrical(r_prime)
    zz_vals, zz_tails = zz_batch(
        np.array([ca.rho]),
        wedge.relative_azimuth(ca.phi),
        cb.rho,
        wedge.relative_azimuth(cb.phi),
        ca.z - cb.z,
        k,
        wedge.nu,
        trunc.m_max,
        trunc.p_max,
    )
    matrix = sph.matrix.copy()
    matrix[2, 2] = zz_vals[0]
    tail = max(sph.tail_estimate, float(zz_tails[0]))
    coincident = to_spherical(r) == to_spherical(r_prime)
    return _tensor_result(matrix, tail, r, r_prime, k, coincident)
