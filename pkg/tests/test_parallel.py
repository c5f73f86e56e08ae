"""Cylindrical-series checks against the image-dipole oracle and symmetry laws."""

import math

import numpy as np
import pytest

from pecwedge.geometry import PointCyl, make_wedge
from pecwedge.oracles import halfspace_rate, im_g_free, free_space_ldos
from pecwedge.parallel import (
    ImHertzZ,
    Truncation,
    expansion_parameter,
    im_p_zz,
    im_pi_z,
    suggest_truncation_parallel,
    zz_batch,
)

K = 2 * math.pi
HALF = make_wedge(math.pi)


def rate_z(rho, phi, wedge, trunc, k=K):
    p = PointCyl(rho, phi, 0.0)
    res = im_p_zz(p, p, k, wedge, trunc)
    return res.value / free_space_ldos(k)


def free_space_pi_z(src, obs, k):
    """Oracle: k * Im Pi_z without boundaries = k * Im g / k^2 = j0(kD)/(4 pi)."""
    d = math.dist((src.rho * math.cos(src.phi), src.rho * math.sin(src.phi), src.z),
                  (obs.rho * math.cos(obs.phi), obs.rho * math.sin(obs.phi), obs.z))
    x = k * d
    return (math.sin(x) / x if x > 0 else 1.0) / (4 * math.pi)


def image_pi_z(src, obs, k):
    """Half-space Dirichlet oracle for the scalar potential (mirror y = 0)."""
    mirrored = PointCyl(src.rho, (2 * math.pi - src.phi) % (2 * math.pi), src.z)
    return free_space_pi_z(src, obs, k) - free_space_pi_z(mirrored, obs, k)


class TestImPiZ:
    def test_face_limit_vanishes(self):
        t = Truncation(12, 12)
        src = PointCyl(0.4, 1.1, 0.0)
        for eps in (1e-3, 1e-4):
            obs = PointCyl(0.5, eps, 0.0)
            v = im_pi_z(src, obs, K, HALF, t).value
            assert abs(v) < 2e-3 * eps / 1e-3

    def test_half_space_vs_image_oracle_two_point(self):
        t = Truncation(20, 20)
        rng = np.random.default_rng(4)
        for _ in range(25):
            src = PointCyl(rng.uniform(0.1, 0.8), rng.uniform(0.2, math.pi - 0.2), rng.uniform(-0.4, 0.4))
            obs = PointCyl(rng.uniform(0.1, 0.8), rng.uniform(0.2, math.pi - 0.2), rng.uniform(-0.4, 0.4))
            ours = im_pi_z(src, obs, K, HALF, t).value
            ref = image_pi_z(src, obs, K)
            assert ours == pytest.approx(ref, rel=2e-9, abs=1e-12)

    def test_half_space_coincidence_spec_example(self):
        # coincident points at height 0.5 lambda: <=1e-6 relative at M=P=20
        t = Truncation(20, 20)
        p = PointCyl(0.5, math.pi / 2, 0.0)
        ours = im_pi_z(p, p, K, HALF, t).value
        ref = image_pi_z(p, p, K)
        assert ours == pytest.approx(ref, rel=1e-6)

    def test_swap_symmetry_exact(self):
        t = Truncation(10, 10)
        w = make_wedge(0.7 * math.pi, 0.3)
        a = PointCyl(0.5, 1.0, 0.1)
        b = PointCyl(0.7, 2.0, -0.2)
        assert im_pi_z(a, b, K, w, t).value == im_pi_z(b, a, K, w, t).value

    def test_rejects_conductor_points(self):
        t = Truncation(5, 5)
        with pytest.raises(ValueError):
            im_pi_z(PointCyl(0.5, 0.0, 0.0), PointCyl(0.5, 1.0, 0.0), K, HALF, t)
        with pytest.raises(ValueError):
            im_pi_z(PointCyl(0.5, 1.0, 0.0), PointCyl(0.5, -0.5, 0.0), K, HALF, t)

    def test_convergence_flag(self):
        p = PointCyl(2.5, math.pi / 2, 0.0)  # B ~ 11: needs deep truncation
        shallow = im_pi_z(p, p, K, HALF, Truncation(6, 6))
        assert not shallow.converged
        deep_t = suggest_truncation_parallel(float(expansion_parameter(2.5, 2.5, 0.0, K)), HALF)
        deep = im_pi_z(p, p, K, HALF, deep_t)
        assert deep.converged


class TestImPzz:
    def test_half_space_rate_height_half_lambda(self):
        oracle = halfspace_rate([0, 0, 1], 0.5, K)
        ours = rate_z(0.5, math.pi / 2, HALF, Truncation(20, 20))
        assert ours == pytest.approx(oracle, rel=1e-4)

    def test_on_mirror_rate_vanishes(self):
        ours = rate_z(1e-3, math.pi / 2, HALF, Truncation(12, 12))
        assert abs(ours) < 5e-3

    def test_far_field_unity(self):
        trunc = suggest_truncation_parallel(float(expansion_parameter(10.0, 10.0, 0.0, K)), HALF)
        ours = rate_z(10.0, math.pi / 2, HALF, trunc)
        assert ours == pytest.approx(1.0, abs=0.05)

    def test_reciprocity(self):
        t = Truncation(12, 12)
        w = make_wedge(0.6 * math.pi)
        a = PointCyl(0.4, 1.2, 0.0)
        b = PointCyl(0.8, 2.1, 0.3)
        assert im_p_zz(a, b, K, w, t).value == pytest.approx(im_p_zz(b, a, K, w, t).value, rel=1e-10)

    def test_half_space_equivalence_ladder(self):
        # heights where (10,10) has converged; rule-level check <= 1e-3
        t = Truncation(10, 10)
        for h in np.linspace(0.05, 1.2, 12):
            oracle = halfspace_rate([0, 0, 1], h, K)
            ours = rate_z(h, math.pi / 2, HALF, t)
            assert abs(ours / oracle - 1) < 1e-3, f"h={h}"

    def test_truncation_cauchy_ladder(self):
        p = PointCyl(0.5, math.pi / 2, 0.0)
        ladder = [10, 15, 20, 25]
        vals = [im_p_zz(p, p, K, HALF, Truncation(m, m)).value for m in ladder]
        diffs = [abs(b - a) for a, b in zip(vals, vals[1:])]
        assert all(d2 <= d1 + 1e-15 for d1, d2 in zip(diffs, diffs[1:]))
        v10, v30 = vals[0], im_p_zz(p, p, K, HALF, Truncation(30, 30)).value
        assert abs(v10 / v30 - 1) < 0.01

    def test_float_and_mp_paths_agree_in_overlap(self):
        # B ~ 4-5 runs in float64; force the mp path by shrinking the gate
        import pecwedge.parallel as par

        p = PointCyl(1.8, math.pi / 2, 0.0)
        t = Truncation(30, 30)
        v_float = im_p_zz(p, p, K, HALF, t).value
        old = par._FLOAT_B_MAX
        try:
            par._FLOAT_B_MAX = -1.0
            v_mp = im_p_zz(p, p, K, HALF, t).value
        finally:
            par._FLOAT_B_MAX = old
        assert v_float == pytest.approx(v_mp, rel=3e-7)

    def test_mp_path_far_height_matches_oracle(self):
        h = 5.0
        b = float(expansion_parameter(h, h, 0.0, K))
        trunc = suggest_truncation_parallel(b, HALF)
        oracle = halfspace_rate([0, 0, 1], h, K)
        ours = rate_z(h, math.pi / 2, HALF, trunc)
        assert ours == pytest.approx(oracle, rel=1e-6)

    def test_dirichlet_face_linear_decay(self):
        t = Truncation(12, 12)
        vals = []
        for eps in (4e-3, 2e-3, 1e-3):
            vals.append(abs(im_pi_z(PointCyl(0.5, eps, 0.0), PointCyl(0.4, 1.0, 0.0), K, HALF, t).value))
        assert vals[0] / vals[1] == pytest.approx(2.0, rel=0.05)
        assert vals[1] / vals[2] == pytest.approx(2.0, rel=0.05)


class TestZZBatchConsistency:
    def test_batch_matches_scalar(self):
        t = Truncation(10, 10)
        w = make_wedge(math.pi / 2)
        rng = np.random.default_rng(6)
        rho = rng.uniform(0.2, 1.0, 5)
        phi = rng.uniform(0.3, 1.2 * math.pi, 5)
        vals, _ = zz_batch(rho, phi, rho, phi, 0.0, K, w.nu, t.m_max, t.p_max)
        for i in range(5):
            p = PointCyl(rho[i], phi[i], 0.0)
            assert vals[i] == pytest.approx(im_p_zz(p, p, K, w, t).value, rel=1e-12)
