"""Wedge geometry: angle mapping, conversions, vacuum-sector checks."""

import math

import numpy as np
import pytest

from pecwedge.geometry import (
    PointCart,
    PointCyl,
    PointSph,
    convert,
    in_vacuum,
    make_wedge,
    to_cartesian,
    to_cylindrical,
    to_spherical,
)


class TestMakeWedge:
    def test_half_space(self):
        w = make_wedge(math.pi)
        assert w.nu == pytest.approx(1.0)
        assert w.vacuum_angle == pytest.approx(math.pi)

    def test_corner(self):
        w = make_wedge(math.pi / 2)
        assert w.nu == pytest.approx(1.5)

    def test_knife_edge_limit(self):
        assert make_wedge(1e-9).nu == pytest.approx(2.0)

    def test_mu_integer_for_half_space(self):
        w = make_wedge(math.pi)
        assert np.allclose(w.mu(np.arange(6)), np.arange(6))

    def test_angle_domain(self):
        for bad in (0.0, -0.1, 2 * math.pi, 7.0):
            with pytest.raises(ValueError):
                make_wedge(bad)


class TestConversions:
    def test_cart_to_cyl(self):
        c = to_cylindrical(PointCart(1.0, 0.0, 0.0))
        assert (c.rho, c.phi, c.z) == pytest.approx((1.0, 0.0, 0.0))

    def test_cyl_to_sph(self):
        s = to_spherical(PointCyl(1.0, math.pi / 2, 0.0))
        assert (s.r, s.theta, s.phi) == pytest.approx((1.0, math.pi / 2, math.pi / 2))

    def test_sph_pole(self):
        c = to_cartesian(PointSph(2.0, 0.0, 1.234))
        assert (c.x, c.y, c.z) == pytest.approx((0.0, 0.0, 2.0), abs=1e-15)

    def test_round_trips_random(self):
        rng = np.random.default_rng(1)
        for _ in range(10_000):
            p = PointCart(*rng.uniform(-3, 3, size=3))
            scale = max(1.0, abs(p.x), abs(p.y), abs(p.z))
            for target in (PointCyl, PointSph):
                q = to_cartesian(convert(p, target))
                assert abs(q.x - p.x) < 1e-12 * scale
                assert abs(q.y - p.y) < 1e-12 * scale
                assert abs(q.z - p.z) < 1e-12 * scale

    def test_convert_by_name(self):
        p = convert(PointCart(0.0, 2.0, 0.0), "cylindrical")
        assert isinstance(p, PointCyl)
        assert p.phi == pytest.approx(math.pi / 2)

    def test_unknown_target(self):
        with pytest.raises(ValueError):
            convert(PointCart(0, 0, 0), "polar")

    def test_invalid_point_fields(self):
        with pytest.raises(ValueError):
            PointCyl(-1.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            PointSph(1.0, 4.0, 0.0)


class TestInVacuum:
    def test_half_space_above_mirror(self):
        w = make_wedge(math.pi)
        res = in_vacuum(PointCart(0.3, 0.5, -2.0), w)
        assert res.inside
        assert res.face_distance == pytest.approx(0.5)

    def test_point_on_face_is_conductor(self):
        w = make_wedge(math.pi)
        assert not in_vacuum(PointCart(1.0, 0.0, 0.0), w).inside
        assert not in_vacuum(PointCart(-1.0, 0.0, 0.0), w).inside

    def test_point_on_edge_is_conductor(self):
        w = make_wedge(math.pi / 2)
        assert not in_vacuum(PointCart(0.0, 0.0, 1.0), w).inside

    def test_corner_wedge_deep_vacuum(self):
        # conductor is the fourth quadrant; phi = pi sits in vacuum
        w = make_wedge(math.pi / 2)
        p = PointCyl(2.0, math.pi, 0.0)
        res = in_vacuum(p, w)
        assert res.inside
        # faces at phi = 0 and phi = 3*pi/2; both perpendicular feet miss,
        # except the upper face: delta to face0 is pi (foot misses -> edge),
        # delta to face1 is pi/2 (foot grazes the edge as well)
        expected = min(2.0, 2.0 * math.sin(math.pi / 2))
        assert res.face_distance == pytest.approx(expected)
        assert not in_vacuum(PointCyl(2.0, 7 * math.pi / 4, 0.0), w).inside

    def test_face_distance_elementary_trig(self):
        w = make_wedge(math.pi / 2)
        res = in_vacuum(PointCyl(1.0, math.pi / 6, 0.0), w)
        assert res.inside
        assert res.face_distance == pytest.approx(math.sin(math.pi / 6))

    def test_rotation_invariance(self):
        rng = np.random.default_rng(2)
        for _ in range(300):
            interior = rng.uniform(0.1, 2 * math.pi - 0.1)
            shift = rng.uniform(0, 2 * math.pi)
            w0 = make_wedge(interior, 0.0)
            w1 = make_wedge(interior, shift)
            rho = rng.uniform(0.01, 3.0)
            phi = rng.uniform(0, 2 * math.pi)
            z = rng.uniform(-1, 1)
            a = in_vacuum(PointCyl(rho, phi, z), w0)
            b = in_vacuum(PointCyl(rho, (phi + shift) % (2 * math.pi), z), w1)
            assert a.inside == b.inside
            assert a.face_distance == pytest.approx(b.face_distance, abs=1e-10)
