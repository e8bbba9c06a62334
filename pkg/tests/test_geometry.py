import math

import numpy as np
import pytest

from smoclust import _pure
from smoclust.core import make_rng
from smoclust.geometry import (
    HyperSphere,
    LineParam,
    gaussian_in_sphere,
    positive_intercept,
    skewed_sample,
    unit_direction,
)


def random_interior_case(rng, dim):
    centre = np.array([2.0 * rng.uniform() - 1.0 for _ in range(dim)])
    radius = 0.2 + 2.0 * rng.uniform()
    offset = unit_direction(dim, rng) * (radius * 0.95 * rng.uniform())
    origin = centre + offset
    through = origin + unit_direction(dim, rng)
    return LineParam(origin, through), HyperSphere(centre, radius)


class TestUnitDirection:
    def test_one_dimension_is_sign(self):
        rng = make_rng("dir-1d")
        values = {float(unit_direction(1, rng)[0]) for _ in range(100)}
        assert values <= {1.0, -1.0}
        assert len(values) == 2

    def test_norm_is_one(self):
        rng = make_rng("dir-norm")
        for dim in (2, 3, 7):
            for _ in range(200):
                v = unit_direction(dim, rng)
                assert abs(float(np.linalg.norm(v)) - 1.0) < 1e-12

    def test_angle_uniformity_chi_square(self):
        # 16-bin chi-square on 1e5 planar angles; reject only below p=0.001.
        rng = make_rng("dir-angles")
        bins = np.zeros(16, dtype=np.int64)
        n = 100_000
        for _ in range(n):
            v = unit_direction(2, rng)
            angle = math.atan2(v[1], v[0]) + math.pi
            bins[min(15, int(angle / (2 * math.pi) * 16))] += 1
        expected = n / 16
        chi2 = float(np.sum((bins - expected) ** 2 / expected))
        # chi2 inverse survival for df=15 at p=0.001 is 37.70
        assert chi2 < 37.70


class TestPositiveIntercept:
    def test_ray_from_centre(self):
        line = LineParam(np.zeros(2), np.array([1.0, 0.0]))
        sphere = HyperSphere(np.zeros(2), 5.0)
        assert positive_intercept(line, sphere) == pytest.approx(5.0, abs=1e-12)

    def test_hand_solved_quadratic(self):
        line = LineParam(np.array([-7.0, 0.0]), np.array([-6.0, 0.0]))
        sphere = HyperSphere(np.zeros(2), 10.0)
        assert positive_intercept(line, sphere) == pytest.approx(17.0, abs=1e-12)

    def test_substitution_identity_random(self):
        rng = make_rng("intercept-ident")
        for _ in range(300):
            dim = 1 + rng.randint(10)
            line, sphere = random_interior_case(rng, dim)
            t = positive_intercept(line, sphere)
            point = line.at(t)
            dist = float(np.linalg.norm(point - sphere.centre))
            assert abs(dist - sphere.radius) <= 1e-9 * max(1.0, sphere.radius)

    def test_root_follows_direction(self):
        rng = make_rng("intercept-sign")
        for _ in range(300):
            dim = 1 + rng.randint(6)
            line, sphere = random_interior_case(rng, dim)
            t = positive_intercept(line, sphere)
            assert t > 0.0
            move = (line.at(t) - line.origin) @ (line.through - line.origin)
            assert move >= 0.0

    def test_origin_outside_rejected(self):
        sphere = HyperSphere(np.zeros(2), 1.0)
        outside = LineParam(np.array([2.0, 0.0]), np.array([3.0, 0.0]))
        with pytest.raises(ValueError):
            positive_intercept(outside, sphere)
        on_hull = LineParam(np.array([1.0, 0.0]), np.array([3.0, 0.0]))
        with pytest.raises(ValueError):
            positive_intercept(on_hull, sphere)


class TestSkewedSample:
    def test_containment_from_centre(self):
        rng = make_rng("skew-contain")
        sphere = HyperSphere(np.zeros(3), 1.0)
        for _ in range(10_000):
            p = skewed_sample(sphere.centre, sphere, rng)
            assert float(np.linalg.norm(p)) <= 1.0 * (1.0 + 1e-12)

    def test_mode_sits_at_anchor(self):
        # Sphere centred at the origin with radius 10, anchor at (-7, 0):
        # the sample cloud must hug the anchor, not the sphere centre.
        rng = make_rng("skew-mode")
        sphere = HyperSphere(np.zeros(2), 10.0)
        anchor = np.array([-7.0, 0.0])
        pts = np.array([skewed_sample(anchor, sphere, rng) for _ in range(10_000)])
        to_anchor = np.linalg.norm(pts - anchor, axis=1).mean()
        to_centre = np.linalg.norm(pts, axis=1).mean()
        assert to_anchor < to_centre

    def test_zero_gaussian_returns_anchor(self):
        class StubRng:
            def __init__(self):
                self.dir = iter([1.0, 0.0])

            def normal(self):
                try:
                    return next(self.dir)
                except StopIteration:
                    return 0.0  # the half-Gaussian draw

        anchor = np.array([0.25, -0.5])
        out = _pure.skewed_sample(anchor, np.zeros(2), 2.0, StubRng())
        assert np.array_equal(out, anchor)

    def test_degenerate_sphere_returns_centre(self):
        rng = make_rng("skew-degenerate")
        sphere = HyperSphere(np.array([1.0, 2.0]), 0.0)
        assert np.array_equal(skewed_sample(sphere.centre, sphere, rng), sphere.centre)

    def test_determinism(self):
        sphere = HyperSphere(np.zeros(4), 2.0)
        anchor = np.array([0.3, 0.0, -0.1, 0.5])
        a = [skewed_sample(anchor, sphere, make_rng("skew-det", i)) for i in range(20)]
        b = [skewed_sample(anchor, sphere, make_rng("skew-det", i)) for i in range(20)]
        assert all(np.array_equal(x, y) for x, y in zip(a, b))


class TestGaussianInSphere:
    def test_containment(self):
        rng = make_rng("gauss-contain")
        sphere = HyperSphere(np.array([0.5, -0.5]), 0.7)
        for _ in range(10_000):
            p = gaussian_in_sphere(sphere, rng)
            assert float(np.linalg.norm(p - sphere.centre)) <= 0.7 * (1.0 + 1e-12)

    def test_one_dim_std_is_third_of_radius(self):
        rng = make_rng("gauss-std")
        sphere = HyperSphere(np.zeros(1), 3.0)
        xs = np.array([gaussian_in_sphere(sphere, rng)[0] for _ in range(100_000)])
        assert abs(float(xs.std()) - 1.0) < 0.05

    def test_two_dim_raw_acceptance_rate(self):
        # Monte-Carlo estimate of the chi-square(2) mass inside the 3-sigma
        # ball, i.e. the pre-rejection acceptance rate of the sampler.
        rng = make_rng("gauss-accept")
        inside = 0
        n = 100_000
        for _ in range(n):
            x = rng.normal() / 3.0
            y = rng.normal() / 3.0
            if x * x + y * y <= 1.0:
                inside += 1
        rate = inside / n
        assert abs(rate - 0.989) < 0.005
        assert abs(rate - (1.0 - math.exp(-4.5))) < 0.005

    def test_degenerate_sphere_returns_centre(self):
        rng = make_rng("gauss-degenerate")
        sphere = HyperSphere(np.array([3.0, 4.0]), 0.0)
        assert np.array_equal(gaussian_in_sphere(sphere, rng), sphere.centre)


class TestValueTypes:
    def test_sphere_validation(self):
        with pytest.raises(ValueError):
            HyperSphere(np.zeros(2), -1.0)
        with pytest.raises(ValueError):
            HyperSphere(np.array([np.inf, 0.0]), 1.0)

    def test_line_validation(self):
        with pytest.raises(ValueError):
            LineParam(np.zeros(2), np.zeros(2))
        with pytest.raises(ValueError):
            LineParam(np.zeros(2), np.zeros(3))
