import numpy as np
import pytest
from numpy.testing import assert_allclose

from vip_extragrad import FWConfig, PNormBall, dot, fw_project, get_problem, pnorm
from vip_extragrad.oracles import (
    bounding_box,
    brute_force_vi_check,
    euclidean_ball_project,
    feasible_samples,
    halfspace_project,
    reference_pnorm_project,
)

from conftest import random_exterior


class TestEuclideanBallProject:
    def test_interior_identity(self):
        v = np.array([0.3, 0.4])
        assert_allclose(euclidean_ball_project(v), v)

    def test_radial_scaling(self):
        assert_allclose(euclidean_ball_project(np.array([2.0, 0.0])), [1.0, 0.0])
        assert_allclose(euclidean_ball_project(np.array([3.0, 4.0])), [0.6, 0.8])


class TestHalfspaceProject:
    def test_identity_inside(self):
        x = np.array([-1.0, 2.0])
        out = halfspace_project(x, np.array([1.0, 0.0]), np.zeros(2))
        assert_allclose(out, x)

    def test_axis_aligned_drop(self):
        out = halfspace_project(np.array([2.0, 5.0]), np.array([1.0, 0.0]), np.zeros(2))
        assert_allclose(out, [0.0, 5.0])

    def test_zero_normal_rejected(self):
        with pytest.raises(ValueError):
            halfspace_project(np.ones(2), np.zeros(2), np.zeros(2))

    def test_kkt_conditions(self, rng):
        for _ in range(100):
            x = rng.standard_normal(4)
            n = rng.standard_normal(4)
            a = rng.standard_normal(4)
            out = halfspace_project(x, n, a)
            offset = dot(n, out - a)
            assert offset <= 1e-10
            if dot(n, x - a) > 0:
                # boundary attained and displacement parallel to the normal
                assert abs(offset) <= 1e-10 * (1 + np.linalg.norm(x))
                d = x - out
                cross = d - (dot(d, n) / dot(n, n)) * n
                assert np.linalg.norm(cross) <= 1e-10


class TestReferencePnormProject:
    def test_interior_identity(self):
        v = np.array([0.2, -0.3])
        assert_allclose(reference_pnorm_project(v, 10.0), v)

    def test_p2_matches_radial(self, rng):
        for _ in range(100):
            v = rng.standard_normal(3) * rng.uniform(0.2, 3.0)
            assert_allclose(reference_pnorm_project(v, 2.0),
                            euclidean_ball_project(v), atol=1e-8)

    def test_symmetric_point(self):
        out = reference_pnorm_project(2.0 * np.ones(2), 10.0)
        assert_allclose(out, [2.0 ** -0.1] * 2, rtol=1e-9)

    def test_requires_p_above_one(self):
        with pytest.raises(ValueError):
            reference_pnorm_project(np.ones(2), 1.0)

    def test_boundary_feasibility(self, rng):
        for p in (5.0, 10.0, 15.0):
            ball = PNormBall(3, p)
            for _ in range(20):
                v = random_exterior(ball, rng)
                y = reference_pnorm_project(v, p)
                assert abs(pnorm(y, p) - 1.0) <= 1e-9

    def test_closer_than_boundary_samples(self, rng):
        # projection optimality against random boundary candidates
        p = 10.0
        ball = PNormBall(2, p)
        for _ in range(20):
            v = random_exterior(ball, rng)
            y = reference_pnorm_project(v, p)
            best = np.linalg.norm(v - y)
            ts = np.linspace(0, 2 * np.pi, 5001)
            pts = np.stack([np.cos(ts), np.sin(ts)], axis=1)
            pts /= ((np.abs(pts) ** p).sum(axis=1) ** (1.0 / p))[:, None]
            assert best <= np.linalg.norm(pts - v, axis=1).min() + 1e-6


class TestBoundingBoxAndSampling:
    def test_pball_box(self):
        lo, hi = bounding_box(PNormBall(3, 10.0))
        assert_allclose(lo, -np.ones(3), atol=1e-12)
        assert_allclose(hi, np.ones(3), atol=1e-12)

    def test_samples_feasible_and_deterministic(self):
        ball = PNormBall(2, 10.0)
        a = feasible_samples(ball, 64, seed=5)
        b = feasible_samples(ball, 64, seed=5)
        assert a.shape == (64, 2)
        assert np.array_equal(a, b)
        assert all(ball.contains(row) for row in a)


class TestBruteForceViCheck:
    def test_zero_operator(self):
        prob = get_problem("zero")
        v = brute_force_vi_check(prob.x_start, prob.F, prob.set, 500)
        assert v == 0.0

    def test_reference_solution_passes(self):
        prob = get_problem("non-lipschitz")
        v = brute_force_vi_check(prob.x_ref, prob.F, prob.set, 10_000)
        assert v >= -1e-6

    def test_non_solution_fails(self):
        prob = get_problem("linear-saddle")
        v = brute_force_vi_check(prob.x_start, prob.F, prob.set, 2_000)
        assert v < -1e-3


class TestHalfspaceFwAgreement:
    def test_near_exact_projection_onto_capped_halfspace(self, rng):
        """FW agrees with the closed form on a halfspace whose cap is inactive.

        The compact set is {||x|| <= R} cut by a halfspace through the origin;
        for anchors and targets well inside the cap, the exact projection is
        the plain halfspace projection.
        """
        from vip_extragrad.core import FeasibleSet

        class CappedHalfspace(FeasibleSet):
            def __init__(self, normal, radius=1.0):
                self.dim = normal.shape[0]
                self.normal = normal / np.linalg.norm(normal)
                self.radius = radius
                self.interior_point = -0.5 * self.normal

            def lo_oracle(self, cost):
                c = np.asarray(cost, dtype=np.float64)
                nc = np.linalg.norm(c)
                if nc == 0.0:
                    return self.interior_point.copy()
                y = -self.radius * c / nc
                if dot(self.normal, y) <= 0.0:
                    return y
                # optimum on the cap rim: minimize <c, .> over {||y|| = R, <n, y> = 0}
                cperp = c - dot(c, self.normal) * self.normal
                ncp = np.linalg.norm(cperp)
                if ncp <= 1e-15:
                    return np.zeros(self.dim)
                return -self.radius * cperp / ncp

            def feasibility_gap(self, x):
                x = np.asarray(x, dtype=np.float64)
                return max(float(np.linalg.norm(x) - self.radius),
                           float(dot(self.normal, x)))

        for _ in range(20):
            n = rng.standard_normal(4)
            hs = CappedHalfspace(n)
            u = rng.standard_normal(4) * 0.2
            u -= dot(u, hs.normal) * hs.normal
            p = rng.standard_normal(4) * 0.2
            p -= dot(p, hs.normal) * hs.normal
            x = p + rng.uniform(0.1, 0.5) * hs.normal
            res = fw_project(u, x, hs, FWConfig(gamma=0.0, abs_gap_floor=1e-12,
                                                max_iter=200_000))
            expected = halfspace_project(x, hs.normal, np.zeros(4))
            assert np.linalg.norm(res.w - expected) <= 1e-4
