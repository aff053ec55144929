import numpy as np
import pytest
from numpy.testing import assert_allclose

from vip_extragrad import (
    FWConfig,
    PNormBall,
    check_certificate,
    dot,
    fw_project,
    fw_step,
    lo_gap,
    norm,
    pnorm,
)
from vip_extragrad.fw import STOPPED_BY
from vip_extragrad.core import FeasibleSet

from conftest import random_feasible, random_exterior


class TestLoGap:
    def test_zero_cost_at_target(self):
        ball = PNormBall(2, 2.0)
        w = np.array([0.3, -0.2])
        z, s = lo_gap(w, w, ball)
        assert s == 0.0

    def test_euclidean_ball_gap(self):
        ball = PNormBall(2, 2.0)
        z, s = lo_gap(np.zeros(2), np.array([2.0, 0.0]), ball)
        assert_allclose(z, [1.0, 0.0], atol=1e-14)
        assert_allclose(s, -2.0, rtol=1e-14)

    def test_ten_ball_dual_point(self):
        # LO for cost -(1,1) on the 10-ball: dual-norm extreme point with q = 10/9
        ball = PNormBall(2, 10.0)
        z, s = lo_gap(np.zeros(2), np.array([1.0, 1.0]), ball)
        q = 10.0 / 9.0
        expected = 1.0 / (2.0 ** ((q - 1.0) / q))
        assert_allclose(z, [expected, expected], rtol=1e-13)
        # cross-check by dense boundary sampling
        best = min(
            dot(np.array([-1.0, -1.0]), b)
            for b in (np.array([np.cos(t), np.sin(t)]) / pnorm([np.cos(t), np.sin(t)], 10)
                      for t in np.linspace(0, 2 * np.pi, 20001))
        )
        assert dot(np.array([-1.0, -1.0]), z) <= best + 1e-8

    def test_gap_nonnegative(self, rng):
        for p in (2.0, 10.0):
            ball = PNormBall(3, p)
            for _ in range(50):
                w = random_feasible(ball, rng)
                v = rng.standard_normal(3) * 2
                _, s = lo_gap(w, v, ball)
                assert s <= 1e-12


class TestFwStep:
    def test_clamp_at_one(self):
        w = np.array([0.0, 0.0])
        z = np.array([1.0, 0.0])
        out = fw_step(w, z, -dot(z - w, z - w))
        assert_allclose(out, z)

    def test_interior_step(self):
        out = fw_step(np.zeros(2), np.array([1.0, 0.0]), -0.5)
        assert_allclose(out, [0.5, 0.0])

    def test_zero_direction_raises(self):
        with pytest.raises(RuntimeError):
            fw_step(np.zeros(2), np.zeros(2), -1.0)

    def test_matches_grid_line_search(self, rng):
        # the closed-form step equals the exact minimizer of ||w + a(z-w) - v||^2
        for _ in range(100):
            w = rng.standard_normal(3)
            z = rng.standard_normal(3)
            v = rng.standard_normal(3)
            if norm(z - w) < 1e-8:
                continue
            s = dot(w - v, z - w)
            if s >= 0:
                continue
            out = fw_step(w, z, s)
            grid = np.linspace(0.0, 1.0, 1_000_001)
            vals = np.linalg.norm(w[None] + grid[:, None] * (z - w)[None] - v[None], axis=1)
            a_best = grid[np.argmin(vals)]
            a_used = norm(out - w) / norm(z - w)
            assert abs(a_used - a_best) <= 2e-6


class TestFwProject:
    def test_feasible_target_is_fixed_point(self):
        ball = PNormBall(2, 2.0)
        v = np.array([0.3, 0.1])
        res = fw_project(v, v, ball, FWConfig(gamma=0.1))
        assert res.iterations <= 1
        assert_allclose(res.w, v)

    def test_near_exact_matches_closed_form(self):
        ball = PNormBall(2, 2.0)
        res = fw_project([0.0, 1.0], [2.0, 0.0], ball,
                         FWConfig(gamma=0.0, abs_gap_floor=1e-12))
        assert_allclose(res.w, [1.0, 0.0], atol=1e-5)
        assert res.stopped_by in ("relative", "absolute")

    def test_loose_gamma_needs_fewer_lo_calls(self):
        ball = PNormBall(2, 2.0)
        tight = fw_project([0.0, 1.0], [2.0, 0.0], ball,
                           FWConfig(gamma=0.0, abs_gap_floor=1e-12))
        loose = fw_project([0.0, 1.0], [2.0, 0.0], ball, FWConfig(gamma=0.4))
        assert loose.iterations < tight.iterations
        assert check_certificate(loose.w, [0.0, 1.0], [2.0, 0.0], 0.4, ball).valid()

    def test_max_iter_flagged_not_raised(self):
        ball = PNormBall(2, 10.0)
        res = fw_project([0.0, 1.0], [2.0, 0.0], ball,
                         FWConfig(gamma=0.0, abs_gap_floor=0.0, max_iter=3))
        assert res.stopped_by == "max_iter"
        assert res.iterations == 3

    def test_relative_stop_invariant(self, rng):
        ball = PNormBall(3, 10.0)
        for _ in range(50):
            u = random_feasible(ball, rng)
            v = rng.standard_normal(3)
            res = fw_project(u, v, ball, FWConfig(gamma=0.2))
            if res.stopped_by == "relative":
                assert res.final_gap <= 0.2 * dot(res.w - u, res.w - u) + 1e-15

    def test_iterates_feasible_and_objective_decreases(self, rng):
        # replay the loop manually to watch psi monotonicity
        ball = PNormBall(2, 10.0)
        for _ in range(20):
            u = random_feasible(ball, rng)
            v = random_exterior(ball, rng)
            w = u.copy()
            prev = norm(w - v)
            for _ in range(200):
                z, s = lo_gap(w, v, ball)
                if -s <= 1e-10:
                    break
                w = fw_step(w, z, s)
                assert ball.contains(w, 1e-12)
                cur = norm(w - v)
                assert cur <= prev + 1e-12
                prev = cur

    def test_certificates_valid_across_sets_and_gammas(self, rng):
        for p in (2.0, 10.0, 15.0):
            for d in (2, 5):
                ball = PNormBall(d, p)
                for gamma in (0.0, 0.1, 0.4):
                    u = random_feasible(ball, rng)
                    v = u + rng.uniform(0.05, 0.5) * rng.standard_normal(d)
                    res = fw_project(u, v, ball,
                                     FWConfig(gamma=gamma, abs_gap_floor=1e-12,
                                              max_iter=1_000_000))
                    if res.stopped_by == "max_iter":
                        continue
                    assert check_certificate(res.w, u, v, gamma, ball).valid()

    def test_custom_start_point(self):
        ball = PNormBall(2, 2.0)
        start = np.array([0.5, 0.0])
        res = fw_project([0.0, 1.0], [2.0, 0.0], ball,
                         FWConfig(gamma=0.0, abs_gap_floor=1e-10, start=start))
        assert_allclose(res.w, [1.0, 0.0], atol=1e-4)


class _PurePythonBall(FeasibleSet):
    """PNormBall clone without the compiled fast path (exercises the generic loop)."""

    def __init__(self, dim, p):
        self._inner = PNormBall(dim, p)
        self.dim = dim
        self.interior_point = np.zeros(dim)

    def lo_oracle(self, cost):
        return self._inner.lo_oracle(cost)

    def feasibility_gap(self, x):
        return self._inner.feasibility_gap(x)


class TestGenericVsKernelPath:
    def test_paths_agree(self, rng):
        for p in (2.0, 10.0):
            fast = PNormBall(3, p)
            slow = _PurePythonBall(3, p)
            for _ in range(25):
                u = random_feasible(fast, rng)
                v = rng.standard_normal(3) * 1.5
                cfg = FWConfig(gamma=0.1, abs_gap_floor=1e-12, max_iter=100_000)
                a = fw_project(u, v, fast, cfg)
                b = fw_project(u, v, slow, cfg)
                assert a.stopped_by == b.stopped_by
                assert abs(a.iterations - b.iterations) <= 1
                assert_allclose(a.w, b.w, atol=1e-9)

    def test_stop_code_mapping_complete(self):
        assert set(STOPPED_BY.values()) == {"relative", "absolute", "max_iter"}
