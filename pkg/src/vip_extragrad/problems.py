"""Benchmark operators and feasible sets with closed-form LO oracles.

Ships the unit p-norm ball (the constraint set of all bundled benchmarks),
an axis-aligned box used in tests, and three operators: an affine
saddle-type map, a non-Lipschitz map, and a parametric family
vanishing at a known interior point.  A registry maps name strings to
ready-to-solve problem instances.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .core import FeasibleSet, VectorField, as_point, norm, pnorm


class OperatorDomainError(RuntimeError):
    """Operator evaluated outside its intended domain (fail loudly)."""


def pnorm_ball_lo(c, p: float) -> np.ndarray:
    """argmin of <c, y> over the unit p-ball, achieving value -||c||_q.

    For p > 1 the minimizer is the dual-norm extreme point
    y_i = -sign(c_i)|c_i|^{q-1}/||c||_q^{q-1} with 1/p + 1/q = 1; for p = 1 it
    is the vertex -sign(c_j) e_j at the smallest index attaining max |c_j|.
    Zero cost returns the origin so the oracle stays deterministic.
    """
    if p < 1:
        raise ValueError("pnorm_ball_lo requires p >= 1, got %g" % p)
    c = np.asarray(c, dtype=np.float64)
    a = np.abs(c)
    m = float(a.max()) if a.size else 0.0
    if m == 0.0:
        return np.zeros_like(c)
    if p == 1.0:
        j = int(np.argmax(a))
        y = np.zeros_like(c)
        y[j] = -1.0 if c[j] > 0 else 1.0
        return y
    q = p / (p - 1.0)
    t = (a / m) ** (q - 1.0)
    denom = float(np.sum((a / m) ** q)) ** ((q - 1.0) / q)
    return -np.sign(c) * t / denom


class PNormBall(FeasibleSet):
    """Unit ball of the p-norm, B_p = {x : (sum |x_i|^p)^{1/p} <= 1}, p >= 1.

    The membership test uses |x_i|^p (the standard p-norm); for odd integer p
    the signless variant would not even be convex.
    """

    def __init__(self, dim: int, p: float):
        if dim <= 0:
            raise ValueError("dim must be positive")
        if p < 1:
            raise ValueError("p must be >= 1")
        self.dim = int(dim)
        self.p = float(p)
        self.interior_point = np.zeros(self.dim)

    def lo_oracle(self, cost) -> np.ndarray:
        return pnorm_ball_lo(as_point(cost, self.dim), self.p)

    def feasibility_gap(self, x) -> float:
        return pnorm(x, self.p) - 1.0

    def _fast_inexact_project(self, u, v, w0, gamma, floor, max_iter):
        if not _kernels.HAVE_NUMBA:
            return None
        return _kernels.fw_project_pball(u, v, w0, self.p, gamma, floor, int(max_iter))

    def __repr__(self):
        return "PNormBall(dim=%d, p=%g)" % (self.dim, self.p)


class Box(FeasibleSet):
    """Axis-aligned box [lo, hi]^d; LO oracle picks the cheapest corner."""

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=np.float64)
        self.hi = np.asarray(hi, dtype=np.float64)
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1:
            raise ValueError("lo/hi must be equal-length vectors")
        if np.any(self.lo > self.hi):
            raise ValueError("requires lo <= hi")
        self.dim = self.lo.shape[0]
        self.interior_point = 0.5 * (self.lo + self.hi)

    def lo_oracle(self, cost) -> np.ndarray:
        c = as_point(cost, self.dim)
        # ties (c_i == 0) resolve toward the interior point for determinism
        y = np.where(c > 0, self.lo, np.where(c < 0, self.hi, self.interior_point))
        return y.astype(np.float64)

    def feasibility_gap(self, x) -> float:
        x = as_point(x, self.dim)
        return float(np.max(np.maximum(self.lo - x, x - self.hi)))


@dataclass
class BenchmarkProblem:
    """A named VIP instance with whatever side information is known about it.

    ``monotonicity_class`` is informational metadata; solvers never branch on
    it (the theory's assumptions are the user's responsibility).
    """

    name: str
    F: VectorField
    set: FeasibleSet
    x_start: np.ndarray
    x_ref: Optional[np.ndarray] = None
    lipschitz: Optional[float] = None
    monotonicity_class: str = "monotone"

    def __post_init__(self):
        self.x_start = as_point(self.x_start, self.set.dim)
        if self.x_ref is not None:
            self.x_ref = as_point(self.x_ref, self.set.dim)


def linear_saddle_operator() -> BenchmarkProblem:
    """Affine operator A x + b with A = [[-1,-1],[1,-1]] on the 10-norm ball.

    A has spectral norm sqrt(2) (A^T A = 2 I), so the operator is Lipschitz
    with L = sqrt(2); <A u, u> = -||u||^2 for every u.
    """
    A = np.array([[-1.0, -1.0], [1.0, -1.0]])
    b = np.array([1.5, 0.5])
    F = VectorField(2, lambda x: A @ x + b, name="linear-saddle")
    return BenchmarkProblem(
        name="linear-saddle",
        F=F,
        set=PNormBall(2, 10.0),
        x_start=np.array([0.0, 1.0]),
        lipschitz=np.sqrt(2.0),
        monotonicity_class="monotone",
    )


def _nonlipschitz_eval(x):
    # radicand clamped at 0: x1^2 + 4 x2 < 0 happens on part of the ball where
    # the formula is undefined; on B^2_10 we also have t >= -1/2, so 1 + t > 0
    t = 0.5 * (x[0] + np.sqrt(max(x[0] * x[0] + 4.0 * x[1], 0.0)))
    s = -t / (1.0 + t)
    return np.array([s, s])


def nonlipschitz_operator() -> BenchmarkProblem:
    """Quasimonotone, non-Lipschitz operator on the 10-norm ball.

    Its unique solution is (1,1)/||(1,1)||_10 = 2^{-1/10} (1,1).
    """
    F = VectorField(2, _nonlipschitz_eval, name="non-lipschitz")
    x_ref = np.array([1.0, 1.0]) / 2.0 ** 0.1
    return BenchmarkProblem(
        name="non-lipschitz",
        F=F,
        set=PNormBall(2, 10.0),
        x_start=np.array([0.0, 1.0]),
        x_ref=x_ref,
        monotonicity_class="quasimonotone",
    )


def th_reference_point(d: int, p: float, h: float) -> np.ndarray:
    """Known solution of the d-dimensional benchmark on the p-ball.

    The operator vanishes at a*e with a = sqrt(2/(d h)).  If that point is in
    the ball it solves the problem (interior zero).  Otherwise the solution is
    b*e with b = d^{-1/p}: by permutation symmetry the Euclidean projection of
    a*e onto the ball is the symmetric boundary point b*e, and since b < a the
    operator there is a negative multiple of e, which lies in -N(b*e) (the
    outward normal at b*e is proportional to e), so b*e satisfies the
    variational inequality.
    """
    a = np.sqrt(2.0 / (d * h))
    e = np.ones(d)
    if pnorm(a * e, p) <= 1.0:
        return a * e
    return d ** (-1.0 / p) * e


def th_operator(d: int, p: float, h: float) -> BenchmarkProblem:
    """Parametric operator family on B^d_p, 0.1 <= h <= 1.6.

    Coordinate i evaluates to (h x_i S - h Q / 2 - 1) / S^2 with S = sum x_j
    and Q = sum x_j^2.  Evaluation raises when |S| < 1e-12 rather than
    returning garbage; the bundled start (0,...,0,1) keeps S > 0 along the
    solver trajectories.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    if not (0.1 <= h <= 1.6):
        raise ValueError("h must lie in [0.1, 1.6]")
    if p < 1:
        raise ValueError("p must be >= 1")

    def eval_th(x):
        s = float(np.sum(x))
        if abs(s) < 1e-12:
            raise OperatorDomainError(
                "operator undefined near sum(x) = 0 (got %.3e)" % s
            )
        q = float(np.dot(x, x))
        return (h * x * s - 0.5 * h * q - 1.0) / (s * s)

    name = "th:d=%d,p=%g,h=%g" % (d, p, h)
    F = VectorField(d, eval_th, name=name)
    start = np.zeros(d)
    start[-1] = 1.0
    return BenchmarkProblem(
        name=name,
        F=F,
        set=PNormBall(d, float(p)),
        x_start=start,
        x_ref=th_reference_point(d, float(p), float(h)),
        monotonicity_class="pseudo-monotone-wrt-solutions",
    )


def zero_operator(dim: int = 2, p: float = 2.0) -> BenchmarkProblem:
    """F = 0 on a p-ball; every feasible point is a solution."""
    F = VectorField(dim, lambda x: np.zeros_like(x), name="zero")
    start = np.zeros(dim)
    start[0] = 0.5
    return BenchmarkProblem(
        name="zero",
        F=F,
        set=PNormBall(dim, p),
        x_start=start,
        x_ref=start.copy(),
        lipschitz=0.0,
        monotonicity_class="monotone",
    )


_TH_PATTERN = re.compile(r"^th:d=(\d+),p=([0-9.]+),h=([0-9.]+)$")


def get_problem(name: str) -> BenchmarkProblem:
    """Look up a problem by name.

    Known names: "linear-saddle", "non-lipschitz", "zero", and the family
    "th:d=<d>,p=<p>,h=<h>".
    """
    if name == "linear-saddle":
        return linear_saddle_operator()
    if name == "non-lipschitz":
        return nonlipschitz_operator()
    if name == "zero":
        return zero_operator()
    m = _TH_PATTERN.match(name)
    if m:
        return th_operator(int(m.group(1)), float(m.group(2)), float(m.group(3)))
    raise KeyError("unknown problem %r" % name)


def compute_reference_solution(problem: BenchmarkProblem, outer_tol: float = 1e-7,
                               max_outer: int = 100_000):
    """High-accuracy fallback reference: line-search solve with near-exact projections.

    The inner gap floor is matched to the outer tolerance (a floor f lets the
    measured displacement fluctuate by about sqrt(2 f), so the stopping test
    would never fire below that).  Slow; used to cross-validate closed-form
    reference points, not in the benchmark path.
    """
    from . import extragradient as eg
    from .fw import FWConfig

    floor = min(1e-14, (0.25 * outer_tol) ** 2)
    cfg = eg.LSConfig(gamma_bar=1e-6, outer_tol=outer_tol, max_outer=max_outer,
                      fw=FWConfig(gamma=0.0, abs_gap_floor=floor))
    x, trace = eg.einexpmls_solve(problem, cfg)
    if trace.status != "converged":
        raise RuntimeError("reference solve did not converge: %s" % trace.status)
    return x
