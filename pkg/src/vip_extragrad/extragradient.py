"""Outer extragradient iterations built on feasible inexact projections.

Two methods are provided.  The constant-step method needs a step size
compatible with the operator's Lipschitz constant; the line-search method
replaces that requirement with an Armijo backtracking search followed by an
exact projection onto a separating halfspace, and converges for merely
pseudo-monotone operators.  Both perform exactly two inner projections per
outer iteration and record enough per-iteration state to re-verify the
theoretical descent inequalities after the fact.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .core import VectorField, as_point, dot, norm
from .fw import FWConfig, fw_project
from .problems import BenchmarkProblem

_DIV_GUARD = 1e-30


class FWBudgetError(RuntimeError):
    """Inner projection ran out of LO calls; carries the partial record."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class LineSearchError(RuntimeError):
    """Backtracking exceeded its budget (signals misconfiguration)."""


class VanishingOperatorError(RuntimeError):
    """Operator is numerically zero where a nonzero value is required."""


class InvariantViolation(AssertionError):
    """A per-iteration inequality from the convergence analysis failed."""


@dataclass
class EInexPMConfig:
    """Constant-step method parameters.

    The tolerance schedule multiplies a summable sequence a_k = b_{k-1} - b_k
    (b_0 = 2*b_bar, then b_bar/k or b_bar/ln(k+1)); per-iteration tolerances
    are capped strictly below gamma_bar < 1/2.  When the operator's Lipschitz
    constant L is known, convergence is guaranteed for
    alpha < sqrt(1 - 2*gamma_bar)/L.
    """

    alpha: float
    gamma_bar: float = 0.3
    a_schedule: str | Callable[[int], float] = "harmonic"
    b_bar: float = 1.0
    outer_tol: float = 1e-6
    max_outer: int = 100_000
    fw: FWConfig = field(default_factory=lambda: FWConfig(gamma=0.0))
    ref_stop_tol: Optional[float] = None

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if not (0.0 < self.gamma_bar < 0.5):
            raise ValueError("gamma_bar must lie in (0, 1/2)")
        if isinstance(self.a_schedule, str) and self.a_schedule not in ("harmonic", "log"):
            raise ValueError("a_schedule must be 'harmonic', 'log', or a callable")
        if self.b_bar <= 0:
            raise ValueError("b_bar must be positive")
        if self.outer_tol < 0:
            raise ValueError("outer_tol must be nonnegative")

    def step_size_bound(self, lipschitz: float) -> float:
        """Largest alpha with guaranteed convergence for the given L."""
        return math.sqrt(1.0 - 2.0 * self.gamma_bar) / lipschitz

    def eta_bar(self, lipschitz: float) -> float:
        return 1.0 - self.alpha ** 2 * lipschitz ** 2 - 2.0 * self.gamma_bar

    def nu_bar(self, lipschitz: float) -> float:
        g = self.gamma_bar
        return self.alpha ** 2 * (1.0 - g + self.alpha * lipschitz) ** 2 / (1.0 - g) ** 4


@dataclass
class LSConfig:
    """Line-search method parameters.

    beta_k in [beta_lo, beta_hi] scales the first projection (constant
    beta_hi unless a beta_rule is supplied); sigma, rho, backtrack drive the
    Armijo search; gamma_bar must stay below min(1 - rho, 2 - sqrt(3)) for
    the Fejer argument to hold.
    """

    beta_lo: float = 1.0
    beta_hi: float = 1.0
    beta_rule: Optional[Callable[[int], float]] = None
    sigma: float = 0.5
    rho: float = 0.5
    backtrack: float = 0.5
    gamma_bar: float = 0.2
    outer_tol: float = 1e-6
    max_outer: int = 100_000
    max_backtracks: int = 80
    fw: FWConfig = field(default_factory=lambda: FWConfig(gamma=0.0))
    ref_stop_tol: Optional[float] = None

    def __post_init__(self):
        if not (0.0 < self.beta_lo <= self.beta_hi):
            raise ValueError("need 0 < beta_lo <= beta_hi")
        for nm in ("sigma", "rho", "backtrack"):
            val = getattr(self, nm)
            if not (0.0 < val < 1.0):
                raise ValueError("%s must lie in (0, 1)" % nm)
        cap = min(1.0 - self.rho, 2.0 - math.sqrt(3.0))
        if not (0.0 < self.gamma_bar < cap):
            raise ValueError(
                "gamma_bar must lie in (0, %.6f) for rho=%.3f" % (cap, self.rho)
            )
        if self.outer_tol < 0:
            raise ValueError("outer_tol must be nonnegative")

    def beta(self, k: int) -> float:
        if self.beta_rule is None:
            return self.beta_hi
        b = float(self.beta_rule(k))
        if not (self.beta_lo <= b <= self.beta_hi):
            raise ValueError("beta_rule(%d) = %g outside [%g, %g]"
                             % (k, b, self.beta_lo, self.beta_hi))
        return b

    @property
    def gamma_k(self) -> float:
        # constant, maximal allowed inexactness; the line-search analysis
        # needs no summability of the tolerances
        return 0.999 * self.gamma_bar


@dataclass
class IterationRecord:
    """State captured at outer iteration k (x is the pre-step iterate)."""

    k: int
    x: np.ndarray
    y: np.ndarray
    x_next: np.ndarray
    gamma: float
    fw_iters_y: int
    fw_iters_x: int
    disp: float                      # ||x - y||, the stopping quantity
    step_norm: float                 # ||x_next - x||
    F_x_norm_sq: float
    beta: float                      # step used in the first projection
    dist_ref: float = math.nan
    z: Optional[np.ndarray] = None   # line-search point, when applicable
    lam: float = math.nan            # halfspace step, when applicable
    i_ls: int = -1                   # backtrack count, -1 when not applicable

    @property
    def fw_iters(self) -> int:
        return self.fw_iters_y + self.fw_iters_x

    @property
    def residual(self) -> float:
        """Displacement surrogate the stopping test uses (alias of ``disp``)."""
        return self.disp


@dataclass
class SolveTrace:
    records: List[IterationRecord]
    status: str  # "converged" | "max_outer" | "stalled"

    @property
    def outer_steps(self) -> int:
        return len(self.records)

    @property
    def fw_total(self) -> int:
        return sum(r.fw_iters for r in self.records)


def _b_value(cfg: EInexPMConfig, k: int) -> float:
    if k == 0:
        return 2.0 * cfg.b_bar
    if cfg.a_schedule == "harmonic":
        return cfg.b_bar / k
    return cfg.b_bar / math.log(k + 1.0)


def gamma_schedule(k: int, F_norm_sq: float, cfg: EInexPMConfig) -> float:
    """Per-iteration tolerance: min(0.999*gamma_bar, a_k / ||F(x^k)||^2).

    Both requirements hold by construction: gamma_k < gamma_bar and
    gamma_k * ||F(x^k)||^2 <= a_k, whose sum telescopes to b_0 - lim b_k.
    """
    if k < 1:
        raise ValueError("iterations are 1-based")
    if F_norm_sq < 0:
        raise ValueError("F_norm_sq must be nonnegative")
    if callable(cfg.a_schedule):
        a_k = float(cfg.a_schedule(k))
    else:
        a_k = _b_value(cfg, k - 1) - _b_value(cfg, k)
    g = min(0.999 * cfg.gamma_bar, a_k / max(F_norm_sq, _DIV_GUARD))
    return max(g, 0.0)


def _project(x, v, problem, fwcfg, rec_kwargs):
    res = fw_project(x, v, problem.set, fwcfg)
    if res.stopped_by == "max_iter":
        raise FWBudgetError(
            "inner projection exhausted %d LO calls (gap %.3e)"
            % (res.iterations, res.final_gap),
            record=rec_kwargs,
        )
    return res


def _dist(x, x_ref) -> float:
    return norm(x - x_ref) if x_ref is not None else math.nan


def einexpm_step(x, k, problem: BenchmarkProblem, cfg: EInexPMConfig, x_ref=None):
    """One constant-step update: two inexact projections sharing tolerance gamma_k."""
    F = problem.F
    Fx = F(x)
    fns = dot(Fx, Fx)
    g = gamma_schedule(k, fns, cfg)
    fwcfg = cfg.fw.replace(gamma=g, start=None)
    partial = dict(k=k, x=x, gamma=g)
    ry = _project(x, x - cfg.alpha * Fx, problem, fwcfg, partial)
    y = ry.w
    Fy = F(y)
    partial["y"] = y
    rx = _project(x, x - cfg.alpha * Fy, problem, fwcfg, partial)
    x_next = rx.w
    rec = IterationRecord(
        k=k, x=x, y=y, x_next=x_next, gamma=g,
        fw_iters_y=ry.iterations, fw_iters_x=rx.iterations,
        disp=norm(x - y), step_norm=norm(x_next - x),
        F_x_norm_sq=fns, beta=cfg.alpha, dist_ref=_dist(x, x_ref),
    )
    return x_next, rec


def einexpm_solve(problem: BenchmarkProblem, cfg: EInexPMConfig, x1=None, x_ref=None):
    """Run the constant-step method until ||x^k - y^k|| <= outer_tol.

    Returns (x, trace).  Non-convergence within max_outer is reported as
    trace.status == "max_outer", not raised.  outer_tol = 0 asks for literal
    fixed-point detection, which is meaningful in floating point because the
    inner solver returns its start point unchanged once the start already
    certifies (so y == x bitwise at near-solutions).  When cfg.ref_stop_tol
    is set and a reference point is available, iteration stops as soon as
    the iterate is within that distance of the reference (benchmark-table
    mode, checked before each step).
    """
    x = as_point(problem.x_start if x1 is None else x1, problem.set.dim)
    if not problem.set.contains(x, 1e-10):
        raise ValueError("starting point is infeasible")
    if x_ref is None:
        x_ref = problem.x_ref
    if problem.lipschitz:
        bound = cfg.step_size_bound(problem.lipschitz)
        if cfg.alpha >= bound:
            warnings.warn(
                "alpha=%g is outside the guaranteed range (< %g for L=%g); "
                "the method may still converge" % (cfg.alpha, bound, problem.lipschitz),
                RuntimeWarning, stacklevel=2,
            )
    records: List[IterationRecord] = []
    status = "max_outer"
    for k in range(1, cfg.max_outer + 1):
        if (cfg.ref_stop_tol is not None and x_ref is not None
                and norm(x - x_ref) <= cfg.ref_stop_tol):
            status = "converged"
            break
        x_next, rec = einexpm_step(x, k, problem, cfg, x_ref)
        records.append(rec)
        if rec.disp <= cfg.outer_tol:
            status = "converged"
            x = x_next
            break
        if rec.step_norm == 0.0:
            # deterministic fixed point with the stopping test still open:
            # further iterations would repeat verbatim
            status = "stalled"
            x = x_next
            break
        x = x_next
    return x, SolveTrace(records=records, status=status)


def armijo_search(x, y, F: VectorField, cfg: LSConfig):
    """Smallest i >= 0 with <F(x + sigma*backtrack^i*(y-x)), y-x> <= rho*<F(x), y-x>.

    Finite by continuity whenever y came from a valid inexact projection with
    ||y - x|| > 0; exceeding max_backtracks therefore signals a
    misconfiguration and raises.
    """
    d = y - x
    rhs = cfg.rho * dot(F(x), d)
    t = cfg.sigma
    for i in range(cfg.max_backtracks + 1):
        z = x + t * d
        if dot(F(z), d) <= rhs:
            return i, z
        t *= cfg.backtrack
    raise LineSearchError(
        "no acceptable step after %d backtracks" % cfg.max_backtracks
    )


def halfspace_stepsize(x, z, Fz) -> float:
    """lambda = -<F(z), z-x>/||F(z)||^2; x - lambda*F(z) is the exact
    projection of x onto {w : <F(z), w-z> <= 0} whenever x is outside it."""
    n = norm(Fz)
    if n <= 1e-300:
        raise VanishingOperatorError(
            "operator vanishes at the line-search point (solution candidate)"
        )
    return -dot(Fz, z - x) / (n * n)


def einexpmls_step(x, k, problem: BenchmarkProblem, cfg: LSConfig, x_ref=None):
    """One line-search update.

    Returns (x_next, record, done) where done is True when the iteration
    detected a solution: displacement below outer_tol, a vanishing operator
    at the line-search point, or the current iterate already inside the
    separating halfspace (which only happens at solutions).
    """
    F = problem.F
    beta = cfg.beta(k)
    g = cfg.gamma_k
    Fx = F(x)
    fns = dot(Fx, Fx)
    fwcfg = cfg.fw.replace(gamma=g, start=None)
    ry = _project(x, x - beta * Fx, problem, fwcfg, dict(k=k, x=x, gamma=g))
    y = ry.w
    disp = norm(x - y)

    def rec(x_next, fw_x, z=None, lam=math.nan, i_ls=-1):
        return IterationRecord(
            k=k, x=x, y=y, x_next=x_next, gamma=g,
            fw_iters_y=ry.iterations, fw_iters_x=fw_x,
            disp=disp, step_norm=norm(x_next - x), F_x_norm_sq=fns,
            beta=beta, dist_ref=_dist(x, x_ref), z=z, lam=lam, i_ls=i_ls,
        )

    if disp <= cfg.outer_tol:
        return x, rec(x, 0), True
    i_ls, z = armijo_search(x, y, F, cfg)
    Fz = F(z)
    if norm(Fz) <= 1e-300:
        # F(z) = 0 certifies z itself as a solution
        return z, rec(z, 0, z=z, i_ls=i_ls), True
    hsp = dot(Fz, z - x)
    if hsp >= 0.0:
        # x lies in the separating halfspace, possible only at solutions
        return x, rec(x, 0, z=z, i_ls=i_ls), True
    lam = -hsp / dot(Fz, Fz)
    rx = _project(x, x - lam * Fz, problem, fwcfg, dict(k=k, x=x, y=y, z=z, gamma=g))
    x_next = rx.w
    return x_next, rec(x_next, rx.iterations, z=z, lam=lam, i_ls=i_ls), False


def einexpmls_solve(problem: BenchmarkProblem, cfg: LSConfig, x1=None, x_ref=None):
    """Run the line-search method; see einexpm_solve for the return contract."""
    x = as_point(problem.x_start if x1 is None else x1, problem.set.dim)
    if not problem.set.contains(x, 1e-10):
        raise ValueError("starting point is infeasible")
    if x_ref is None:
        x_ref = problem.x_ref
    records: List[IterationRecord] = []
    status = "max_outer"
    for k in range(1, cfg.max_outer + 1):
        if (cfg.ref_stop_tol is not None and x_ref is not None
                and norm(x - x_ref) <= cfg.ref_stop_tol):
            status = "converged"
            break
        x_next, rec, done = einexpmls_step(x, k, problem, cfg, x_ref)
        records.append(rec)
        if done:
            status = "converged"
            x = x_next
            break
        if rec.step_norm == 0.0:
            status = "stalled"
            x = x_next
            break
        x = x_next
    return x, SolveTrace(records=records, status=status)


# ---------------------------------------------------------------------------
# post-hoc verification of the per-iteration inequalities
# ---------------------------------------------------------------------------

def empirical_lipschitz(trace: SolveTrace, problem: BenchmarkProblem) -> float:
    """Largest ||F(a)-F(b)||/||a-b|| over the point pairs an executed trace
    actually used; a valid Lipschitz constant for re-checking the descent
    inequalities of that run."""
    F = problem.F
    best = 0.0
    for r in trace.records:
        for a, b in ((r.x, r.y), (r.y, r.x_next)):
            gap = norm(a - b)
            if gap > 1e-13:
                best = max(best, norm(F(a) - F(b)) / gap)
    return best


def check_step_bounds(trace: SolveTrace, problem: BenchmarkProblem, slack: float = 1e-8):
    """Displacement bounds ||y-x|| <= step*||F(x)||/(1-gamma) and
    ||x_next-x|| <= step*||F(at)||/(1-gamma) for every iteration."""
    F = problem.F
    for r in trace.records:
        lhs1 = r.disp
        rhs1 = r.beta * math.sqrt(r.F_x_norm_sq) / (1.0 - r.gamma)
        if lhs1 > rhs1 + slack:
            raise InvariantViolation(
                "k=%d: ||y-x||=%.12g exceeds %.12g" % (r.k, lhs1, rhs1))
        if math.isnan(r.lam):
            if r.step_norm == 0.0 and r.z is None and r.fw_iters_x == 0:
                continue  # terminal record without a second projection
            step, at = r.beta, r.y
        else:
            step, at = r.lam, r.z
        rhs2 = step * norm(F(at)) / (1.0 - r.gamma)
        if r.step_norm > rhs2 + slack:
            raise InvariantViolation(
                "k=%d: ||x+-x||=%.12g exceeds %.12g" % (r.k, r.step_norm, rhs2))


def check_quasi_fejer(trace: SolveTrace, problem: BenchmarkProblem,
                      cfg: EInexPMConfig, x_ref, lipschitz: Optional[float] = None,
                      slack: float = 1e-8):
    """Constant-step descent inequality toward a known solution:

        ||x_next - x*||^2 <= ||x - x*||^2 - eta*||x-y||^2 + nu*gamma_k*||F(x)||^2

    with eta, nu computed from gamma_bar and a Lipschitz constant valid on
    the trajectory (the problem's, or the empirical one from the trace).
    """
    if lipschitz is None:
        lipschitz = problem.lipschitz or empirical_lipschitz(trace, problem)
    eta = cfg.eta_bar(lipschitz)
    nu = cfg.nu_bar(lipschitz)
    x_ref = as_point(x_ref, problem.set.dim)
    for r in trace.records:
        lhs = norm(r.x_next - x_ref) ** 2
        rhs = (norm(r.x - x_ref) ** 2 - eta * r.disp ** 2
               + nu * r.gamma * r.F_x_norm_sq)
        if lhs > rhs + slack:
            raise InvariantViolation(
                "k=%d: quasi-Fejer violated: %.12g > %.12g" % (r.k, lhs, rhs))


def check_fejer_ls(trace: SolveTrace, problem: BenchmarkProblem, cfg: LSConfig,
                   x_ref, slack: float = 1e-8):
    """Line-search descent toward a known solution: plain distance monotonicity
    and the quantified decrease with constant (g^2-4g+1)/(1-g)^2."""
    g = cfg.gamma_bar
    c = (g * g - 4.0 * g + 1.0) / (1.0 - g) ** 2
    F = problem.F
    x_ref = as_point(x_ref, problem.set.dim)
    for r in trace.records:
        d0 = norm(r.x - x_ref)
        d1 = norm(r.x_next - x_ref)
        if d1 > d0 + slack:
            raise InvariantViolation(
                "k=%d: distance to reference grew: %.12g > %.12g" % (r.k, d1, d0))
        if not math.isnan(r.lam):
            rhs = d0 ** 2 - c * r.lam ** 2 * norm(F(r.z)) ** 2
            if d1 ** 2 > rhs + slack:
                raise InvariantViolation(
                    "k=%d: quantified decrease violated: %.12g > %.12g"
                    % (r.k, d1 ** 2, rhs))


def check_armijo_lower_bound(trace: SolveTrace, problem: BenchmarkProblem,
                             cfg: LSConfig, slack: float = 1e-8):
    """<F(x), x-y> >= max(rho, sqrt(3)-1)/beta_hi * ||y-x||^2 per iteration."""
    coef = max(cfg.rho, math.sqrt(3.0) - 1.0) / cfg.beta_hi
    F = problem.F
    for r in trace.records:
        lhs = dot(F(r.x), r.x - r.y)
        rhs = coef * r.disp ** 2
        if lhs < rhs - slack:
            raise InvariantViolation(
                "k=%d: search-direction bound violated: %.12g < %.12g"
                % (r.k, lhs, rhs))


def check_tolerance_summability(trace: SolveTrace, cfg: EInexPMConfig,
                                slack: float = 1e-12):
    """sum_k gamma_k*||F(x^k)||^2 stays below the telescoped budget sum_k a_k."""
    total = sum(r.gamma * r.F_x_norm_sq for r in trace.records)
    if callable(cfg.a_schedule):
        budget = sum(float(cfg.a_schedule(r.k)) for r in trace.records)
    else:
        last = max(r.k for r in trace.records) if trace.records else 0
        budget = _b_value(cfg, 0) - _b_value(cfg, last)
    if total > budget + slack:
        raise InvariantViolation(
            "tolerance budget exceeded: %.12g > %.12g" % (total, budget))
