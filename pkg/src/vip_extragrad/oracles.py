"""Independent reference implementations used by tests and the verify command.

Everything here is allowed to be slow; the point is that none of it shares
code with the solvers it cross-checks.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import qmc

from .core import FeasibleSet, VectorField, as_point, dot, norm, pnorm


def euclidean_ball_project(v) -> np.ndarray:
    """Exact projection onto the unit 2-ball: v if ||v|| <= 1 else v/||v||."""
    v = np.asarray(v, dtype=np.float64)
    n = norm(v)
    return v if n <= 1.0 else v / n


def halfspace_project(x, normal, anchor) -> np.ndarray:
    """Exact projection onto {w : <normal, w - anchor> <= 0}.

    Identity inside the halfspace; otherwise x - (<normal, x-anchor>/||normal||^2) * normal.
    """
    x = np.asarray(x, dtype=np.float64)
    normal = np.asarray(normal, dtype=np.float64)
    anchor = np.asarray(anchor, dtype=np.float64)
    n2 = dot(normal, normal)
    if n2 <= 0.0:
        raise ValueError("normal must be nonzero")
    offset = dot(normal, x - anchor)
    if offset <= 0.0:
        return x
    return x - (offset / n2) * normal


def reference_pnorm_project(v, p: float, tol: float = 1e-10) -> np.ndarray:
    """Projection onto the unit p-ball by nested bisection (p > 1).

    Solves the stationarity system y_i + mu*p*sign(y_i)|y_i|^{p-1} = v_i
    coordinate-wise (inner bisection on [0, |v_i|]) and drives the scalar
    multiplier mu >= 0 until ||y(mu)||_p = 1 (outer bisection).  mu = 0 gives
    y = v with norm > 1 and large mu gives norm < 1, so the outer bracket
    always exists; failure to bracket indicates a bug and raises.
    """
    if p <= 1:
        raise ValueError("reference projector requires p > 1")
    v = np.asarray(v, dtype=np.float64)
    if pnorm(v, p) <= 1.0:
        return v.copy()
    b = np.abs(v)

    def y_of(mu):
        lo = np.zeros_like(b)
        hi = b.copy()
        for _ in range(120):
            mid = 0.5 * (lo + hi)
            g = mid + mu * p * mid ** (p - 1.0) - b
            hi = np.where(g > 0, mid, hi)
            lo = np.where(g > 0, lo, mid)
        return 0.5 * (lo + hi)

    mu_lo, mu_hi = 0.0, 1.0
    for _ in range(200):
        if pnorm(y_of(mu_hi), p) < 1.0:
            break
        mu_hi *= 2.0
    else:
        raise RuntimeError("outer bisection failed to bracket")
    for _ in range(200):
        mu = 0.5 * (mu_lo + mu_hi)
        r = pnorm(y_of(mu), p) - 1.0
        if abs(r) <= tol:
            break
        if r > 0:
            mu_lo = mu
        else:
            mu_hi = mu
    else:
        raise RuntimeError("outer bisection did not converge")
    return np.sign(v) * y_of(mu)


def bounding_box(set_: FeasibleSet):
    """Per-coordinate extent of the set obtained from 2*dim LO calls."""
    d = set_.dim
    lo = np.empty(d)
    hi = np.empty(d)
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        lo[i] = set_.lo_oracle(e)[i]
        hi[i] = set_.lo_oracle(-e)[i]
    return lo, hi


def feasible_samples(set_: FeasibleSet, count: int, seed: int = 0) -> np.ndarray:
    """Quasi-random feasible points: a scrambled Sobol stream over the
    bounding box, rejection-filtered by the membership test.

    Gives up (returning what it has) if acceptance is too poor to reach
    ``count`` within a bounded number of draws.
    """
    lo, hi = bounding_box(set_)
    engine = qmc.Sobol(d=set_.dim, scramble=True, seed=seed)
    accepted = []
    draws = 0
    batch = max(256, 1 << int(np.ceil(np.log2(max(count, 2)))))
    while len(accepted) < count and draws < 200 * count + 4096:
        pts = lo + (hi - lo) * engine.random(batch)
        draws += batch
        for row in pts:
            if set_.contains(row):
                accepted.append(row)
                if len(accepted) == count:
                    break
    return np.array(accepted) if accepted else np.empty((0, set_.dim))


def brute_force_vi_check(x, F: VectorField, set_: FeasibleSet, samples: int,
                         seed: int = 0) -> float:
    """min over sampled feasible y of <F(x), y - x>.

    At a solution this is >= 0 up to sampling noise; a clearly negative value
    is a certified descent witness.  The sample set is the quasi-random
    stream plus every LO-oracle answer for the costs +-e_i (which includes
    all candidate extreme points a linear functional could select).
    """
    x = as_point(x, set_.dim)
    Fx = F(x)
    pts = [set_.interior_point]
    for i in range(set_.dim):
        e = np.zeros(set_.dim)
        e[i] = 1.0
        pts.append(set_.lo_oracle(e))
        pts.append(set_.lo_oracle(-e))
    sampled = feasible_samples(set_, samples, seed=seed)
    best = min(dot(Fx, y - x) for y in pts)
    if sampled.size:
        vals = (sampled - x) @ Fx
        best = min(best, float(vals.min()))
    return best
