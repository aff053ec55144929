"""Frank-Wolfe inner solver producing feasible inexact projections.

Given a reference point u in C and an arbitrary v, the solver returns a
feasible w whose worst-case violation of the projection inequality
<v-w, y-w> <= gamma*||w-u||^2 is nonpositive up to the configured gap floor.
With gamma = 0 and a tight floor it doubles as a near-exact projector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import _kernels
from .core import FeasibleSet, as_point, dot

STOPPED_BY = {
    _kernels.STOP_RELATIVE: "relative",
    _kernels.STOP_ABSOLUTE: "absolute",
    _kernels.STOP_MAX_ITER: "max_iter",
}


@dataclass
class FWConfig:
    """Inner-loop parameters.

    gamma is the relative tolerance of the projection inequality;
    abs_gap_floor is an absolute stop on the FW gap so the gamma = 0 mode
    terminates from a cold start (the relative test alone never fires when
    the loop starts at w_0 = u).
    """

    gamma: float
    abs_gap_floor: float = 1e-12
    max_iter: int = 10_000_000
    start: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.abs_gap_floor < 0:
            raise ValueError("abs_gap_floor must be nonnegative")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")

    def replace(self, **kw) -> "FWConfig":
        d = dict(gamma=self.gamma, abs_gap_floor=self.abs_gap_floor,
                 max_iter=self.max_iter, start=self.start)
        d.update(kw)
        return FWConfig(**d)


@dataclass
class FWResult:
    w: np.ndarray
    iterations: int          # number of LO-oracle calls
    final_gap: float         # -s* at exit
    stopped_by: str          # "relative" | "absolute" | "max_iter"


def lo_gap(w, v, set_: FeasibleSet) -> Tuple[np.ndarray, float]:
    """One LO call: minimizer z of <w-v, y> over the set and s* = <w-v, z-w>.

    s* is always <= 0; -s* is the duality gap of the projection subproblem
    and vanishes exactly at the true projection.
    """
    w = as_point(w, set_.dim)
    v = as_point(v, set_.dim)
    z = set_.lo_oracle(w - v)
    return z, dot(w - v, z - w)


def fw_step(w, z, s_star: float) -> np.ndarray:
    """Exact line search step w + a*(z-w), a = min(1, -s*/||z-w||^2).

    For the quadratic distance objective this is the exact minimizer over
    [0, 1]; feasibility is preserved by convexity.
    """
    d = z - w
    dd = dot(d, d)
    if dd <= 0.0:
        raise RuntimeError("frank-wolfe direction collapsed with s* = %g" % s_star)
    a = min(1.0, -s_star / dd)
    return w + a * d


def fw_project(u, v, set_: FeasibleSet, cfg: FWConfig) -> FWResult:
    """Feasible inexact projection of v onto the set relative to u.

    Loops lo_gap/fw_step from cfg.start (default u) until
    -s* <= max(gamma*||w-u||^2, abs_gap_floor) or the LO budget is spent.
    The returned point always satisfies the certificate checked by
    :func:`vip_extragrad.core.check_certificate` at tolerance abs_gap_floor.
    Budget exhaustion is reported through ``stopped_by``, not raised.
    """
    u = as_point(u, set_.dim)
    v = as_point(v, set_.dim)
    w0 = u if cfg.start is None else as_point(cfg.start, set_.dim)

    fast = getattr(set_, "_fast_inexact_project", None)
    if fast is not None:
        out = fast(u, v, w0, cfg.gamma, cfg.abs_gap_floor, cfg.max_iter)
        if out is not None:
            w, iters, gap, code = out
            if code == _kernels.STOP_DEGENERATE:
                raise RuntimeError("frank-wolfe direction collapsed with positive gap")
            return FWResult(w=w, iterations=iters, final_gap=gap, stopped_by=STOPPED_BY[code])

    w = w0.copy()
    gap = 0.0
    iters = 0
    stopped = "max_iter"
    for _ in range(cfg.max_iter):
        z, s_star = lo_gap(w, v, set_)
        iters += 1
        gap = -s_star
        du = w - u
        rel = cfg.gamma * dot(du, du)
        if gap <= max(rel, cfg.abs_gap_floor):
            stopped = "relative" if gap <= rel else "absolute"
            break
        w = fw_step(w, z, s_star)
    return FWResult(w=w, iterations=iters, final_gap=gap, stopped_by=stopped)
