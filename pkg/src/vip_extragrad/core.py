"""Vector arithmetic, problem abstractions, and inexact-projection certificates.

Points are plain 1-D float64 numpy arrays.  The feasible set is accessed only
through a membership test and a linear-minimization oracle (LO oracle), which
is all the inner Frank-Wolfe solver needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class DimensionMismatch(ValueError):
    """Operands live in different ambient dimensions."""


def as_point(x, dim: Optional[int] = None) -> np.ndarray:
    """Validate and convert ``x`` to a finite 1-D float64 vector.

    Raises ``ValueError`` on NaN/Inf entries and ``DimensionMismatch`` when
    ``dim`` is given and does not match.
    """
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 1:
        a = a.reshape(-1)
    if not np.all(np.isfinite(a)):
        raise ValueError("point has non-finite entries: %r" % (a,))
    if dim is not None and a.shape[0] != dim:
        raise DimensionMismatch(
            "expected dimension %d, got %d" % (dim, a.shape[0])
        )
    return a


def dot(a: np.ndarray, b: np.ndarray) -> float:
    """Euclidean inner product of two equal-length vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch("dot: shapes %s vs %s" % (a.shape, b.shape))
    return float(np.dot(a, b))


def norm(a) -> float:
    """Euclidean norm."""
    return float(np.linalg.norm(np.asarray(a, dtype=np.float64)))


def pnorm(a, p: float) -> float:
    """p-norm (sum |a_i|^p)^(1/p) for p >= 1."""
    if p < 1:
        raise ValueError("pnorm requires p >= 1, got %g" % p)
    a = np.abs(np.asarray(a, dtype=np.float64))
    if a.size == 0:
        return 0.0
    if np.isinf(p):
        return float(a.max())
    m = float(a.max())
    if m == 0.0:
        return 0.0
    # factor out the max to avoid overflow for large p
    return m * float(np.sum((a / m) ** p)) ** (1.0 / p)


class VectorField:
    """An operator F: R^d -> R^d defining the variational inequality.

    ``func`` must be deterministic and dimension preserving; both are checked
    lightly at call time.
    """

    def __init__(self, dim: int, func: Callable[[np.ndarray], np.ndarray], name: str = ""):
        if dim <= 0:
            raise ValueError("dim must be positive")
        self.dim = int(dim)
        self.func = func
        self.name = name

    def __call__(self, x: np.ndarray) -> np.ndarray:
        y = np.asarray(self.func(as_point(x, self.dim)), dtype=np.float64)
        return as_point(y, self.dim)

    def __repr__(self):
        return "VectorField(dim=%d%s)" % (self.dim, ", name=%r" % self.name if self.name else "")


class FeasibleSet:
    """Compact convex set exposed through an LO oracle and a membership test.

    Subclasses must set ``dim`` and ``interior_point`` and implement
    ``lo_oracle`` and ``feasibility_gap``.  ``contains`` applies a relative
    slack on top of an unavoidable ~1e-12 arithmetic baseline, so points
    produced by convex combinations of oracle outputs always test feasible.
    """

    dim: int
    interior_point: np.ndarray

    #: baseline arithmetic slack applied on top of any caller-supplied tol
    _arith_slack = 1e-12

    def lo_oracle(self, cost: np.ndarray) -> np.ndarray:
        """Return a minimizer of <cost, y> over the set.

        Ties (e.g. cost = 0) resolve to ``interior_point`` so iteration counts
        are reproducible.
        """
        raise NotImplementedError

    def feasibility_gap(self, x: np.ndarray) -> float:
        """Signed constraint violation; <= 0 strictly inside, 0 on the boundary."""
        raise NotImplementedError

    def contains(self, x, tol: float = 0.0) -> bool:
        x = as_point(x, self.dim)
        slack = (tol + self._arith_slack) * (1.0 + norm(x))
        return self.feasibility_gap(x) <= slack


@dataclass(frozen=True)
class ProjectionCertificate:
    """Witness that ``w`` is a feasible inexact projection of ``v`` relative to ``u``.

    ``worst_violation`` is max over the set of <v-w, y-w> - gamma*||w-u||^2,
    computed exactly through one LO call (a linear functional attains its
    maximum at an oracle answer).
    """

    w: np.ndarray
    u: np.ndarray
    v: np.ndarray
    gamma: float
    worst_violation: float
    feasible: bool = True
    reason: str = ""

    #: absolute tolerance on worst_violation below which a certificate counts as valid
    DEFAULT_TOL = 1e-9

    def valid(self, tol: float = DEFAULT_TOL) -> bool:
        return self.feasible and self.worst_violation <= tol


def check_certificate(w, u, v, gamma: float, set_: FeasibleSet) -> ProjectionCertificate:
    """Exactly certify the inexact-projection inequality for candidate ``w``.

    The inequality <v-w, y-w> <= gamma*||w-u||^2 must hold for every feasible
    y; its left side is maximized at z* = lo_oracle(-(v-w)), which makes the
    check exact rather than sampled.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    w = as_point(w, set_.dim)
    u = as_point(u, set_.dim)
    v = as_point(v, set_.dim)
    if not set_.contains(w, 1e-12):
        return ProjectionCertificate(
            w=w, u=u, v=v, gamma=gamma, worst_violation=np.inf,
            feasible=False, reason="infeasible",
        )
    z_star = set_.lo_oracle(w - v)
    du = w - u
    violation = dot(v - w, z_star - w) - gamma * dot(du, du)
    return ProjectionCertificate(w=w, u=u, v=v, gamma=gamma, worst_violation=violation)


def natural_residual(x, F: VectorField, set_: FeasibleSet, proj_tol: float = 1e-12) -> float:
    """||x - P(x - F(x))|| with P a near-exact projection (zero only at solutions).

    The projection is computed by the Frank-Wolfe inner solver in absolute
    mode (gamma = 0, gap floor ``proj_tol``).
    """
    from . import fw  # local import: fw builds on this module

    x = as_point(x, set_.dim)
    res = fw.fw_project(x, x - F(x), set_, fw.FWConfig(gamma=0.0, abs_gap_floor=proj_tol))
    return norm(x - res.w)
