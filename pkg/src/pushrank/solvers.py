"""Ground-truth PageRank solvers: dense solve, power method, partial sums.

These are the oracles the push engines are validated against. The rank
vector x* solves x* = (1-m) A x* + (m/n) 1 with entries summing to 1,
equivalently x* = (I - Q)^{-1} (m/n) 1 with Q = (1-m) A.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import linalg

from .errors import NumericalFailure
from .trace import Trace

__all__ = ["DENSE_CAP", "solve_dense", "DenseOracle", "power_method",
           "neumann_partial", "check_probability_vector"]

DENSE_CAP = 5000


def check_probability_vector(v, n, what="vector"):
    v = np.asarray(v, dtype=float)
    if v.shape != (n,):
        raise ValueError(f"{what} must have length {n}")
    if np.any(v < 0):
        raise ValueError(f"{what} has negative entries")
    if abs(v.sum() - 1.0) > 1e-9:
        raise ValueError(f"{what} entries sum to {v.sum()!r}, not 1")
    return v


class DenseOracle:
    """Dense factorization of (I - Q) plus the exact rank vector.

    Precomputes an LU factorization so that per-step error and conservation
    diagnostics cost one pair of triangular solves. Only intended for
    graphs up to `dense_cap` pages.
    """

    def __init__(self, graph, m, dense_cap=DENSE_CAP):
        n = graph.n
        if n > dense_cap:
            raise ValueError(
                f"n={n} exceeds the dense oracle cap {dense_cap}; "
                "use power_method for larger graphs")
        self.n = n
        self.m = m
        i_minus_q = np.eye(n) - graph.q_matrix(m).toarray()
        self._lu = linalg.lu_factor(i_minus_q)
        self._i_minus_q = i_minus_q
        self.x_star = linalg.lu_solve(self._lu, np.full(n, m / n))
        residual = np.abs(i_minus_q @ self.x_star - m / n).sum()
        if residual > 1e-12 * n:
            raise NumericalFailure(f"dense solve residual {residual:.3e} too large")
        if abs(self.x_star.sum() - 1.0) > 1e-10:
            raise NumericalFailure(
                f"dense solve mass {self.x_star.sum()!r} deviates from 1")

    def resolvent(self, v):
        """(I - Q)^{-1} v."""
        return linalg.lu_solve(self._lu, v)

    def error_l1(self, x):
        return float(np.abs(self.x_star - x).sum())

    def conservation_defect(self, x, z):
        """L1 defect of x + (I - Q)^{-1} Q z against x*.

        Uses (I - Q)^{-1} Q = (I - Q)^{-1} - I to reuse the factorization.
        """
        return float(np.abs(x + self.resolvent(z) - z - self.x_star).sum())


def solve_dense(graph, m, dense_cap=DENSE_CAP):
    """Exact rank vector by a partial-pivoted dense solve of (I - Q) x = (m/n) 1."""
    return DenseOracle(graph, m, dense_cap=dense_cap).x_star


def power_method(graph, m, x0=None, tol=1e-12, max_steps=100_000,
                 oracle=None, cadence=1, record_x=False):
    """Power iteration x(k+1) = Q x(k) + (m/n) 1 from a probability vector.

    Stops when the L1 step difference drops to `tol` or after `max_steps`.
    Each iterate stays a probability vector; a drift beyond 1e-12 raises.
    Returns the final iterate and a trace (cert/defect columns are NaN --
    there is no residual state here; err_l1 is filled when an oracle is
    supplied).
    """
    n = graph.n
    if x0 is None:
        x = np.full(n, 1.0 / n)
    else:
        x = check_probability_vector(x0, n, "x0").copy()
    q = graph.q_matrix(m)
    teleport = m / n
    trace = Trace()

    def record(k, x):
        err = oracle.error_l1(x) if oracle is not None else math.nan
        trace.append(k, k * n, err_l1=err, x=x if record_x else None)

    record(0, x)
    k = 0
    while k < max_steps:
        x_next = q @ x + teleport
        k += 1
        drift = abs(x_next.sum() - 1.0)
        if drift > 1e-12:
            raise NumericalFailure(f"power iterate mass drift {drift:.3e} at step {k}")
        diff = float(np.abs(x_next - x).sum())
        x = x_next
        if k % cadence == 0:
            record(k, x)
        if diff <= tol:
            break
    if trace.final_step != k:
        record(k, x)
    return x, trace


def neumann_partial(graph, m, k):
    """Partial sum x(k) = sum_{t=0..k} Q^t (m/n) 1 by running accumulation.

    Never materializes matrix powers: k sparse mat-vecs, each term added as
    it is produced. The result increases entrywise with k and tends to x*
    with geometric tail (1-m)^{k+1} / m in L1.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    n = graph.n
    q = graph.q_matrix(m)
    term = np.full(n, m / n)
    acc = term.copy()
    for _ in range(k):
        term = q @ term
        acc = acc + term
    return acc
