"""Group-wise engine: one chosen group absorbs its intra-group mass in
closed form, then pushes the result out in a single step.

For a partition of the pages, write Qhh for the diagonal block of
Q = (1-m) A belonging to group h. When group h updates, the limit of
repeating the set update on h forever is reached directly:

    zbar = (I - Qhh)^{-1} z_h          (local solve, group-sized)
    x   += Q[:, h] @ zbar              (push along the group's out-links)
    z   += Q[:, h] @ zbar,  then z_h = 0

Each block (I - Qhh) is nonsingular because Qhh inherits Schur stability
from Q, so the local solve always exists. Factorizations are precomputed
once per partition and shared across steps; `zbar` is transient.
"""

from __future__ import annotations

import numpy as np
from scipy import linalg

from .engines import PushState, _drive, init_state
from .errors import NumericalFailure

__all__ = ["GroupFactors", "precompute_factors", "step_group", "run_clustered",
           "DENSE_GROUP_CAP"]

DENSE_GROUP_CAP = 512
_ITER_TOL = 1e-13
_ITER_MAX = 100_000


class GroupFactors:
    """Per-group local solvers for (I - Qhh) plus each group's columns of Q.

    Groups up to `dense_cap` members get a dense LU factorization; larger
    groups fall back to the fixed-point iteration zbar <- rhs + Qhh zbar,
    which converges geometrically (Qhh is Schur stable) and avoids storing
    a possibly dense inverse.
    """

    __slots__ = ("m", "members", "block_columns", "_dense_lu", "_sparse_qhh")

    def __init__(self, graph, m, partition, dense_cap=DENSE_GROUP_CAP):
        if partition.n != graph.n:
            raise ValueError("partition and graph disagree on page count")
        q = graph.q_matrix(m)
        self.m = m
        self.members = partition.members
        self.block_columns = []
        self._dense_lu = []
        self._sparse_qhh = []
        for h, mem in enumerate(self.members):
            cols = q[:, mem]
            self.block_columns.append(cols)
            qhh = cols[mem, :]
            if mem.size <= dense_cap:
                lu, piv = linalg.lu_factor(np.eye(mem.size) - qhh.toarray())
                if np.any(np.diag(lu) == 0.0):
                    raise NumericalFailure(f"singular local block for group {h}")
                self._dense_lu.append((lu, piv))
                self._sparse_qhh.append(None)
            else:
                self._dense_lu.append(None)
                self._sparse_qhh.append(qhh.tocsc())

    @property
    def num_groups(self):
        return len(self.members)

    def solve_local(self, h, rhs):
        """zbar with (I - Qhh) zbar = rhs for group h."""
        lu = self._dense_lu[h]
        if lu is not None:
            return linalg.lu_solve(lu, rhs)
        qhh = self._sparse_qhh[h]
        zbar = rhs.copy()
        for _ in range(_ITER_MAX):
            nxt = rhs + qhh @ zbar
            diff = float(np.abs(nxt - zbar).sum())
            zbar = nxt
            if diff <= _ITER_TOL:
                return zbar
        raise NumericalFailure(f"local solve for group {h} failed to converge")


def precompute_factors(graph, m, partition, dense_cap=DENSE_GROUP_CAP):
    """Factor every group's (I - Qhh) once, ahead of the run."""
    return GroupFactors(graph, m, partition, dense_cap=dense_cap)


def step_group(state, graph, m, factors, h):
    """One update by group h: local solve, push, reset the group residual.

    Equivalent to the limit of infinitely many simultaneous set updates by
    the group's member pages; the group's own residual ends exactly zero
    (intra-group mass is fully absorbed by the local solve).
    """
    if not 0 <= h < factors.num_groups:
        raise ValueError(f"group {h} outside 0..{factors.num_groups - 1}")
    members = factors.members[h]
    zbar = factors.solve_local(h, state.z[members])
    inflow = factors.block_columns[h] @ zbar
    x = state.x + inflow
    z = state.z + inflow
    z[members] = 0.0
    return PushState(x, z, state.step + 1,
                     state.cumulative_updates + int(members.size))


def run_clustered(graph, m, partition, schedule, *, steps=None, tol=None,
                  oracle=None, cadence=1, v=None, factors=None,
                  dense_cap=DENSE_GROUP_CAP, record_x=False):
    """Drive `step_group` with one group per step drawn from `schedule`.

    The schedule draws group indices (singleton sets; an empty draw is a
    no-op step). Stop rules and tracing match `pushrank.engines.run`.
    """
    if steps is None and tol is None:
        raise ValueError("need steps and/or tol to bound the run")
    if factors is None:
        factors = precompute_factors(graph, m, partition, dense_cap=dense_cap)
    state = init_state(graph.n, m, v)

    def advance(st):
        chosen = schedule.next(st.step)
        if chosen is None:
            return None
        chosen = np.atleast_1d(np.asarray(chosen, dtype=np.intp))
        if chosen.size == 0:
            return PushState(st.x.copy(), st.z.copy(), st.step + 1,
                             st.cumulative_updates)
        if chosen.size != 1:
            raise ValueError("group schedules must draw one group per step")
        return step_group(st, graph, m, factors, int(chosen[0]))

    return _drive(state, graph, m, advance, steps, tol, oracle, cadence,
                  record_x)
