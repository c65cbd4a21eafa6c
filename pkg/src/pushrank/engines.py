"""Two-state residual-push engines.

Every engine carries a pair of per-page vectors: ``x`` accumulates the
PageRank estimate, ``z`` holds residual mass still in flight. Both start at
(m/n) 1. A page that updates pushes (1-m)/n_j of its residual along each
of its out-links; receivers add the inflow to both x and z, and the
sender's own residual is reset. The estimate x grows entrywise and never
exceeds x*, and the residual certifies the distance to the solution:
``||x* - x||_1 = ((1-m)/m) ||z||_1`` on any patched graph.

Three step kinds share this state:

* `step_sync`  -- all pages push at once: x+ = x + Qz, z+ = Qz;
* `step_set`   -- an arbitrary set phi pushes simultaneously;
* group steps  -- see `pushrank.cluster`.

Engine instances are single-threaded and deterministic; replicas may run
concurrently on the shared immutable graph, each owning its state and
schedule stream. Inflows accumulate in ascending sender index, so a full
push over all pages reproduces the sparse mat-vec bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .solvers import check_probability_vector
from .trace import Trace

__all__ = ["PushState", "init_state", "step_sync", "step_set", "scatter_push",
           "exact_error", "run", "run_sync"]


@dataclass
class PushState:
    """Estimate/residual pair plus step and update-cost counters."""

    x: np.ndarray
    z: np.ndarray
    step: int = 0
    cumulative_updates: int = 0

    @property
    def n(self):
        return self.x.size

    def copy(self):
        return PushState(self.x.copy(), self.z.copy(), self.step,
                         self.cumulative_updates)


def init_state(n, m, v=None):
    """Fresh state x = z = (m/n) 1, or m*v for a personalization vector v."""
    if v is None:
        x = np.full(n, m / n)
    else:
        x = m * check_probability_vector(v, n, "personalization vector")
    return PushState(x, x.copy())


def scatter_push(graph, m, z, phi):
    """Inflow vector of one simultaneous push by the pages in phi.

    Entry i receives sum over j in (in-neighbors of i) ∩ phi of
    (1-m)/n_j * z_j. Implemented as a scatter along each sender's
    out-links in ascending sender index (senders only ever touch their
    outgoing side of the graph).
    """
    inflow = np.zeros(graph.n)
    for j in phi:
        deg = graph.out_degree[j]
        if deg:
            inflow[graph.out_neighbors(j)] += ((1.0 - m) / deg) * z[j]
    return inflow


def _normalize_phi(graph, phi):
    arr = np.asarray(phi, dtype=np.intp)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if arr.size > 1:
        arr = np.unique(arr)
    if arr.size and (arr[0] < 0 or arr[-1] >= graph.n):
        raise ValueError(f"update set contains pages outside 0..{graph.n - 1}")
    return arr


def step_set(state, graph, m, phi):
    """One simultaneous update by the page set phi (may be empty).

    x_i += inflow_i for every page; senders restart their residual from
    the inflow alone (z_i+ = inflow_i for i in phi) while everyone else
    integrates it (z_i+ = z_i + inflow_i). A singleton phi is exactly one
    gossip update.
    """
    phi = _normalize_phi(graph, phi)
    inflow = scatter_push(graph, m, state.z, phi)
    x = state.x + inflow
    z = state.z.copy()
    z[phi] = 0.0
    z += inflow
    return PushState(x, z, state.step + 1,
                     state.cumulative_updates + int(phi.size))


def step_sync(state, graph, m):
    """One synchronous step: x+ = x + Qz, z+ = Qz (all pages push)."""
    q = graph.q_matrix(m)
    z = q @ state.z
    return PushState(state.x + z, z, state.step + 1,
                     state.cumulative_updates + graph.n)


def exact_error(state, m):
    """||x* - x||_1 computed from the residual alone: ((1-m)/m) ||z||_1.

    Valid on patched graphs, where every column of Q sums to 1-m; no
    knowledge of x* is needed.
    """
    return (1.0 - m) / m * float(state.z.sum())


def _record(trace, state, m, oracle, record_x=False):
    cert = exact_error(state, m)
    if oracle is not None:
        err = oracle.error_l1(state.x)
        defect = oracle.conservation_defect(state.x, state.z)
    else:
        err = defect = math.nan
    trace.append(state.step, state.cumulative_updates, err_l1=err,
                 cert=cert, defect=defect, x=state.x if record_x else None)


def _drive(state, graph, m, advance, steps, tol, oracle, cadence,
           record_x=False):
    """Shared outer loop: advance until tolerance/steps/schedule end."""
    # stopping on the certificate guarantees ||x*-x||_1 <= tol without an oracle
    z_stop = m * tol / (1.0 - m) if tol is not None else -1.0
    trace = Trace()
    _record(trace, state, m, oracle, record_x)
    while steps is None or state.step < steps:
        if state.z.sum() <= z_stop:
            break
        nxt = advance(state)
        if nxt is None:
            break
        state = nxt
        if state.step % cadence == 0:
            _record(trace, state, m, oracle, record_x)
    if trace.final_step != state.step:
        _record(trace, state, m, oracle, record_x)
    return state, trace


def run(graph, m, schedule, *, steps=None, tol=None, oracle=None,
        cadence=1, v=None, record_x=False):
    """Drive `step_set` with one update set per step drawn from `schedule`.

    Stops when the residual certificate reaches `tol`, after `steps` steps,
    or when the schedule is exhausted, whichever comes first. The trace
    records every `cadence`-th step (plus the first and last); err/defect
    columns are filled when a dense oracle is supplied.
    """
    if steps is None and tol is None:
        raise ValueError("need steps and/or tol to bound the run")
    state = init_state(graph.n, m, v)

    def advance(st):
        phi = schedule.next(st.step)
        if phi is None:
            return None
        return step_set(st, graph, m, phi)

    return _drive(state, graph, m, advance, steps, tol, oracle, cadence,
                  record_x)


def run_sync(graph, m, *, steps=None, tol=None, oracle=None, cadence=1,
             v=None, record_x=False):
    """Drive `step_sync` under the same stop rules as `run`."""
    if steps is None and tol is None:
        raise ValueError("need steps and/or tol to bound the run")
    state = init_state(graph.n, m, v)
    return _drive(state, graph, m, lambda st: step_sync(st, graph, m),
                  steps, tol, oracle, cadence, record_x)
