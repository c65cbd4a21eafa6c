"""Dense lifted matrices encoding the engines' update steps.

One simultaneous push by the set phi acts linearly on the state pair:
``x+ = x + R_phi z`` and ``z+ = Q_phi z``, where column i of Q_phi is q_i
(the i-th column of Q) for i in phi and e_i otherwise, R_phi keeps only
the q_i columns, and S_phi keeps only the e_i columns. Single-page
matrices Q_i, R_i, S_i are the singleton case. The group step uses
``Rhat = R (I - R)^{-1}`` built from R of the group's member set.

Everything here is dense, capped at small n, and exists purely as a test
oracle for the engines; nothing on the hot path calls into this module.
All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import numpy as np

from .solvers import check_probability_vector
from .webgraph import q_column

__all__ = ["ORACLE_CAP", "dense_q", "lift_single", "lift_set",
           "lift_group_hat", "lift_group_hat_blocks", "mean_matrices",
           "analytic_mean_trace", "spectral_radius"]

ORACLE_CAP = 200


def _check_cap(n):
    if n > ORACLE_CAP:
        raise ValueError(f"lifted matrices are dense oracles; n={n} exceeds {ORACLE_CAP}")


def dense_q(graph, m):
    _check_cap(graph.n)
    return graph.q_matrix(m).toarray()


def lift_single(graph, m, i):
    """(Q_i, R_i, S_i): identity/zero matrices with column i set to q_i / zeroed."""
    _check_cap(graph.n)
    n = graph.n
    idx, vals = q_column(graph, m, i)
    qi = np.zeros(n)
    qi[idx] = vals
    q_lift = np.eye(n)
    q_lift[:, i] = qi
    r_lift = np.zeros((n, n))
    r_lift[:, i] = qi
    s_lift = np.eye(n)
    s_lift[:, i] = 0.0
    return q_lift, r_lift, s_lift


def lift_set(graph, m, phi):
    """(Q_phi, R_phi, S_phi) for an update set phi.

    Satisfies R_phi = sum of R_i over phi, Q_phi = R_phi + S_phi, and
    R_i S_phi = 0 for i in phi (R_i otherwise).
    """
    _check_cap(graph.n)
    n = graph.n
    phi = np.unique(np.asarray(phi, dtype=np.intp))
    q_lift = np.eye(n)
    r_lift = np.zeros((n, n))
    s_lift = np.eye(n)
    for i in phi:
        idx, vals = q_column(graph, m, int(i))
        qi = np.zeros(n)
        qi[idx] = vals
        q_lift[:, i] = qi
        r_lift[:, i] = qi
        s_lift[:, i] = 0.0
    return q_lift, r_lift, s_lift


def lift_group_hat(graph, m, partition, h):
    """Group-step matrix Rhat = R (I - R)^{-1} for R = R_{members of h}.

    Only the chosen group's columns are nonzero; the group step satisfies
    x+ = x + Rhat z and z+ = S (I + Rhat) z.
    """
    _check_cap(graph.n)
    members = partition.members[h]
    _, r_lift, _ = lift_set(graph, m, members)
    eye = np.eye(graph.n)
    # solve Rhat (I - R) = R  <=>  (I - R)^T Rhat^T = R^T
    return np.linalg.solve((eye - r_lift).T, r_lift.T).T


def lift_group_hat_blocks(graph, m, partition, h):
    """Rhat assembled from Q blocks: columns of group h are Q[:, h] (I - Qhh)^{-1}."""
    _check_cap(graph.n)
    members = partition.members[h]
    q = dense_q(graph, m)
    qhh = q[np.ix_(members, members)]
    local = np.linalg.solve(np.eye(members.size) - qhh, np.eye(members.size))
    rhat = np.zeros((graph.n, graph.n))
    rhat[:, members] = q[:, members] @ local
    return rhat


def mean_matrices(graph, m, p):
    """Expected step matrices under singleton selection probabilities p.

    Qbar = (I - P) + Q P and Rbar = Q P with P = diag(p); Qbar's column i
    sums to 1 - m p_i, so it is Schur stable for positive p.
    """
    _check_cap(graph.n)
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0):
        raise ValueError("selection probabilities must all be positive")
    check_probability_vector(p, graph.n, "selection probabilities")
    q = dense_q(graph, m)
    qbar = np.diag(1.0 - p) + q * p
    rbar = q * p
    return qbar, rbar


def analytic_mean_trace(graph, m, p, K):
    """Expected estimate trajectory E[x(0..K)] under singleton selection.

    Computed by the recursion E[x(k+1)] = E[x(k)] + Rbar w(k) with
    w(k+1) = Qbar w(k) and w(0) = E[x(0)] = (m/n) 1. The limit is the
    exact rank vector.
    """
    _check_cap(graph.n)
    qbar, rbar = mean_matrices(graph, m, p)
    n = graph.n
    out = np.empty((K + 1, n))
    w = np.full(n, m / n)
    out[0] = w
    for k in range(K):
        out[k + 1] = out[k] + rbar @ w
        w = qbar @ w
    return out


def spectral_radius(mat, iters=200, tol=1e-12):
    """Power-iteration estimate of the spectral radius of a nonnegative matrix."""
    n = mat.shape[0]
    v = np.full(n, 1.0 / n)
    est = 0.0
    for _ in range(iters):
        w = mat @ v
        nrm = float(np.abs(w).sum())
        if nrm == 0.0:
            return 0.0
        if abs(nrm - est) <= tol * max(est, 1.0):
            return nrm
        est = nrm
        v = w / nrm
    return est
