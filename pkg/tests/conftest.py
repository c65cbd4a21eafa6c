"""Shared graph generators and file helpers for the test suite."""

import numpy as np
import pytest

from pushrank import Partition, WebGraph, patch_dangling


def random_graph(rng, n, mean_out=4.0, allow_self=False, patched=True):
    """Seeded random digraph; out-degrees are Poisson(mean_out), clipped.

    Pages that draw zero out-links stay dangling unless `patched`.
    """
    out = []
    for j in range(n):
        pool = np.arange(n) if allow_self else np.delete(np.arange(n), j)
        d = min(int(rng.poisson(mean_out)), pool.size)
        out.append(rng.choice(pool, size=d, replace=False) if d else [])
    g = WebGraph(n, out)
    if patched:
        g, _ = patch_dangling(g)
    return g


def community_graph(rng, num_groups=10, group_size=20, p_in=0.3, p_out=0.01):
    """Block digraph: dense inside communities, sparse across them."""
    n = num_groups * group_size
    assignments = np.repeat(np.arange(num_groups), group_size)
    out = []
    for j in range(n):
        prob = np.where(assignments == assignments[j], p_in, p_out)
        prob[j] = 0.0
        out.append(np.flatnonzero(rng.random(n) < prob))
    g, _ = patch_dangling(WebGraph(n, out))
    return g, Partition(assignments)


def random_partition(rng, n, num_groups):
    """Random page -> group assignment (empty groups vanish on densify)."""
    return Partition(rng.integers(0, num_groups, size=n))


def write_edge_list(graph, path, index_base=0):
    with open(path, "w", encoding="utf-8") as fh:
        for j in range(graph.n):
            for i in graph.out_neighbors(j):
                fh.write(f"{j + index_base} {i + index_base}\n")
    return str(path)


def write_partition_file(partition, path):
    with open(path, "w", encoding="utf-8") as fh:
        for page, group in enumerate(partition.group_of):
            fh.write(f"{page} {group}\n")
    return str(path)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
