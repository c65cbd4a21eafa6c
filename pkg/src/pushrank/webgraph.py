"""Directed web graphs and page partitions.

A graph holds per-page out-link lists over pages 0..n-1. The link matrix A
is column stochastic with A[i, j] = 1/n_j for every link j -> i, where n_j
is the out-degree of page j; the scaled operator Q = (1-m) * A drives all
engines. Pages without out-links ("dangling") must be patched before Q can
be formed.

File formats (UTF-8 text, ``#`` comment lines and blank lines ignored):

* edge list  -- one ``src dst`` pair per line, whitespace separated;
* partition  -- one ``page group`` pair per line, every page exactly once.

Both graphs and partitions are immutable after construction and safe to
share across threads.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from scipy import sparse

from .errors import ParseError

__all__ = [
    "WebGraph",
    "Partition",
    "load_edge_list",
    "parse_edge_list",
    "patch_dangling",
    "q_column",
    "load_partition",
    "parse_partition",
    "trivial_partition",
    "whole_graph_partition",
]


def _as_lines(source):
    """Yield (line_number, stripped_text) for payload lines of a text source.

    `source` may be a filesystem path or any object with a ``read`` method.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


class WebGraph:
    """Immutable hyperlink structure with out-/in-neighbor access.

    Parameters
    ----------
    n : int
        Page count, at least 2.
    out_neighbors : sequence of integer sequences
        ``out_neighbors[j]`` lists the targets of page j's out-links.
        Duplicates are collapsed; targets are stored sorted.
    """

    __slots__ = ("n", "out_degree", "_out", "_in", "_q_cache")

    def __init__(self, n, out_neighbors):
        if n < 2:
            raise ValueError(f"need at least 2 pages, got n={n}")
        if len(out_neighbors) != n:
            raise ValueError("out_neighbors must have one entry per page")
        self.n = int(n)
        out = []
        for j, targets in enumerate(out_neighbors):
            t = np.unique(np.asarray(list(targets), dtype=np.intp))
            if t.size and (t[0] < 0 or t[-1] >= n):
                raise ValueError(f"page {j} links outside 0..{n - 1}")
            out.append(t)
        self._out = tuple(out)
        self.out_degree = np.array([t.size for t in out], dtype=np.intp)
        ins = [[] for _ in range(n)]
        for j, targets in enumerate(self._out):
            for i in targets:
                ins[i].append(j)
        # sources are appended in ascending j, so each list is already sorted
        self._in = tuple(np.asarray(s, dtype=np.intp) for s in ins)
        self._q_cache = {}

    @classmethod
    def from_edges(cls, n, edges):
        out = [[] for _ in range(n)]
        for src, dst in edges:
            out[src].append(dst)
        return cls(n, out)

    def out_neighbors(self, i):
        return self._out[i]

    def in_neighbors(self, i):
        return self._in[i]

    @property
    def num_edges(self):
        return int(self.out_degree.sum())

    def dangling_pages(self):
        """Pages with no out-links, ascending."""
        return np.flatnonzero(self.out_degree == 0)

    @property
    def is_stochastic(self):
        """True when every page has at least one out-link."""
        return bool(np.all(self.out_degree > 0))

    def q_matrix(self, m):
        """The scaled link operator Q = (1-m) A as a CSC matrix.

        Column j holds (1-m)/n_j at each out-neighbor row of page j. Entry
        values are computed directly as (1-m)/n_j so that column scatters
        performed with that same scalar reproduce the mat-vec bit for bit.
        Cached per value of m; the graph must be patched first.
        """
        if not 0.0 < m < 1.0:
            raise ValueError(f"m must lie in (0, 1), got {m}")
        if not self.is_stochastic:
            bad = self.dangling_pages()
            raise ValueError(f"graph has dangling pages {bad.tolist()}; patch first")
        cached = self._q_cache.get(m)
        if cached is not None:
            return cached
        rows = np.concatenate(self._out) if self.num_edges else np.empty(0, dtype=np.intp)
        cols = np.repeat(np.arange(self.n, dtype=np.intp), self.out_degree)
        data = np.repeat((1.0 - m) / self.out_degree.astype(float), self.out_degree)
        q = sparse.csc_array((data, (rows, cols)), shape=(self.n, self.n))
        q.sort_indices()
        self._q_cache[m] = q
        return q


def parse_edge_list(text, index_base=0):
    """Build a graph from edge-list text. See `load_edge_list`."""
    return load_edge_list(io.StringIO(text), index_base=index_base)


def load_edge_list(source, index_base=0):
    """Load a directed graph from an edge list.

    Each payload line is ``src dst``. `index_base` selects 0- or 1-based
    page numbering in the file; pages are always 0-based in memory. The
    page count is one plus the largest (rebased) index seen. Duplicate
    edges collapse; dangling pages are allowed at this stage.
    """
    if index_base not in (0, 1):
        raise ValueError(f"index_base must be 0 or 1, got {index_base}")
    edges = []
    max_seen = -1
    for lineno, line in _as_lines(source):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected 'src dst', got {line!r}")
        try:
            src, dst = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"line {lineno}: expected two integers, got {line!r}") from None
        src -= index_base
        dst -= index_base
        if src < 0 or dst < 0:
            raise ParseError(f"line {lineno}: index below base {index_base}")
        edges.append((src, dst))
        max_seen = max(max_seen, src, dst)
    n = max_seen + 1
    if n < 2:
        raise ValueError(f"edge list describes {n} page(s); need at least 2")
    return WebGraph.from_edges(n, edges)


def patch_dangling(graph):
    """Give every dangling page a uniform out-link to all n pages (self included).

    Returns the patched graph plus the list of pages that were patched.
    Non-dangling pages are untouched; the result is column stochastic.
    """
    patched = graph.dangling_pages()
    if patched.size == 0:
        return graph, patched
    everyone = np.arange(graph.n, dtype=np.intp)
    out = [everyone if graph.out_degree[j] == 0 else graph.out_neighbors(j)
           for j in range(graph.n)]
    return WebGraph(graph.n, out), patched


def q_column(graph, m, i):
    """Column i of Q = (1-m) A as (indices, values).

    Entries are (1-m)/n_i at each out-neighbor of page i; they sum to 1-m.
    Raises if page i is dangling (column would not be sub-stochastic).
    """
    if not 0.0 < m < 1.0:
        raise ValueError(f"m must lie in (0, 1), got {m}")
    deg = int(graph.out_degree[i])
    if deg == 0:
        raise ValueError(f"page {i} is dangling; patch the graph first")
    targets = graph.out_neighbors(i)
    return targets, np.full(deg, (1.0 - m) / deg)


class Partition:
    """Disjoint grouping of pages 0..n-1 into groups 0..N-1.

    Built from a full page -> group assignment; group labels are densified
    to 0..N-1 in sorted label order and each group's member list is sorted.
    `permutation` maps original page index to a reindexing under which every
    group occupies a contiguous block (group 0 first); `inverse_permutation`
    undoes it.
    """

    __slots__ = ("n", "num_groups", "group_of", "members", "sizes",
                 "permutation", "inverse_permutation")

    def __init__(self, assignments):
        group_of = np.asarray(assignments, dtype=np.intp)
        if group_of.ndim != 1 or group_of.size < 1:
            raise ValueError("assignments must be a 1-D page -> group array")
        labels, dense = np.unique(group_of, return_inverse=True)
        self.n = group_of.size
        self.num_groups = labels.size
        self.group_of = dense.astype(np.intp)
        self.members = tuple(np.flatnonzero(self.group_of == h)
                             for h in range(self.num_groups))
        self.sizes = np.array([mem.size for mem in self.members], dtype=np.intp)
        order = np.concatenate(self.members)
        perm = np.empty(self.n, dtype=np.intp)
        perm[order] = np.arange(self.n, dtype=np.intp)
        self.permutation = perm
        self.inverse_permutation = order

    @classmethod
    def trivial(cls, n):
        """n singleton groups, group index equal to page index."""
        return cls(np.arange(n))

    @classmethod
    def whole(cls, n):
        """A single group containing every page."""
        return cls(np.zeros(n, dtype=np.intp))


def parse_partition(text, graph):
    return load_partition(io.StringIO(text), graph)


def load_partition(source, graph):
    """Load a page -> group assignment for `graph` from ``page group`` lines.

    Every page must be assigned exactly once; group labels need not be
    contiguous (they are densified). Unassigned or doubly-assigned pages
    raise with the full offender list.
    """
    n = graph.n
    assigned = np.full(n, -1, dtype=np.intp)
    dupes = []
    for lineno, line in _as_lines(source):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected 'page group', got {line!r}")
        try:
            page, group = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"line {lineno}: expected two integers, got {line!r}") from None
        if not 0 <= page < n:
            raise ParseError(f"line {lineno}: page {page} outside 0..{n - 1}")
        if assigned[page] != -1:
            dupes.append(page)
        assigned[page] = group
    missing = np.flatnonzero(assigned == -1)
    if dupes or missing.size:
        raise ValueError(
            "invalid partition: "
            f"doubly-assigned pages {sorted(set(dupes))}, "
            f"unassigned pages {missing.tolist()}")
    return Partition(assigned)


def trivial_partition(graph):
    return Partition.trivial(graph.n)


def whole_graph_partition(graph):
    return Partition.whole(graph.n)
