"""Update schedules: which pages (or groups) push at each step.

Random kinds draw from a seeded PCG64 stream and are reproducible across
platforms; singleton draws use an inverse-CDF lookup (binary search on the
cumulative weight array). Parallel replicas never share a stream: replica
r derives its own seed as ``seed XOR splitmix64(r)``.

A schedule is owned by one engine replica and consumed sequentially; call
`restart` for a fresh stream with the same parameters or `derive` for a
replica stream.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError

__all__ = ["Schedule", "liveness_audit", "LivenessReport",
           "indegree_plus_one_weights", "load_sequence_file",
           "derive_seed", "splitmix64"]

_MASK64 = (1 << 64) - 1

RANDOM_KINDS = ("uniform_singleton", "weighted_singleton", "random_subset")
DETERMINISTIC_KINDS = ("round_robin", "fixed_sequence", "periodic_groups")


def splitmix64(v):
    """One splitmix64 output step; the stable scrambler behind seed derivation."""
    v = (v + 0x9E3779B97F4A7C15) & _MASK64
    v = ((v ^ (v >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    v = ((v ^ (v >> 27)) * 0x94D049BB133111EB) & _MASK64
    return v ^ (v >> 31)


def derive_seed(seed, replica):
    """Replica stream seed: base seed XOR splitmix64(replica)."""
    return (int(seed) & _MASK64) ^ splitmix64(int(replica))


def indegree_plus_one_weights(graph):
    """Selection weights proportional to each page's in-degree plus one."""
    return np.array([graph.in_neighbors(i).size + 1 for i in range(graph.n)],
                    dtype=float)


class Schedule:
    """A policy producing the update set for each step.

    Kinds: ``uniform_singleton`` and ``weighted_singleton`` draw one index
    per step from a seeded stream; ``round_robin`` cycles {k mod n};
    ``fixed_sequence`` replays explicit sets and signals exhaustion by
    returning None; ``random_subset`` includes each index independently
    with probability q; ``periodic_groups`` cycles group {k mod N}.
    """

    def __init__(self, kind, *, n=None, weights=None, seed=None, q=None,
                 sequence=None):
        self.kind = kind
        self.n = n
        self.seed = seed
        self.q = q
        self.weights = None
        self._cum = None
        if weights is not None:
            w = np.asarray(weights, dtype=float)
            if np.any(w <= 0):
                raise ValueError("selection weights must all be positive")
            self.weights = w / w.sum()
            self._cum = np.cumsum(self.weights)
            self._cum[-1] = 1.0
            self.n = w.size
        self.sequence = None
        if sequence is not None:
            self.sequence = [np.unique(np.asarray(s, dtype=np.intp)).reshape(-1)
                             for s in sequence]
        self._rng = np.random.default_rng(seed) if kind in RANDOM_KINDS else None
        self._next_k = 0

    # -- constructors -------------------------------------------------

    @classmethod
    def uniform_singleton(cls, n, seed):
        return cls("uniform_singleton", weights=np.ones(n), seed=seed)

    @classmethod
    def weighted_singleton(cls, weights, seed):
        return cls("weighted_singleton", weights=weights, seed=seed)

    @classmethod
    def round_robin(cls, n):
        return cls("round_robin", n=n)

    @classmethod
    def fixed_sequence(cls, sets):
        return cls("fixed_sequence", sequence=sets)

    @classmethod
    def random_subset(cls, n, q, seed):
        if not 0.0 <= q <= 1.0:
            raise ValueError(f"subset probability must lie in [0, 1], got {q}")
        return cls("random_subset", n=n, q=q, seed=seed)

    @classmethod
    def periodic_groups(cls, num_groups):
        return cls("periodic_groups", n=num_groups)

    # -- stream management ---------------------------------------------

    @property
    def is_random(self):
        return self.kind in RANDOM_KINDS

    def restart(self):
        """Fresh schedule with identical parameters and a rewound stream."""
        return Schedule(self.kind, n=self.n, weights=self.weights,
                        seed=self.seed, q=self.q, sequence=self.sequence)

    def derive(self, replica):
        """Clone for a Monte Carlo replica, on its own derived stream."""
        seed = derive_seed(self.seed, replica) if self.is_random else self.seed
        return Schedule(self.kind, n=self.n, weights=self.weights,
                        seed=seed, q=self.q, sequence=self.sequence)

    # -- drawing --------------------------------------------------------

    def next(self, k):
        """The update set for step k, or None when a sequence is exhausted.

        Random kinds consume their stream and must be called with
        consecutive k starting at 0.
        """
        if self.is_random:
            if k != self._next_k:
                raise ValueError(
                    f"random schedule must be consumed sequentially: "
                    f"expected step {self._next_k}, got {k}")
            self._next_k += 1
            if self.kind == "random_subset":
                return np.flatnonzero(self._rng.random(self.n) < self.q)
            u = self._rng.random()
            idx = int(np.searchsorted(self._cum, u, side="right"))
            return np.array([idx], dtype=np.intp)
        if self.kind in ("round_robin", "periodic_groups"):
            return np.array([k % self.n], dtype=np.intp)
        if self.kind == "fixed_sequence":
            if k >= len(self.sequence):
                return None
            return self.sequence[k]
        raise AssertionError(f"unhandled schedule kind {self.kind!r}")


@dataclass
class LivenessReport:
    """Per-page update gaps over an emitted history of update sets.

    ``max_gap[i]`` is the largest number of consecutive steps page i went
    without updating, counting lead-in and tail-out; a page that never
    appears gets len(history) + 1. Pages with max_gap > window violate the
    every-T-steps premise.
    """

    window: int
    num_steps: int
    max_gap: np.ndarray
    counts: np.ndarray

    @property
    def violators(self):
        return np.flatnonzero(self.max_gap > self.window)

    @property
    def ok(self):
        return self.violators.size == 0


def liveness_audit(history, T, n):
    """Audit an emitted set history against the every-T-steps premise."""
    length = 0
    last = np.full(n, -1, dtype=np.intp)
    max_gap = np.zeros(n, dtype=np.intp)
    counts = np.zeros(n, dtype=np.intp)
    for t, chosen in enumerate(history):
        idx = np.asarray(list(chosen), dtype=np.intp)
        if idx.size:
            gap = t - last[idx]
            np.maximum.at(max_gap, idx, gap)
            last[idx] = t
            counts[idx] += 1
        length = t + 1
    np.maximum(max_gap, length - last, out=max_gap)
    return LivenessReport(window=T, num_steps=length, max_gap=max_gap,
                          counts=counts)


def load_sequence_file(source):
    """Explicit update sequence: one set per line, comma-separated indices.

    Blank and ``#`` lines are skipped; a line containing just ``-`` denotes
    the empty set (a no-op step).
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text(encoding="utf-8")
    sets = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "-":
            sets.append(np.empty(0, dtype=np.intp))
            continue
        try:
            sets.append(np.array([int(tok) for tok in line.split(",")],
                                 dtype=np.intp))
        except ValueError:
            raise ParseError(
                f"line {lineno}: expected comma-separated integers, got {line!r}"
            ) from None
    return sets
