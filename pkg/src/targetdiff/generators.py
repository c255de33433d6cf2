"""Synthetic graphs for the experiment presets, and the percentile target rule."""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericalError
from .graph import Graph, TargetSet, degree_vector
from .spectral import derive_seed

MAX_REGENERATIONS = 10


def _connected_or_retry(build, seed):
    for attempt in range(MAX_REGENERATIONS + 1):
        g = build(np.random.default_rng(derive_seed(seed, attempt) if attempt else seed))
        if g.is_connected():
            return g
    raise NumericalError(f"no connected graph after {MAX_REGENERATIONS} regenerations")


def barabasi_albert(n: int, attach: int, seed=0) -> Graph:
    """Preferential attachment grown from a clique on ``attach + 1`` nodes."""
    if not 1 <= attach < n:
        raise ValueError("need 1 <= attach < n")

    def build(rng):
        core = attach + 1
        edges = [(i, j) for i in range(core) for j in range(i + 1, core)]
        # every edge endpoint once: sampling from it is degree-proportional
        endpoints = [v for e in edges for v in e]
        for new in range(core, n):
            targets: set[int] = set()
            while len(targets) < attach:
                targets.add(endpoints[rng.integers(len(endpoints))])
            for t in sorted(targets):
                edges.append((t, new))
                endpoints.extend((t, new))
        return Graph.from_edges(n, edges)

    return _connected_or_retry(build, seed)


def watts_strogatz(n: int, k: int, p: float = 0.2, seed=0) -> Graph:
    """Ring lattice with ``k`` neighbours per node, clockwise edges rewired with prob ``p``."""
    if k % 2 or not 0 < k < n:
        raise ValueError("k must be even with 0 < k < n")
    if not 0 <= p <= 1:
        raise ValueError("rewiring probability must lie in [0, 1]")

    def build(rng):
        nbrs = [set() for _ in range(n)]
        for i in range(n):
            for j in range(1, k // 2 + 1):
                nbrs[i].add((i + j) % n)
                nbrs[(i + j) % n].add(i)
        for j in range(1, k // 2 + 1):
            for i in range(n):
                v = (i + j) % n
                if rng.random() >= p or v not in nbrs[i]:
                    continue
                choices = [w for w in range(n) if w != i and w not in nbrs[i]]
                if not choices:
                    continue
                w = choices[rng.integers(len(choices))]
                nbrs[i].discard(v)
                nbrs[v].discard(i)
                nbrs[i].add(w)
                nbrs[w].add(i)
        edges = [(i, j) for i in range(n) for j in nbrs[i] if i < j]
        return Graph.from_edges(n, edges)

    return _connected_or_retry(build, seed)


def percentile_target(g: Graph, percentile: float) -> TargetSet:
    """Node at the given degree percentile (nearest rank, smallest id) plus its neighbours."""
    if not 0 <= percentile <= 100:
        raise ValueError("percentile must lie in [0, 100]")
    d = degree_vector(g)
    ordered = np.sort(d)
    rank = max(1, math.ceil(percentile / 100 * g.n))
    value = ordered[rank - 1]
    centre = int(np.flatnonzero(d == value)[0])
    neighbours = g.matrix[centre].indices
    return TargetSet.of(g.n, [centre, *neighbours.tolist()])
