"""Measured change of degree and triangle statistics against their spectral-norm bounds."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .graph import Graph, Perturbation, degree_vector
from .spectral import DEFAULT_K, DEFAULT_TOL, spectral_norm

log = logging.getLogger(__name__)

ENUMERATION_CAP = 2000


@dataclass(frozen=True)
class BoundCheck:
    name: str
    measured: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.measured <= self.bound


def _delta_norm(g: Graph, g_tilde: Graph, k, tol, seed) -> float:
    if g.n != g_tilde.n:
        raise ValueError(f"size mismatch: {g.n} vs {g_tilde.n} nodes")
    return spectral_norm(Perturbation.between(g, g_tilde), k, tol, seed)


def degree_sequence_deviation(g: Graph, g_tilde: Graph, k: int = DEFAULT_K,
                              tol: float = DEFAULT_TOL, seed=0) -> BoundCheck:
    """``||d~ - d||_2`` against ``sqrt(n) * ||Delta||_2``."""
    norm = _delta_norm(g, g_tilde, k, tol, seed)
    dev = float(np.linalg.norm(degree_vector(g_tilde) - degree_vector(g)))
    return BoundCheck("degree_sequence", dev, float(np.sqrt(g.n) * norm))


def average_degree_deviation(g: Graph, g_tilde: Graph, k: int = DEFAULT_K,
                             tol: float = DEFAULT_TOL, seed=0) -> BoundCheck:
    norm = _delta_norm(g, g_tilde, k, tol, seed)
    dev = abs(float(degree_vector(g_tilde).mean() - degree_vector(g).mean()))
    return BoundCheck("average_degree", dev, norm)


def triangle_count(g: Graph) -> int:
    """Exact count; wedge enumeration up to ``ENUMERATION_CAP`` nodes, trace of A^3 beyond."""
    if g.n > ENUMERATION_CAP:
        a = g.matrix
        return int(round((a @ a).multiply(a).sum() / 6))
    nbrs = [set(g.matrix[i].indices[g.matrix[i].indices > i]) for i in range(g.n)]
    return sum(len(nbrs[i] & nbrs[j]) for i in range(g.n) for j in nbrs[i])


def triangle_deviation(g: Graph, g_tilde: Graph, k: int = DEFAULT_K,
                       tol: float = DEFAULT_TOL, seed=0) -> BoundCheck:
    """``|T - T~|`` against ``||Delta||_2 * m``.

    The bound only holds to first order in the perturbation; violations are
    logged, not raised.
    """
    if g.weighted or g_tilde.weighted:
        raise ValueError("triangle bound needs unweighted graphs")
    norm = _delta_norm(g, g_tilde, k, tol, seed)
    check = BoundCheck("triangles", float(abs(triangle_count(g) - triangle_count(g_tilde))),
                       norm * g.num_edges)
    if not check.holds:
        log.warning("first-order triangle bound violated: %s > %s", check.measured, check.bound)
    return check


def bound_suite(g: Graph, g_tilde: Graph, k: int = DEFAULT_K, tol: float = DEFAULT_TOL,
                seed=0) -> list[BoundCheck]:
    checks = [degree_sequence_deviation(g, g_tilde, k, tol, seed),
              average_degree_deviation(g, g_tilde, k, tol, seed)]
    if not g.weighted and not g_tilde.weighted:
        checks.append(triangle_deviation(g, g_tilde, k, tol, seed))
    return checks
