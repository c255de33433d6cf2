"""Degree-based robustness certificate for a target set."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedEstimatorError
from .graph import Graph, TargetSet, degree_vector


@dataclass(frozen=True)
class CertBound:
    """Smallest budget that could raise the estimated impact on S.

    ``applicable`` is None when no (beta, delta) pair was supplied.
    ``tau`` is the user's bound on the estimator error, carried for reports.
    """

    epsilon_min: float
    applicable: bool | None = None
    tau: float = 0.0
    weighted_degrees: bool = False


def impact_estimator(g: Graph, s: TargetSet, beta: float, delta: float) -> tuple[float, bool]:
    """``sum_{i in S} (1 - delta / (beta * d_i))`` and whether delta/beta <= d_min.

    The value is returned even outside the regime where it is meaningful.
    """
    d = degree_vector(g)
    d_s = d[s.index]
    if np.any(d_s == 0):
        raise UndefinedEstimatorError("a target node has degree zero")
    ratio = delta / beta
    value = float(np.sum(1.0 - ratio / d_s))
    return value, bool(ratio <= d.min())


def certify_budget(g: Graph, s: TargetSet, beta: float | None = None,
                   delta: float | None = None, tau: float = 0.0) -> CertBound:
    """``sqrt(|S|/n) * std(d_S)`` with the population standard deviation."""
    d_s = degree_vector(g)[s.index]
    variance = float(np.mean(d_s**2) - np.mean(d_s) ** 2)
    eps = float(np.sqrt(len(s) / g.n) * np.sqrt(max(variance, 0.0)))
    applicable = None
    if beta is not None and delta is not None:
        applicable = bool(delta / beta <= degree_vector(g).min())
    return CertBound(eps, applicable, tau, g.weighted)
