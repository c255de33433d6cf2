"""Gradient ascent on the attacker objective with one-step look-ahead budget control."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .graph import Graph, Perturbation, TargetSet
from .objective import ObjectiveWeights, evaluate
from .spectral import DEFAULT_K, DEFAULT_TOL, derive_seed, power_iterate, spectral_norm

log = logging.getLogger(__name__)

ZERO_GRADIENT = 1e-12

StepSchedule = Callable[[int], float]


def make_step_schedule(kind: str = "constant", eta0: float = 0.1) -> StepSchedule:
    """Step size rule indexed from 1: ``constant`` or ``inverse-sqrt``."""
    if eta0 <= 0:
        raise ValueError("eta0 must be positive")
    if kind == "constant":
        return lambda i: eta0
    if kind == "inverse-sqrt":
        return lambda i: eta0 / math.sqrt(i)
    raise ValueError(f"unknown step schedule {kind!r}")


@dataclass
class AttackConfig:
    epsilon: float | None = None
    gamma: float | None = None
    steps: int = 500
    schedule: StepSchedule = field(default_factory=make_step_schedule)
    weights: ObjectiveWeights = field(default_factory=ObjectiveWeights)
    power_k: int = DEFAULT_K
    power_tol: float = DEFAULT_TOL
    seed: int = 0

    def __post_init__(self):
        if self.epsilon is None and self.gamma is None:
            raise ValueError("either epsilon or gamma must be given")
        if self.epsilon is not None and self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.gamma is not None and self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")

    def budget(self, g: Graph) -> float:
        """Explicit epsilon, else gamma times the leading eigenvalue of ``g``."""
        if self.epsilon is not None:
            return self.epsilon
        return budget_from_gamma(g, self.gamma, self.power_k, self.power_tol, self.seed)


def budget_from_gamma(g, gamma: float, k: int = DEFAULT_K, tol: float = DEFAULT_TOL,
                      seed=0) -> float:
    if gamma == 0:
        return 0.0
    return gamma * abs(power_iterate(g, k, tol, seed).value)


@dataclass
class AttackResult:
    """Output of an attack.

    ``adjacency`` is the (possibly fractional, possibly negative) modified
    matrix; ``delta`` is ``adjacency - A``.
    """

    adjacency: np.ndarray
    delta: Perturbation
    budget_used: float
    iterations: int
    objective_trace: list[float]
    termination: str
    epsilon: float
    step_norms: list[float] = field(default_factory=list)
    moves: list[tuple[str, int, int]] = field(default_factory=list)


def attack(g: Graph, s: TargetSet, cfg: AttackConfig) -> AttackResult:
    """Run the projection-free gradient ascent until the budget or a local optimum stops it.

    Each accepted step adds ``eta_i * grad`` to the current matrix and
    charges ``||eta_i * grad||_2`` to the budget, so the cumulative
    perturbation never exceeds ``epsilon`` in spectral norm.
    """
    s.require_proper()
    epsilon = cfg.budget(g)
    a = np.array(g.dense)
    a_tilde = a.copy()
    used = 0.0
    trace: list[float] = []
    step_norms: list[float] = []
    termination = "max-steps"
    accepted = 0

    for i in range(1, cfg.steps + 1):
        report = evaluate(a_tilde, s, cfg.weights, cfg.power_k, cfg.power_tol,
                          derive_seed(cfg.seed, i))
        trace.append(report.total)
        grad = report.gradient
        np.fill_diagonal(grad, 0.0)
        if np.abs(grad).max() < ZERO_GRADIENT:
            termination = "local-optimum"
            break
        step = cfg.schedule(i) * grad
        norm = spectral_norm(step, cfg.power_k, cfg.power_tol, derive_seed(cfg.seed, i, 7))
        if used + norm > epsilon:
            termination = "budget-exhausted"
            break
        a_tilde += step
        used += norm
        step_norms.append(norm)
        accepted += 1
        assert np.array_equal(a_tilde, a_tilde.T) and not np.any(np.diag(a_tilde))

    delta = a_tilde - a
    log.debug("attack stopped after %d steps (%s), budget %.4g/%.4g",
              accepted, termination, used, epsilon)
    return AttackResult(a_tilde, Perturbation(delta), used, accepted, trace, termination,
                        epsilon, step_norms)
