"""Discrete-time SIS Monte Carlo and random-walk dynamics, reported per side of S."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import Graph, TargetSet, degree_vector
from .errors import NumericalError


@dataclass(frozen=True)
class SISParams:
    beta: float = 0.06
    delta: float = 0.24
    steps: int = 30
    trials: int = 2000
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.beta <= 1:
            raise ValueError("beta must lie in [0, 1]")
        if not 0 <= self.delta <= 1:
            raise ValueError("delta must lie in [0, 1]")
        if self.steps < 0 or self.trials < 1:
            raise ValueError("steps must be >= 0 and trials >= 1")


@dataclass
class SimulationResult:
    fracS: float
    fracSPrime: float
    fracAll: float
    perTrial: np.ndarray  # (trials, 2) infected counts in S and S'
    stderrS: float
    stderrSPrime: float


@dataclass
class WalkResult:
    rank: np.ndarray
    massS: float
    massSPrime: float


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based stream for one trial, independent of scheduling."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial])))


def _transmission_operators(g: Graph, beta: float):
    """log(1 - p_ij) for uncertain contacts and an indicator for certain ones."""
    p = g.matrix.copy()
    p.data = np.minimum(1.0, beta * p.data)
    certain = p.copy()
    certain.data = (certain.data >= 1.0).astype(np.float64)
    certain.eliminate_zeros()
    logq = p.copy()
    uncertain = p.data < 1.0
    logq.data = np.zeros_like(p.data)
    logq.data[uncertain] = np.log1p(-p.data[uncertain])
    logq.eliminate_zeros()
    return sp.csc_matrix(logq), sp.csc_matrix(certain)


CHUNK_BUDGET = 4_000_000  # random doubles held in memory per chunk


def _run_chunk(trials, g, params, initial, logq, certain):
    n = g.n
    size = len(trials)
    draws = np.empty((size, params.steps, 2, n))
    infected = np.zeros((size, n), dtype=bool)
    for row, trial in enumerate(trials):
        rng = trial_rng(params.seed, int(trial))
        start = int(rng.integers(n))
        infected[row, start if initial is None else initial] = True
        draws[row] = rng.random((params.steps, 2, n))
    for t in range(params.steps):
        if not infected.any():
            break
        x = infected.T.astype(np.float64)
        log_escape = (logq.T @ x).T
        sure = (certain.T @ x).T > 0
        p_inf = np.where(sure, 1.0, -np.expm1(log_escape))
        new = ~infected & (draws[:, t, 0] < p_inf)
        recover = infected & (draws[:, t, 1] < params.delta)
        infected = (infected & ~recover) | new
    return infected


def simulate_sis(g: Graph, s: TargetSet, params: SISParams, initial: int | None = None,
                 threads: int = 1) -> SimulationResult:
    """Monte Carlo SIS; one uniformly random (or fixed) initial infected node per trial.

    Each step, susceptible node i is infected with probability
    ``1 - prod_{j infected} (1 - min(1, beta * w_ij))`` and every infected
    node recovers with probability ``delta``, both evaluated against the
    start-of-step state.  Results are taken at the final step.  Trial ``t``
    always consumes the same random stream, so results do not depend on
    ``threads`` and two graphs simulated with the same seed share their
    random numbers.
    """
    if initial is not None and not 0 <= initial < g.n:
        raise ValueError("initial node out of range")
    logq, certain = _transmission_operators(g, params.beta)
    per_chunk = max(1, CHUNK_BUDGET // max(1, 2 * params.steps * g.n))
    order = np.arange(params.trials)
    chunks = [order[i:i + per_chunk] for i in range(0, params.trials, per_chunk)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(
                lambda c: _run_chunk(c, g, params, initial, logq, certain), chunks))
    else:
        parts = [_run_chunk(c, g, params, initial, logq, certain) for c in chunks]
    final = np.concatenate(parts)

    mask = s.mask
    in_s = final[:, mask].sum(axis=1)
    in_c = final[:, ~mask].sum(axis=1)
    per_trial = np.stack([in_s, in_c], axis=1)
    n_s, n_c = int(mask.sum()), int((~mask).sum())
    frac_s = in_s / n_s
    frac_c = in_c / n_c if n_c else np.zeros_like(frac_s, dtype=float)

    def stderr(x):
        return float(x.std(ddof=1) / np.sqrt(len(x))) if len(x) > 1 else 0.0

    return SimulationResult(
        fracS=float(frac_s.mean()),
        fracSPrime=float(frac_c.mean()),
        fracAll=float((in_s + in_c).mean() / g.n),
        perTrial=per_trial,
        stderrS=stderr(frac_s),
        stderrSPrime=stderr(frac_c),
    )


# -- random walks -------------------------------------------------------------

MAX_WALK_ITERATIONS = 1_000_000


def _transition_transpose(g: Graph) -> sp.csr_matrix:
    d = degree_vector(g)
    if np.any(d == 0):
        raise NumericalError("graph has isolated nodes; transition matrix undefined")
    return sp.csr_matrix(g.matrix.multiply(1.0 / d[:, None]).T)


def _stationary(pt, restart, c, r0, tol):
    """Fixed point of r <- (1-c) P^T r + c * restart, to l1 change below ``tol``.

    Iterates the lazy average r <- (r + map(r)) / 2, which has the same fixed
    point but does not oscillate on bipartite graphs when c is zero or tiny.
    """
    r = r0
    for _ in range(MAX_WALK_ITERATIONS):
        nxt = 0.5 * (r + (1.0 - c) * (pt @ r) + c * restart)
        change = np.abs(nxt - r).sum()
        r = nxt
        if change < tol:
            return r
    raise NumericalError("random walk did not converge")


def _walk_result(rank, s):
    rank = rank / rank.sum()
    return WalkResult(rank, float(rank[s.mask].sum()), float(rank[~s.mask].sum()))


def random_walk_restart(g: Graph, s: TargetSet, c: float = 0.05, start: int = 0,
                        tol: float = 1e-12) -> WalkResult:
    """Stationary distribution of the walk that returns to ``start`` with probability c."""
    if not 0 <= c <= 1:
        raise ValueError("restart probability must lie in [0, 1]")
    if degree_vector(g)[start] == 0:
        raise NumericalError(f"start node {start} is isolated")
    e = np.zeros(g.n)
    e[start] = 1.0
    if c == 1:
        return _walk_result(e, s)
    return _walk_result(_stationary(_transition_transpose(g), e, c, e, tol), s)


def page_rank(g: Graph, s: TargetSet, c: float = 0.1, tol: float = 1e-12) -> WalkResult:
    """Stationary distribution with uniform teleportation probability c."""
    if not 0 <= c <= 1:
        raise ValueError("restart probability must lie in [0, 1]")
    uniform = np.full(g.n, 1.0 / g.n)
    if c == 1:
        return _walk_result(uniform, s)
    return _walk_result(_stationary(_transition_transpose(g), uniform, c, uniform.copy(), tol), s)
