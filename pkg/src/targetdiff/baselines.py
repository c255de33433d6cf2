"""Greedy edge-editing baselines: degree sum (``deg``) and eigenscore (``gel``)."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .graph import Graph, Perturbation, TargetSet
from .optimizer import AttackResult
from .spectral import DEFAULT_K, DEFAULT_TOL, derive_seed, principal_eigenvector, spectral_norm

TIE_RTOL = 1e-12


def _pairs(a: np.ndarray, nodes: np.ndarray, present: bool):
    """Upper-triangle pairs within ``nodes``, in lexicographic global order."""
    sub = a[np.ix_(nodes, nodes)]
    mask = sub > 0 if present else sub == 0
    r, c = np.nonzero(np.triu(mask, k=1))
    return nodes[r], nodes[c]


def _argmax_lex(scores: np.ndarray) -> int:
    """First index whose score ties the maximum; pairs are pre-sorted lexicographically."""
    top = scores.max()
    return int(np.flatnonzero(scores >= top - TIE_RTOL * max(1.0, abs(top)))[0])


def baseline_attack(g: Graph, s: TargetSet, kind: str, epsilon: float,
                    weighted_step: float | None = None, k: int = DEFAULT_K,
                    tol: float = DEFAULT_TOL, seed=0) -> AttackResult:
    """Alternate one edit inside S and one inside S', starting with S, until the budget is spent.

    Inside S: add the absent pair (unweighted) or raise the present pair
    (weighted) with the best score.  Inside S': remove, or lower by
    ``weighted_step`` floored at zero, the present edge with the best score.
    Scores are ``d_i + d_j`` for ``deg`` and ``v_i * v_j`` for ``gel``, with
    degrees and the principal eigenvector recomputed after every accepted
    edit.  The first edit that pushes ``||A~ - A||_2`` over ``epsilon`` is
    undone and ends the attack.
    """
    if kind not in ("deg", "gel"):
        raise ValueError(f"unknown baseline {kind!r}")
    if weighted_step is None:
        weighted_step = float(g.matrix.data.mean()) if g.matrix.nnz else 1.0
    a0 = np.array(g.dense)
    a = a0.copy()
    sides = {"S": s.index, "S'": s.complement}
    side = "S"
    moves: list[tuple[str, int, int]] = []
    exhausted: set[str] = set()
    norm = 0.0
    termination = "no-candidates"

    while len(exhausted) < 2:
        if side in exhausted:
            side = "S'" if side == "S" else "S"
            continue
        grow = side == "S"
        rows, cols = _pairs(a, sides[side], present=g.weighted or not grow)
        if len(rows) == 0:
            exhausted.add(side)
            side = "S'" if side == "S" else "S"
            continue
        if kind == "deg":
            d = a.sum(axis=1)
            scores = d[rows] + d[cols]
        else:
            v = principal_eigenvector(sp.csr_matrix(a), k, tol, derive_seed(seed, len(moves))).vector
            scores = v[rows] * v[cols]
        pick = _argmax_lex(scores)
        i, j = int(rows[pick]), int(cols[pick])

        old = a[i, j]
        if g.weighted:
            new = old + weighted_step if grow else max(0.0, old - weighted_step)
        else:
            new = 1.0 if grow else 0.0
        a[i, j] = a[j, i] = new
        trial_norm = spectral_norm(sp.csr_matrix(a - a0), k, tol, derive_seed(seed, len(moves), 9))
        if trial_norm > epsilon:
            a[i, j] = a[j, i] = old
            termination = "budget-exhausted"
            break
        norm = trial_norm
        moves.append((side, i, j))
        side = "S'" if side == "S" else "S"

    return AttackResult(a, Perturbation(a - a0), norm, len(moves), [], termination, epsilon,
                        moves=moves)


def as_graph(g: Graph, result: AttackResult) -> Graph:
    """Baseline output as a Graph (edits are already discrete)."""
    return Graph(g.n, sp.csr_matrix(result.adjacency), g.weighted)
