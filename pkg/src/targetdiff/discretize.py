"""Turn a fractional attack result into a valid adjacency matrix."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .graph import Graph
from .optimizer import AttackResult
from .spectral import DEFAULT_K, DEFAULT_TOL, spectral_norm

CHANGE_TOL = 1e-9


def candidate_toggles(g: Graph, a_tilde: np.ndarray) -> list[tuple[float, int, int, float]]:
    """Changed upper-triangle entries as ``(score, i, j, direction)``.

    Sorted by descending score, ties in lexicographic ``(i, j)`` order.
    """
    diff = np.triu(np.asarray(a_tilde) - g.dense, k=1)
    rows, cols = np.nonzero(np.abs(diff) > CHANGE_TOL)
    vals = diff[rows, cols]
    order = np.lexsort((cols, rows, -np.abs(vals)))
    return [(float(abs(vals[k])), int(rows[k]), int(cols[k]), float(np.sign(vals[k])))
            for k in order]


def round_unweighted(g: Graph, result: AttackResult, epsilon: float,
                     k: int = DEFAULT_K, tol: float = DEFAULT_TOL, seed=0) -> Graph:
    """Greedy edge toggling in order of perturbation magnitude.

    An absent edge is added when the attack pushed its entry up; a present
    edge is removed when it was pushed down.  Entries pushed in a direction
    that cannot be realized on a binary graph are skipped.  After every
    toggle the spectral norm of the cumulative binary perturbation is
    rechecked; the first toggle that exceeds ``epsilon`` is undone and the
    process stops.
    """
    if g.weighted:
        raise ValueError("round_unweighted expects an unweighted graph")
    present = g.matrix.tolil()
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for _, i, j, direction in candidate_toggles(g, result.adjacency):
        exists = present[i, j] != 0
        if direction > 0 and exists or direction < 0 and not exists:
            continue
        change = 1.0 if direction > 0 else -1.0
        rows += [i, j]
        cols += [j, i]
        vals += [change, change]
        delta = sp.csr_matrix((vals, (rows, cols)), shape=(g.n, g.n))
        if spectral_norm(delta, k, tol, seed) > epsilon:
            del rows[-2:], cols[-2:], vals[-2:]
            break
    delta = sp.csr_matrix((vals, (rows, cols)), shape=(g.n, g.n))
    return Graph(g.n, g.matrix + delta, weighted=False)


def rescale_weighted(g: Graph, result: AttackResult, integer_weights: bool = False) -> Graph:
    """Map an attack run on ``A / C`` back to the original weight scale.

    ``C`` is the largest weight of ``g``.  The output is ``A + C * delta``,
    clipped at zero and optionally rounded to integers, so a zero
    perturbation returns ``g`` unchanged bit for bit.
    """
    c = float(g.matrix.max()) if g.matrix.nnz else 1.0
    delta = result.delta.toarray()
    if not np.any(delta):
        out = g.dense.copy()
    else:
        out = np.clip(g.dense + c * delta, 0.0, None)
    if integer_weights:
        out = np.rint(out)
    return Graph(g.n, sp.csr_matrix(out), weighted=True)


def normalize_weights(g: Graph) -> tuple[Graph, float]:
    """Divide every weight by the largest one; returns the scaled graph and ``C``."""
    c = float(g.matrix.max()) if g.matrix.nnz else 1.0
    return Graph(g.n, g.matrix / c, weighted=True), c
