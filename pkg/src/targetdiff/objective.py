"""Attacker objective and its gradient with respect to the adjacency matrix.

All gradients use the full-matrix convention (A[i, j] and A[j, i] are
separate variables), are then symmetrized with (G + G.T) / 2 and get their
diagonal zeroed.  Under that convention the derivative along the tied
direction E_ij + E_ji equals twice the returned entry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph  # noqa: F401

from .errors import DegeneratePartitionError
from .graph import Graph, TargetSet
from .spectral import DEFAULT_K, DEFAULT_TOL, derive_seed, power_iterate, start_vector


@dataclass(frozen=True)
class ObjectiveWeights:
    a1: float = 1 / 3
    a2: float = 1 / 3
    a3: float = 1 / 3

    def __post_init__(self):
        w = (self.a1, self.a2, self.a3)
        if min(w) < 0:
            raise ValueError("objective weights must be nonnegative")
        if max(w) == 0:
            raise ValueError("at least one objective weight must be positive")


@dataclass
class TermResult:
    value: float
    gradient: np.ndarray
    warning: str | None = None


@dataclass
class ObjectiveReport:
    lambda1S: float
    sigmaS: float
    phiS: float
    total: float
    gradient: np.ndarray
    warnings: tuple[str, ...] = ()


def _dense(g) -> np.ndarray:
    if isinstance(g, Graph):
        return np.array(g.dense)
    if sp.issparse(g):
        return g.toarray()
    return np.asarray(g, dtype=np.float64)


def _finish(grad: np.ndarray) -> np.ndarray:
    grad = 0.5 * (grad + grad.T)
    np.fill_diagonal(grad, 0.0)
    return grad


def grad_lambda1_s(a_tilde, s: TargetSet, k: int = DEFAULT_K, tol: float = DEFAULT_TOL,
                   seed=0) -> TermResult:
    """Largest eigenvalue of the induced target block and its gradient v_S v_S^T."""
    a = _dense(a_tilde)
    n = a.shape[0]
    idx = s.index
    block = a[np.ix_(idx, idx)]
    grad = np.zeros((n, n))
    if not np.any(block):
        return TermResult(0.0, grad, "degenerate-subgraph: induced target block has no edges")
    est = power_iterate(block, k, tol, seed)
    v = est.vector
    value = float(v @ block @ v)
    grad[np.ix_(idx, idx)] = np.outer(v, v)
    return TermResult(value, _finish(grad))


def _unrolled_power(a: np.ndarray, k: int, tol: float, seed, shift: float = 0.0):
    """Forward pass of x <- (A + shift*I) x / ||.||.

    Keeps every iterate and every pre-normalization norm; also reports
    whether successive iterates settled below ``tol``.
    """
    x = start_vector(a.shape[0], seed)
    xs, norms = [x], []
    converged = False
    for _ in range(k):
        y = a @ x + shift * x
        ny = np.linalg.norm(y)
        x_new = y / ny
        norms.append(ny)
        xs.append(x_new)
        s = 1.0 if x_new @ x >= 0 else -1.0
        converged = np.linalg.norm(x_new - s * x) < tol
        x = x_new
        if converged:
            break
    return xs, norms, converged


def grad_sigma_s(a_tilde, s: TargetSet, k: int = DEFAULT_K, tol: float = DEFAULT_TOL,
                 seed=0, shift: float | None = None) -> TermResult:
    """Eigenvector centrality of S and its gradient by reverse accumulation.

    The principal eigenvector of the full matrix is approximated by the
    unrolled power iteration x <- A x / ||A x||; the adjoint of each step is
    applied in reverse, starting from the indicator of S.

    ``shift=None`` runs the plain iteration first and, if it has not settled
    within ``k`` steps (bipartite-like spectra where lambda_n ~ -lambda_1),
    reruns it on A + c*I with c half the dominant eigenvalue magnitude.  The
    shift is a constant, so fixed point and gradient are unchanged.
    """
    a = _dense(a_tilde)
    warning = None
    ncomp, _ = sp.csgraph.connected_components(sp.csr_matrix(a != 0), directed=False)
    if ncomp > 1:
        warning = "ill-conditioned: graph is disconnected, principal eigenvector not unique"

    if shift is None:
        xs, norms, converged = _unrolled_power(a, k, tol, derive_seed(seed, 3))
        if not converged:
            shift = 0.5 * abs(power_iterate(a, k, tol, seed).value)
            xs, norms, _ = _unrolled_power(a, k, tol, derive_seed(seed, 3), shift)
    else:
        xs, norms, _ = _unrolled_power(a, k, tol, derive_seed(seed, 3), shift)
    x_final = xs[-1]
    sign = 1.0 if x_final.sum() >= 0 else -1.0
    value = sign * float(x_final @ s.indicator)

    xbar = sign * s.indicator.copy()
    steps = len(norms)
    ybars = np.empty((steps, a.shape[0]))
    for t in range(steps - 1, -1, -1):
        x_next = xs[t + 1]
        ybar = (xbar - x_next * (x_next @ xbar)) / norms[t]
        ybars[t] = ybar
        xbar = a.T @ ybar + (shift or 0.0) * ybar
    grad = ybars.T @ np.asarray(xs[:steps])
    return TermResult(value, _finish(grad), warning)


def grad_phi_s(a_tilde, s: TargetSet) -> TermResult:
    """Normalized cut of S and its closed-form gradient."""
    a = _dense(a_tilde)
    mask = s.mask
    d = a.sum(axis=1)
    cut = float(a[np.ix_(mask, ~mask)].sum())
    vol_s = float(d[mask].sum())
    vol_c = float(d[~mask].sum())
    if vol_s <= 0 or vol_c <= 0:
        raise DegeneratePartitionError(
            f"zero volume on one side of the partition (vol(S)={vol_s}, vol(S')={vol_c})")
    value = cut * (1.0 / vol_s + 1.0 / vol_c)
    grad = np.zeros_like(a)
    grad[np.ix_(mask, ~mask)] = 1.0 / vol_s + 1.0 / vol_c
    row_term = np.where(mask, cut / vol_s**2, cut / vol_c**2)
    grad -= row_term[:, None]
    return TermResult(value, _finish(grad))


def evaluate(a_tilde, s: TargetSet, weights: ObjectiveWeights, k: int = DEFAULT_K,
             tol: float = DEFAULT_TOL, seed=0) -> ObjectiveReport:
    """Weighted objective a1*lambda1(A_S) + a2*sigma(S) + a3*phi(S) with gradient.

    Terms with zero weight are not computed and report NaN.
    """
    a = _dense(a_tilde)
    n = a.shape[0]
    grad = np.zeros((n, n))
    total = 0.0
    values = {}
    warnings = []
    terms = (
        ("lambda1S", weights.a1, lambda: grad_lambda1_s(a, s, k, tol, seed)),
        ("sigmaS", weights.a2, lambda: grad_sigma_s(a, s, k, tol, seed)),
        ("phiS", weights.a3, lambda: grad_phi_s(a, s)),
    )
    for name, w, term in terms:
        if w == 0:
            values[name] = float("nan")
            continue
        res = term()
        values[name] = res.value
        total += w * res.value
        grad += w * res.gradient
        if res.warning:
            warnings.append(res.warning)
    return ObjectiveReport(values["lambda1S"], values["sigmaS"], values["phiS"], total,
                           grad, tuple(warnings))
