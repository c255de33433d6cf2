"""Power iteration, spectral norms of symmetric perturbations, dense spectra."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import SpectrumTooLargeError, ZeroImageError
from .graph import Perturbation, adjacency_of

DEFAULT_K = 50
DEFAULT_TOL = 1e-10
DENSE_CAP = 2000


@dataclass
class EigenEstimate:
    value: float
    vector: np.ndarray
    iterations: int
    residual: float
    converged: bool = True


def derive_seed(seed, *tags: int) -> tuple[int, ...]:
    """Child seed for an independent stream; seeds are ints or int tuples."""
    base = tuple(seed) if isinstance(seed, (tuple, list)) else (int(seed),)
    return base + tags


def start_vector(n: int, seed) -> np.ndarray:
    """Seeded uniform-random unit vector with positive entries."""
    x = np.random.default_rng(seed).random(n) + 1e-3
    return x / np.linalg.norm(x)


def _iterate(apply, x, k, tol):
    """Plain normalized iteration; returns (x, steps, converged)."""
    for t in range(1, k + 1):
        y = apply(x)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return x, t, True
        y /= ny
        s = 1.0 if y @ x >= 0 else -1.0
        diff = np.linalg.norm(y - s * x)
        x = y
        if diff < tol:
            return x, t, True
    return x, k, False


def power_iterate(m, k: int = DEFAULT_K, tol: float = DEFAULT_TOL, seed=0,
                  x0: np.ndarray | None = None) -> EigenEstimate:
    """Dominant (largest-magnitude) eigenpair of a symmetric matrix.

    The value is the signed Rayleigh quotient of the iterate.  When the
    iterate has not settled after ``k`` steps (typically because
    ``|lambda_1| ~ |lambda_n|``) the iteration continues on ``m @ m``; the
    magnitude is then the square root of that Rayleigh quotient and the sign
    is resolved by splitting the iterate into its ``+|lambda|`` and
    ``-|lambda|`` eigenspace components, preferring the positive one.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    m = adjacency_of(m)
    n = m.shape[0]
    apply = m.__matmul__

    x = start_vector(n, seed) if x0 is None else np.asarray(x0, dtype=np.float64) / np.linalg.norm(x0)
    for attempt in range(4):
        if np.linalg.norm(apply(x)) > 0:
            break
        if attempt == 3:
            raise ZeroImageError("matrix maps every trial start vector to zero")
        x = start_vector(n, derive_seed(seed, 2, attempt))

    x, steps, converged = _iterate(apply, x, k, tol)
    if converged:
        mx = apply(x)
        value = float(x @ mx)
        return EigenEstimate(value, x, steps, float(np.linalg.norm(mx - value * x)), True)

    x, extra, converged = _iterate(lambda v: apply(apply(v)), x, k, tol)
    mx = apply(x)
    lam = float(np.linalg.norm(mx))  # sqrt of the Rayleigh quotient of m @ m
    pos = mx + lam * x
    neg = mx - lam * x
    if np.linalg.norm(pos) >= np.linalg.norm(neg):
        v, value = pos, lam
    else:
        v, value = neg, -lam
    v = v / np.linalg.norm(v)
    residual = float(np.linalg.norm(apply(v) - value * v))
    return EigenEstimate(value, v, steps + extra, residual, converged)


def principal_eigenvector(m, k: int = DEFAULT_K, tol: float = DEFAULT_TOL, seed=0) -> EigenEstimate:
    """Power-iteration eigenpair with the vector signed to have nonnegative sum."""
    est = power_iterate(m, k, tol, seed)
    if est.vector.sum() < 0:
        est.vector = -est.vector
    return est


def spectral_norm(p, k: int = DEFAULT_K, tol: float = DEFAULT_TOL, seed=0) -> float:
    """``max(|lambda_1(D)|, |lambda_1(-D)|)`` for a symmetric perturbation D.

    Accepts a :class:`Perturbation` (result cached on it) or a bare matrix.
    """
    delta = p.delta if isinstance(p, Perturbation) else p
    if sp.issparse(delta):
        zero = delta.nnz == 0 or abs(delta).max() == 0
    else:
        delta = np.asarray(delta, dtype=np.float64)
        zero = not np.any(delta)
    if zero:
        norm = 0.0
    else:
        a = abs(power_iterate(delta, k, tol, seed).value)
        b = abs(power_iterate(-delta, k, tol, derive_seed(seed, 1)).value)
        norm = max(a, b)
    if isinstance(p, Perturbation):
        p.spec_norm = norm
    return norm


def full_spectrum(m, cap: int = DENSE_CAP) -> np.ndarray:
    """All eigenvalues of a symmetric matrix, descending (LAPACK ``syevd``)."""
    m = adjacency_of(m)
    if m.shape[0] > cap:
        raise SpectrumTooLargeError(f"dimension {m.shape[0]} exceeds dense cap {cap}")
    dense = m.toarray() if sp.issparse(m) else np.asarray(m, dtype=np.float64)
    return np.linalg.eigvalsh(dense)[::-1]


def max_eigenvalue_shift(a, a_tilde, cap: int = DENSE_CAP) -> float:
    """``max_i |lambda_i(a_tilde) - lambda_i(a)|`` with both spectra sorted."""
    return float(np.max(np.abs(full_spectrum(a_tilde, cap) - full_spectrum(a, cap))))
