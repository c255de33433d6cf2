"""Graph representation, ingestion and the structural quantities built on it.

Nodes are dense 0-based integers.  Adjacency matrices are stored as CSR
matrices of 64-bit floats, symmetric with an empty diagonal.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph  # noqa: F401  (registers sp.csgraph)

from .errors import DegeneratePartitionError, GraphFormatError


@dataclass(frozen=True)
class Graph:
    """Undirected graph without self-loops.

    ``weighted=False`` promises that every stored weight is exactly 1.
    """

    n: int
    matrix: sp.csr_matrix
    weighted: bool = False

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=np.float64)
        m.eliminate_zeros()
        m.sort_indices()
        if m.shape != (self.n, self.n):
            raise ValueError(f"matrix shape {m.shape} does not match n={self.n}")
        if m.nnz:
            if np.any(m.diagonal() != 0):
                raise ValueError("self-loops are not allowed")
            if np.any(m.data < 0):
                raise ValueError("weights must be nonnegative")
            if abs(m - m.T).max() != 0:
                raise ValueError("adjacency matrix must be symmetric")
            if not self.weighted and np.any(m.data != 1.0):
                raise ValueError("unweighted graph with non-unit weights")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], weights=None,
                   weighted: bool | None = None) -> "Graph":
        edges = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if weights is None:
            w = np.ones(len(edges))
        else:
            w = np.asarray(weights, dtype=np.float64)
        rows = np.concatenate([edges[:, 0], edges[:, 1]])
        cols = np.concatenate([edges[:, 1], edges[:, 0]])
        m = sp.csr_matrix((np.concatenate([w, w]), (rows, cols)), shape=(n, n))
        if weighted is None:
            weighted = weights is not None
        return cls(n, m, weighted)

    @classmethod
    def from_dense(cls, a, weighted: bool | None = None) -> "Graph":
        a = np.asarray(a, dtype=np.float64)
        if weighted is None:
            weighted = bool(np.any((a != 0) & (a != 1)))
        return cls(a.shape[0], sp.csr_matrix(a), weighted)

    @cached_property
    def dense(self) -> np.ndarray:
        a = self.matrix.toarray()
        a.setflags(write=False)
        return a

    @property
    def num_edges(self) -> int:
        return self.matrix.nnz // 2

    def edges(self) -> list[tuple[int, int, float]]:
        """Edges as ``(i, j, w)`` with ``i < j``, in lexicographic order."""
        upper = sp.triu(self.matrix, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        return [(int(upper.row[k]), int(upper.col[k]), float(upper.data[k])) for k in order]

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        ncomp, _ = sp.csgraph.connected_components(self.matrix, directed=False)
        return ncomp == 1

    def to_edge_list(self) -> str:
        lines = []
        for i, j, w in self.edges():
            lines.append(f"{i} {j} {w!r}" if self.weighted else f"{i} {j}")
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class TargetSet:
    """Node subset S of a graph with ``n`` nodes.

    S = V is representable (induced subgraphs and certificates accept it);
    operations that need a nonempty complement check for it themselves.
    """

    n: int
    members: tuple[int, ...] = field(default=())

    def __post_init__(self):
        members = tuple(sorted({int(i) for i in self.members}))
        if not members:
            raise ValueError("target set must be nonempty")
        if members[0] < 0 or members[-1] >= self.n:
            raise ValueError(f"target node index out of range for n={self.n}")
        object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, n: int, members: Iterable[int]) -> "TargetSet":
        return cls(n, tuple(members))

    def __len__(self):
        return len(self.members)

    def __contains__(self, i):
        return i in self.index_map

    @cached_property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[list(self.members)] = True
        m.setflags(write=False)
        return m

    @cached_property
    def indicator(self) -> np.ndarray:
        x = self.mask.astype(np.float64)
        x.setflags(write=False)
        return x

    @cached_property
    def index(self) -> np.ndarray:
        return np.asarray(self.members, dtype=np.int64)

    @cached_property
    def complement(self) -> np.ndarray:
        return np.flatnonzero(~self.mask)

    @cached_property
    def index_map(self) -> dict[int, int]:
        """Global node id -> position inside the induced subgraph."""
        return {v: k for k, v in enumerate(self.members)}

    @property
    def is_proper(self) -> bool:
        return len(self.members) < self.n

    def require_proper(self):
        if not self.is_proper:
            raise DegeneratePartitionError("target set covers every node; complement is empty")


@dataclass
class Perturbation:
    """Symmetric zero-diagonal difference between a modified and an original adjacency.

    ``spec_norm`` caches the spectral norm once computed; any code that
    edits ``delta`` in place must reset it to None.
    """

    delta: np.ndarray | sp.spmatrix
    spec_norm: float | None = None

    def __post_init__(self):
        d = self.delta
        if sp.issparse(d):
            asym = abs(d - d.T).max() if d.nnz else 0.0
            diag = np.abs(d.diagonal()).max() if d.shape[0] else 0.0
        else:
            d = np.asarray(d, dtype=np.float64)
            self.delta = d
            asym = np.abs(d - d.T).max() if d.size else 0.0
            diag = np.abs(np.diag(d)).max() if d.size else 0.0
        if asym > 0 or diag > 0:
            raise ValueError("perturbation must be symmetric with zero diagonal")

    @classmethod
    def between(cls, g: Graph, g_tilde) -> "Perturbation":
        other = g_tilde.matrix if isinstance(g_tilde, Graph) else g_tilde
        if sp.issparse(other):
            return cls(sp.csr_matrix(other - g.matrix))
        return cls(np.asarray(other, dtype=np.float64) - g.dense)

    def toarray(self) -> np.ndarray:
        return self.delta.toarray() if sp.issparse(self.delta) else self.delta


def adjacency_of(g) -> np.ndarray | sp.spmatrix:
    """Matrix view of a Graph, or the argument itself if already a matrix."""
    return g.matrix if isinstance(g, Graph) else g


# -- ingestion -------------------------------------------------------------

def _lines(text) -> Iterable[str]:
    if isinstance(text, bytes):
        text = text.decode()
    if isinstance(text, str):
        text = io.StringIO(text)
    for raw in text:
        yield raw.decode() if isinstance(raw, bytes) else raw


def _parse_edges(text, weighted: bool):
    tokens = []
    for lineno, raw in enumerate(_lines(text), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphFormatError(f"expected 'u v' or 'u v w', got {line!r}", lineno)
        u, v = parts[0], parts[1]
        w = 1.0
        if len(parts) == 3:
            try:
                w = float(parts[2])
            except ValueError:
                raise GraphFormatError(f"bad weight {parts[2]!r}", lineno) from None
            if not np.isfinite(w) or w < 0:
                raise GraphFormatError(f"negative or non-finite weight {parts[2]}", lineno)
            if w == 0:
                raise GraphFormatError("zero weight; omit the edge instead", lineno)
            if not weighted and w != 1.0:
                raise GraphFormatError("weighted edge in an unweighted edge list", lineno)
        if u == v:
            raise GraphFormatError(f"self-loop on node {u}", lineno)
        tokens.append((u, v, w, lineno))
    return tokens


def load_edge_list(text: str | bytes | IO, weighted: bool = False) -> Graph:
    """Parse ``u v [w]`` lines with 0-based integer ids into a Graph.

    Blank lines and lines starting with '#' are skipped.  Each undirected
    edge may appear once, in either orientation.
    """
    graph, _ = _build(text, weighted, remap=False)
    return graph


def load_edge_list_remapped(text, weighted: bool = False) -> tuple[Graph, list[str]]:
    """Like :func:`load_edge_list` but accepts arbitrary node tokens.

    Returns the graph and the list mapping dense id -> original token, in
    order of first appearance.
    """
    return _build(text, weighted, remap=True)


def _build(text, weighted, remap):
    tokens = _parse_edges(text, weighted)
    ids: dict[str, int] = {}
    rows, cols, ws = [], [], []
    seen = set()
    for u, v, w, lineno in tokens:
        if remap:
            iu = ids.setdefault(u, len(ids))
            iv = ids.setdefault(v, len(ids))
        else:
            try:
                iu, iv = int(u), int(v)
            except ValueError:
                raise GraphFormatError(f"node ids must be integers, got {u!r} {v!r}", lineno) from None
            if iu < 0 or iv < 0:
                raise GraphFormatError("node ids must be nonnegative", lineno)
        key = (min(iu, iv), max(iu, iv))
        if key in seen:
            raise GraphFormatError(f"duplicate edge {key[0]}-{key[1]}", lineno)
        seen.add(key)
        rows.append(iu)
        cols.append(iv)
        ws.append(w)
    if remap:
        n = len(ids)
    else:
        n = max(max(rows, default=-1), max(cols, default=-1)) + 1
    g = Graph.from_edges(n, zip(rows, cols), ws, weighted=weighted)
    return g, list(ids)


def load_target_set(text, n: int) -> TargetSet:
    """One node id per line; '#' starts a comment line."""
    members = []
    for lineno, raw in enumerate(_lines(text), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            members.append(int(line.split()[0]))
        except ValueError:
            raise GraphFormatError(f"bad node id {line!r}", lineno) from None
    try:
        return TargetSet(n, tuple(members))
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from None


# -- structural quantities --------------------------------------------------

def degree_vector(g) -> np.ndarray:
    """Row sums of the adjacency matrix."""
    a = adjacency_of(g)
    return np.asarray(a.sum(axis=1)).ravel().astype(np.float64)


def cut_and_volumes(g, s: TargetSet) -> tuple[float, float, float]:
    """Return ``(cut(S, S'), vol(S), vol(S'))`` by direct summation."""
    a = adjacency_of(g)
    mask = s.mask
    d = degree_vector(a)
    if sp.issparse(a):
        cut = float(a[s.index][:, s.complement].sum())
    else:
        cut = float(a[np.ix_(mask, ~mask)].sum())
    return cut, float(d[mask].sum()), float(d[~mask].sum())


def normalized_cut(g, s: TargetSet) -> float:
    cut, vol_s, vol_c = cut_and_volumes(g, s)
    if vol_s <= 0 or vol_c <= 0:
        raise DegeneratePartitionError(
            f"zero volume on one side of the partition (vol(S)={vol_s}, vol(S')={vol_c})")
    return cut * (1.0 / vol_s + 1.0 / vol_c)


def induced_subgraph(g: Graph, s: TargetSet) -> Graph:
    """Subgraph on S; node k of the result is ``s.members[k]``."""
    sub = g.matrix[s.index][:, s.index]
    return Graph(len(s), sp.csr_matrix(sub), g.weighted)
