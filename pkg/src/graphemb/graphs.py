"""Core graph types and adjacency-vector plumbing.

All graphs in a collection live on one shared, ordered node universe, so
adjacency matrices are directly comparable entrywise.  Graphs are undirected,
weighted with nonnegative weights, and immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from graphemb.errors import DataError

LAYOUT_FULL = "full"
LAYOUT_UPPER = "upper_triangular"
LAYOUTS = (LAYOUT_FULL, LAYOUT_UPPER)

# tolerance for symmetry checks on float inputs
SYMMETRY_TOL = 1e-9


def _as_readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


def default_node_ids(n: int) -> tuple[str, ...]:
    """Auto universe for generated graphs: "0", "1", ..., str(n-1)."""
    return tuple(str(i) for i in range(n))


@dataclass(frozen=True)
class Graph:
    """An undirected weighted graph on an ordered node universe.

    Parameters
    ----------
    adjacency : (n, n) array_like
        Symmetric, nonnegative, zero-diagonal adjacency matrix.
    node_ids : sequence of str, optional
        Ordered stable node identifiers; defaults to "0".."n-1".
    """

    adjacency: np.ndarray
    node_ids: tuple[str, ...] = field(default=())

    def __post_init__(self):
        A = np.asarray(self.adjacency, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DataError(f"adjacency must be square, got shape {A.shape}")
        n = A.shape[0]
        if n == 0:
            raise DataError("empty graph: need at least one node")
        if not np.all(np.isfinite(A)):
            raise DataError("adjacency contains non-finite entries")
        if np.abs(A - A.T).max() > SYMMETRY_TOL:
            raise DataError("adjacency is not symmetric")
        if A.min() < 0:
            raise DataError("adjacency has negative weights")
        if np.abs(np.diag(A)).max() > 0:
            raise DataError("adjacency has nonzero diagonal (self-loops)")
        ids = self.node_ids
        if not ids:
            ids = default_node_ids(n)
        else:
            ids = tuple(str(i) for i in ids)
            if len(ids) != n:
                raise DataError(f"{len(ids)} node ids for {n} nodes")
            if len(set(ids)) != n:
                raise DataError("node ids are not unique")
        # exact symmetry for downstream exact comparisons
        A = (A + A.T) / 2.0
        object.__setattr__(self, "adjacency", _as_readonly(A))
        object.__setattr__(self, "node_ids", ids)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def edge_count(self) -> int:
        """Number of unordered node pairs with nonzero weight."""
        iu = np.triu_indices(self.n, k=1)
        return int(np.count_nonzero(self.adjacency[iu]))

    def degrees(self) -> np.ndarray:
        """Weighted degree vector (row sums)."""
        return self.adjacency.sum(axis=1)

    def edges(self) -> list[tuple[int, int, float]]:
        """Upper-triangular nonzero entries as (i, j, weight), i < j."""
        iu, ju = np.triu_indices(self.n, k=1)
        w = self.adjacency[iu, ju]
        nz = w != 0
        return list(zip(iu[nz].tolist(), ju[nz].tolist(), w[nz].tolist()))

    @classmethod
    def from_edges(cls, node_ids: Sequence[str] | int,
                   edges: Iterable[tuple] = ()) -> "Graph":
        """Build a graph from (i, j) or (i, j, w) index pairs.

        Duplicate pairs accumulate their weights.  ``node_ids`` may be an int
        n for the auto universe.
        """
        ids = default_node_ids(node_ids) if isinstance(node_ids, int) \
            else tuple(str(i) for i in node_ids)
        n = len(ids)
        A = np.zeros((n, n))
        for e in edges:
            if len(e) == 2:
                i, j, w = e[0], e[1], 1.0
            else:
                i, j, w = e
            if not (0 <= i < n and 0 <= j < n):
                raise DataError(f"edge ({i}, {j}) out of range for n={n}")
            if i == j:
                raise DataError(f"self-loop at node {i}")
            A[i, j] += w
            A[j, i] += w
        return cls(A, ids)


@dataclass(frozen=True)
class GraphCollection:
    """An ordered collection of graphs sharing one node universe.

    ``labels`` are optional per-graph class labels; ``names`` are optional
    per-graph identifiers used in CSV headers (default "g0".."g{m-1}").
    """

    graphs: tuple[Graph, ...]
    labels: tuple | None = None
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        graphs = tuple(self.graphs)
        if not graphs:
            raise DataError("empty collection")
        universe = graphs[0].node_ids
        for idx, g in enumerate(graphs):
            if g.node_ids != universe:
                raise DataError(f"graph {idx} is not on the shared universe")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != len(graphs):
                raise DataError(f"{len(labels)} labels for {len(graphs)} graphs")
            object.__setattr__(self, "labels", labels)
        if self.names is not None:
            names = tuple(str(x) for x in self.names)
            if len(names) != len(graphs):
                raise DataError(f"{len(names)} names for {len(graphs)} graphs")
            if len(set(names)) != len(names):
                raise DataError("graph names are not unique")
            object.__setattr__(self, "names", names)
        object.__setattr__(self, "graphs", graphs)

    @property
    def universe(self) -> tuple[str, ...]:
        return self.graphs[0].node_ids

    @property
    def n_nodes(self) -> int:
        return self.graphs[0].n

    def graph_names(self) -> tuple[str, ...]:
        if self.names is not None:
            return self.names
        return tuple(f"g{i}" for i in range(len(self.graphs)))

    def __len__(self) -> int:
        return len(self.graphs)

    def __iter__(self) -> Iterator[Graph]:
        return iter(self.graphs)

    def __getitem__(self, i: int) -> Graph:
        return self.graphs[i]


@dataclass(frozen=True)
class GraphVector:
    """A vectorized adjacency power: the DAE's input currency.

    ``layout`` records how the matrix was flattened, ``power`` the exponent r
    it was raised to.
    """

    data: np.ndarray
    layout: str
    power: int = 1

    def __post_init__(self):
        v = np.asarray(self.data, dtype=np.float64)
        if v.ndim != 1:
            raise DataError(f"vector must be 1-D, got shape {v.shape}")
        if self.layout not in LAYOUTS:
            raise DataError(f"unknown layout {self.layout!r}")
        if not isinstance(self.power, int) or self.power < 1:
            raise DataError(f"power must be a positive int, got {self.power!r}")
        n = _infer_n(len(v), self.layout)  # raises on impossible length
        del n
        if not np.all(np.isfinite(v)):
            raise DataError("vector contains non-finite entries")
        if v.size and v.min() < 0:
            raise DataError("vector has negative entries")
        object.__setattr__(self, "data", _as_readonly(v))

    @property
    def n(self) -> int:
        return _infer_n(len(self.data), self.layout)

    def __len__(self) -> int:
        return len(self.data)


def _infer_n(length: int, layout: str) -> int:
    """Node count whose vectorization has the given length, or DataError."""
    if layout == LAYOUT_FULL:
        n = int(round(np.sqrt(length)))
        if n * n != length or n == 0:
            raise DataError(f"length {length} is not a square")
        return n
    n = int((np.sqrt(8 * length + 1) - 1) / 2)
    if n * (n + 1) // 2 != length or n == 0:
        raise DataError(f"length {length} is not a triangular number")
    return n


def vector_length(n: int, layout: str) -> int:
    """Length of the vectorization of an n x n matrix under ``layout``."""
    if layout not in LAYOUTS:
        raise DataError(f"unknown layout {layout!r}")
    return n * n if layout == LAYOUT_FULL else n * (n + 1) // 2


def adjacency_power(g: Graph, r: int) -> np.ndarray:
    """r-th matrix power of the adjacency, by repeated multiplication.

    The result is symmetrized once at the end to cancel last-ulp asymmetry
    from floating accumulation order.
    """
    if not isinstance(r, int) or r < 1:
        raise DataError(f"power must be a positive int, got {r!r}")
    M = np.array(g.adjacency, copy=True)
    for _ in range(r - 1):
        M = M @ g.adjacency
    return (M + M.T) / 2.0


def vectorize(M: np.ndarray, layout: str = LAYOUT_UPPER, *,
              power: int = 1) -> GraphVector:
    """Flatten a matrix into a GraphVector.

    ``full`` stacks columns (column-major).  ``upper_triangular`` keeps
    entries (i, j) with i <= j in column-major order, halving the
    dimension for symmetric inputs; asymmetric input is rejected there.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DataError(f"matrix must be square, got shape {M.shape}")
    if layout == LAYOUT_FULL:
        return GraphVector(M.flatten(order="F"), layout, power)
    if layout != LAYOUT_UPPER:
        raise DataError(f"unknown layout {layout!r}")
    scale = max(1.0, np.abs(M).max()) if M.size else 1.0
    if np.abs(M - M.T).max() > SYMMETRY_TOL * scale:
        raise DataError("upper_triangular layout requires a symmetric matrix")
    il, jl = np.tril_indices(M.shape[0])
    # (j, i) with i <= j walked row-by-row of the lower triangle enumerates
    # the upper triangle column-major
    return GraphVector(M[jl, il], layout, power)


def devectorize(v: GraphVector) -> np.ndarray:
    """Inverse of :func:`vectorize` (symmetric completion for upper layout)."""
    n = v.n
    if v.layout == LAYOUT_FULL:
        return np.asarray(v.data).reshape((n, n), order="F").copy()
    M = np.zeros((n, n))
    il, jl = np.tril_indices(n)
    M[jl, il] = v.data
    M[il, jl] = v.data
    return M


def graph_vector(g: Graph, r: int, layout: str = LAYOUT_UPPER) -> GraphVector:
    """vectorize(adjacency_power(g, r)) with the power recorded."""
    return vectorize(adjacency_power(g, r), layout, power=r)


def permute(g: Graph, perm: Sequence[int]) -> Graph:
    """Relabel nodes: node i moves to position perm[i].

    The permuted adjacency satisfies A'[perm[i], perm[j]] = A[i, j] and node
    ids move with their nodes.
    """
    p = np.asarray(perm)
    n = g.n
    if p.shape != (n,) or not np.array_equal(np.sort(p), np.arange(n)):
        raise DataError("perm is not a permutation of 0..n-1")
    inv = np.empty(n, dtype=int)
    inv[p] = np.arange(n)
    A = g.adjacency[np.ix_(inv, inv)]
    ids = tuple(g.node_ids[inv[k]] for k in range(n))
    return Graph(A, ids)
