"""Classical distances between graphs on a shared node set.

Four families: Hamming (normalized edit mass), Jaccard (edge-set overlap),
DeltaCon (Matusita distance between belief-propagation affinities), and
Laplacian spectral distance over the combinatorial (``spectral_cl``) or
normalized (``spectral_nl``) Laplacian.  ``pairwise`` assembles full distance
matrices; with ``cache=True`` it precomputes one signature per graph where
the metric allows, with ``cache=False`` every pair is an independent
black-box call (the benchmarking protocol).  Either way entries equal the
corresponding single-pair calls.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from graphemb import kernels
from graphemb.errors import DataError, GraphembError
from graphemb.graphs import Graph, GraphCollection

LAPLACIAN_KINDS = ("combinatorial", "normalized")

GRAPH_METRICS = ("hamming", "jaccard", "deltacon", "spectral_cl",
                 "spectral_nl")
METRICS = GRAPH_METRICS + ("embedding",)


@dataclass(frozen=True)
class SpectralConfig:
    """Options for the Laplacian spectral distance.

    ``n_lambda`` counts how many of the largest eigenvalues are compared
    (None means all N of them).
    """

    laplacian: str = "combinatorial"
    n_lambda: int | None = None

    def __post_init__(self):
        if self.laplacian not in LAPLACIAN_KINDS:
            raise DataError(f"unknown laplacian kind {self.laplacian!r}")
        if self.n_lambda is not None and (not isinstance(self.n_lambda, int)
                                          or self.n_lambda < 1):
            raise DataError(f"n_lambda must be a positive int or None, "
                            f"got {self.n_lambda!r}")


@dataclass(frozen=True)
class DistanceMatrix:
    """A symmetric, nonnegative, zero-diagonal distance matrix over a
    collection, tagged with the metric that produced it."""

    values: np.ndarray
    metric: str
    normalized: bool = False
    ids: tuple[str, ...] | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DataError(f"distance matrix must be square, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DataError("distance matrix has non-finite entries")
        if np.abs(v - v.T).max(initial=0.0) > 1e-9:
            raise DataError("distance matrix is asymmetric beyond 1e-9")
        if v.size and np.abs(np.diag(v)).max() > 1e-12:
            raise DataError("distance matrix diagonal is not zero")
        if v.size and v.min() < 0:
            raise DataError("distance matrix has negative entries")
        if self.metric not in METRICS:
            raise DataError(f"unknown metric {self.metric!r}")
        if self.normalized and v.size and v.max() > 0 \
                and abs(v.max() - 1.0) > 1e-12:
            raise DataError("normalized matrix must have max 1 (or all zero)")
        if self.ids is not None:
            ids = tuple(str(x) for x in self.ids)
            if len(ids) != v.shape[0]:
                raise DataError(f"{len(ids)} ids for {v.shape[0]} rows")
            if len(set(ids)) != len(ids):
                raise DataError("distance matrix ids are not unique")
            object.__setattr__(self, "ids", ids)
        v = np.array(v, copy=True)
        np.fill_diagonal(v, 0.0)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def row_ids(self) -> tuple[str, ...]:
        if self.ids is not None:
            return self.ids
        return tuple(f"g{i}" for i in range(self.m))


def normalize(dm: DistanceMatrix) -> DistanceMatrix:
    """Scale so the largest entry is 1 (all-zero matrices pass through).

    Idempotent; metric tag and ids are preserved.
    """
    vmax = dm.values.max() if dm.values.size else 0.0
    values = dm.values / vmax if vmax > 0 else dm.values
    return DistanceMatrix(values, dm.metric, normalized=True, ids=dm.ids)


def _check_same_universe(g1: Graph, g2: Graph) -> None:
    if g1.node_ids != g2.node_ids:
        raise DataError("graphs are not on the same node universe")


def hamming_distance(g1: Graph, g2: Graph) -> float:
    """Sum of |A1 - A2| over all ordered pairs, divided by N(N-1).

    0 for identical graphs, 1 between the complete and the empty graph.
    Each undirected disagreement is counted in both orientations, matching
    the normalizer.
    """
    _check_same_universe(g1, g2)
    n = g1.n
    if n < 2:
        return 0.0
    return float(np.abs(g1.adjacency - g2.adjacency).sum() / (n * (n - 1)))


def jaccard_distance(g1: Graph, g2: Graph) -> float:
    """1 - |E1 n E2| / |E1 u E2| over unordered edge sets (weights ignored);
    two empty graphs are at distance 0 by convention."""
    _check_same_universe(g1, g2)
    iu = np.triu_indices(g1.n, k=1)
    e1 = g1.adjacency[iu] != 0
    e2 = g2.adjacency[iu] != 0
    union = int(np.count_nonzero(e1 | e2))
    if union == 0:
        return 0.0
    inter = int(np.count_nonzero(e1 & e2))
    return float((union - inter) / union)


def default_deltacon_eps(g1: Graph, g2: Graph) -> float:
    """1 / (1 + max weighted degree across both graphs)."""
    dmax = max(g1.degrees().max(initial=0.0), g2.degrees().max(initial=0.0))
    return 1.0 / (1.0 + dmax)


def _deltacon_sqrt_affinity(g: Graph, eps: float) -> np.ndarray:
    """Entrywise sqrt of the belief-propagation affinity matrix
    S = (I + eps^2 D - eps A)^{-1}.

    For eps <= 1/(1 + max degree) the inverted matrix is symmetric strictly
    diagonally dominant with nonpositive off-diagonal (an M-matrix), so S is
    entrywise nonnegative; the clamp at 0 only absorbs last-ulp noise.
    """
    A = g.adjacency
    deg = g.degrees()
    n = g.n
    M = -eps * A
    M[np.diag_indices(n)] = 1.0 + (eps * eps) * deg
    S = np.linalg.inv(M)
    return np.sqrt(np.maximum(S, 0.0))


def deltacon_distance(g1: Graph, g2: Graph, eps: float | None = None) -> float:
    """Matusita distance between belief-propagation affinity matrices:
    sqrt(sum_ij (sqrt(S1_ij) - sqrt(S2_ij))^2).

    ``eps`` defaults to 1/(1 + max degree over both graphs); values above
    that bound would break the diagonal dominance that keeps the affinity
    system nonsingular and are rejected.
    """
    _check_same_universe(g1, g2)
    bound = default_deltacon_eps(g1, g2)
    if eps is None:
        eps = bound
    if not (0.0 < eps <= bound + 1e-15):
        raise DataError(f"eps must lie in (0, {bound:.6g}], got {eps!r}")
    r1 = _deltacon_sqrt_affinity(g1, eps)
    r2 = _deltacon_sqrt_affinity(g2, eps)
    return float(np.sqrt(((r1 - r2) ** 2).sum()))


def symmetric_eigenvalues(M: np.ndarray, *, compute_vectors: bool = False):
    """Ascending eigenvalues of a symmetric matrix via cyclic Jacobi
    rotations (compiled kernel when available).

    Asymmetry beyond 1e-9 is rejected.  The iteration stops once the
    off-diagonal Frobenius norm falls below 1e-10 times ||M||_F.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DataError(f"matrix must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DataError("matrix has non-finite entries")
    if M.size and np.abs(M - M.T).max() > 1e-9:
        raise DataError("matrix is asymmetric beyond 1e-9")
    return kernels.jacobi_eigh(M, compute_vectors=compute_vectors)


def laplacian(g: Graph, kind: str = "combinatorial") -> np.ndarray:
    """Graph Laplacian: D - A, or I - D^{-1/2} A D^{-1/2} (normalized).

    Zero-degree nodes take D^{-1/2} = 0, so an isolated node leaves a bare
    diagonal 1 in the normalized Laplacian.
    """
    if kind not in LAPLACIAN_KINDS:
        raise DataError(f"unknown laplacian kind {kind!r}")
    deg = g.degrees()
    if kind == "combinatorial":
        return np.diag(deg) - g.adjacency
    dinv = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
    L = np.eye(g.n) - (dinv[:, None] * g.adjacency) * dinv[None, :]
    return (L + L.T) / 2.0


def _top_eigenvalues(g: Graph, cfg: SpectralConfig) -> np.ndarray:
    """The n_lambda largest Laplacian eigenvalues, descending."""
    k = cfg.n_lambda if cfg.n_lambda is not None else g.n
    if k > g.n:
        raise DataError(f"n_lambda={k} exceeds node count {g.n}")
    w = symmetric_eigenvalues(laplacian(g, cfg.laplacian))
    return w[::-1][:k]


def spectral_distance(g1: Graph, g2: Graph,
                      cfg: SpectralConfig | None = None) -> float:
    """Euclidean distance between the descending vectors of the n_lambda
    largest Laplacian eigenvalues of the two graphs.

    Only equal node counts are required (no universe correspondence): the
    spectrum is permutation invariant.
    """
    if g1.n != g2.n:
        raise DataError(f"node counts differ: {g1.n} vs {g2.n}")
    cfg = cfg or SpectralConfig()
    w1 = _top_eigenvalues(g1, cfg)
    w2 = _top_eigenvalues(g2, cfg)
    return float(np.sqrt(((w1 - w2) ** 2).sum()))


def _metric_fn(metric: str, cfg: SpectralConfig | None):
    if metric == "hamming":
        return hamming_distance
    if metric == "jaccard":
        return jaccard_distance
    if metric == "deltacon":
        return deltacon_distance
    if metric in ("spectral_cl", "spectral_nl"):
        kind = "combinatorial" if metric == "spectral_cl" else "normalized"
        c = SpectralConfig(kind, cfg.n_lambda if cfg else None)
        return lambda a, b: spectral_distance(a, b, c)
    raise DataError(f"unknown graph metric {metric!r}")


def graph_distance(g1: Graph, g2: Graph, metric: str,
                   cfg: SpectralConfig | None = None) -> float:
    """Single-pair dispatch over the graph metrics."""
    return _metric_fn(metric, cfg)(g1, g2)


def resolve_threads(threads: int | None) -> int:
    """Explicit count, else env GRAPHEMB_THREADS, else 1."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("GRAPHEMB_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DataError(f"GRAPHEMB_THREADS={env!r} is not an integer")
    return 1


def _pairwise_from_signatures(sig: list, dist) -> np.ndarray:
    m = len(sig)
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            out[i, j] = out[j, i] = dist(sig[i], sig[j])
    return out


def pairwise(collection: GraphCollection, metric: str,
             cfg: SpectralConfig | None = None, *, cache: bool = True,
             threads: int | None = None) -> DistanceMatrix:
    """Full distance matrix over a collection for one graph metric.

    With ``cache=True`` a per-graph signature (adjacency half-vector, edge
    mask, Laplacian spectrum) is computed once and pairs reduce from
    signatures; entries are identical to per-pair calls.  DeltaCon gets no
    signature: its default eps depends on the pair's joint max degree, so
    pairs are always direct calls.  ``cache=False`` calls the two-graph
    distance for every pair; that is the timing protocol cmd_bench reports.

    ``threads`` (or env GRAPHEMB_THREADS) parallelizes the signature pass;
    results do not depend on the thread count.
    """
    if metric == "embedding":
        raise DataError("embedding distances require an EmbeddingMatrix; "
                        "see graphemb.embedding.pairwise_embedding_distances")
    if metric not in GRAPH_METRICS:
        raise DataError(f"unknown graph metric {metric!r}")
    graphs = list(collection)
    m = len(graphs)
    nthreads = resolve_threads(threads)
    ids = collection.graph_names()

    if not cache or metric == "deltacon":
        fn = _metric_fn(metric, cfg)
        out = np.zeros((m, m))
        for i in range(m):
            gi = graphs[i]
            for j in range(i + 1, m):
                try:
                    out[i, j] = out[j, i] = fn(gi, graphs[j])
                except GraphembError as exc:
                    raise type(exc)(f"pair ({i}, {j}): {exc}") from exc
        return DistanceMatrix(out, metric, ids=ids)

    def _map(fn, items):
        def wrapped(pair):
            idx, item = pair
            try:
                return fn(item)
            except GraphembError as exc:
                raise type(exc)(f"graph {idx}: {exc}") from exc
        if nthreads == 1:
            return [wrapped(p) for p in enumerate(items)]
        with ThreadPoolExecutor(max_workers=nthreads) as ex:
            return list(ex.map(wrapped, enumerate(items)))

    n = collection.n_nodes
    iu = np.triu_indices(n, k=1)
    if metric == "hamming":
        sig = [g.adjacency[iu] for g in graphs]
        if n > 1:
            dist = lambda a, b: 2.0 * float(np.abs(a - b).sum()) / (n * (n - 1))
        else:
            dist = lambda a, b: 0.0
        values = _pairwise_from_signatures(sig, dist)
    elif metric == "jaccard":
        sig = [g.adjacency[iu] != 0 for g in graphs]

        def dist(a, b):
            union = int(np.count_nonzero(a | b))
            if union == 0:
                return 0.0
            return (union - int(np.count_nonzero(a & b))) / union

        values = _pairwise_from_signatures(sig, dist)
    else:
        kind = "combinatorial" if metric == "spectral_cl" else "normalized"
        c = SpectralConfig(kind, cfg.n_lambda if cfg else None)
        sig = _map(lambda g: _top_eigenvalues(g, c), graphs)
        dist = lambda a, b: float(np.sqrt(((a - b) ** 2).sum()))
        values = _pairwise_from_signatures(sig, dist)

    return DistanceMatrix(values, metric, ids=ids)
