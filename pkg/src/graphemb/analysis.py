"""Evaluation stack: spectral clustering (Ng-Jordan-Weiss), k-means,
agglomerative hierarchical clustering, NMI, and a classical-MDS 2-D layout.

All routines are deterministic given their seed; the spectral-clustering
seed stream is keyed to the similarity matrix content so simultaneous
row/column reorderings see the same stream.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from graphemb.distances import DistanceMatrix
from graphemb.errors import DataError

KMEANS_TOL = 1e-8
KMEANS_MAX_ITER = 300
LINKAGES = ("average", "single", "complete")


@dataclass(frozen=True)
class ClusterAssignment:
    """Flat clustering: integer label in 0..k-1 per item."""

    labels: tuple[int, ...]
    k: int

    def __post_init__(self):
        labels = tuple(int(x) for x in self.labels)
        if not isinstance(self.k, int) or self.k < 1:
            raise DataError(f"k must be a positive int, got {self.k!r}")
        if any(not (0 <= x < self.k) for x in labels):
            raise DataError("labels must lie in 0..k-1")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class Dendrogram:
    """Agglomerative merge history: (cluster_a, cluster_b, height, new_id)
    per merge; leaves are 0..n_leaves-1, merge t creates id n_leaves+t."""

    merges: tuple[tuple[int, int, float, int], ...]
    n_leaves: int

    def __post_init__(self):
        merges = tuple((int(a), int(b), float(h), int(nid))
                       for a, b, h, nid in self.merges)
        if self.n_leaves < 2:
            raise DataError("dendrogram needs at least 2 leaves")
        if len(merges) != self.n_leaves - 1:
            raise DataError(f"{len(merges)} merges for {self.n_leaves} "
                            f"leaves (expected n_leaves - 1)")
        object.__setattr__(self, "merges", merges)


def similarity_from_distance(dm: DistanceMatrix) -> np.ndarray:
    """S = 1 - D entrywise; requires a normalized distance matrix so values
    land in [0, 1] with a unit diagonal."""
    if not dm.normalized:
        raise DataError("similarity_from_distance requires a normalized "
                        "distance matrix (see distances.normalize)")
    return 1.0 - dm.values


def _content_key(S: np.ndarray) -> int:
    """Permutation-invariant digest of the similarity content, used to key
    the clustering seed stream."""
    h = hashlib.sha256(np.sort(S, axis=None).tobytes())
    return int.from_bytes(h.digest()[:8], "big")


def kmeans(points: np.ndarray, k: int, restarts: int = 20, seed: int = 0
           ) -> ClusterAssignment:
    """Best-of-restarts Lloyd iterations with k-means++ seeding.

    Convergence at centroid shift < 1e-8 or 300 iterations; an emptied
    cluster is re-seeded from the point farthest from its centroid.
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2:
        raise DataError(f"points must be 2-D, got shape {X.shape}")
    m = X.shape[0]
    if not (1 <= k <= m):
        raise DataError(f"k={k} out of range for {m} points")
    rng = np.random.default_rng(seed)
    best_labels = None
    best_cost = np.inf
    for _ in range(max(1, restarts)):
        centers = _kmeans_pp(X, k, rng)
        labels, cost = _lloyd(X, centers, k)
        if cost < best_cost - 1e-15:
            best_cost = cost
            best_labels = labels
    return ClusterAssignment(tuple(int(x) for x in best_labels), k)


def _kmeans_pp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    m = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    first = int(rng.integers(m))
    centers[0] = X[first]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            pick = int(rng.integers(m))
        else:
            pick = int(rng.choice(m, p=d2 / total))
        centers[j] = X[pick]
        d2 = np.minimum(d2, ((X - centers[j]) ** 2).sum(axis=1))
    return centers


def _lloyd(X: np.ndarray, centers: np.ndarray, k: int):
    m = X.shape[0]
    centers = centers.copy()
    labels = np.zeros(m, dtype=int)
    for _ in range(KMEANS_MAX_ITER):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        new_centers = centers.copy()
        for j in range(k):
            members = labels == j
            if members.any():
                new_centers[j] = X[members].mean(axis=0)
            else:
                # re-seed an emptied cluster from the farthest point
                far = int(d2[np.arange(m), labels].argmax())
                new_centers[j] = X[far]
        shift = float(np.abs(new_centers - centers).max())
        centers = new_centers
        if shift < KMEANS_TOL:
            break
    d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    cost = float(d2[np.arange(m), labels].sum())
    return labels, cost


def spectral_clustering(S: np.ndarray, k: int, seed: int = 0
                        ) -> ClusterAssignment:
    """Ng-Jordan-Weiss: eigenvectors of the k smallest eigenvalues of
    L_sym = I - D^{-1/2} S D^{-1/2}, rows normalized to unit length (zero
    rows left alone), then k-means++ with 20 restarts.

    The k-means seed stream combines ``seed`` with a permutation-invariant
    content key of S, so reordering rows/columns reproduces the same
    partition of the same items.
    """
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DataError(f"similarity must be square, got {S.shape}")
    m = S.shape[0]
    if np.abs(S - S.T).max(initial=0.0) > 1e-9:
        raise DataError("similarity matrix is asymmetric beyond 1e-9")
    if S.size and S.min() < -1e-12:
        raise DataError("similarity matrix has negative entries")
    if not (1 <= k <= m):
        raise DataError(f"k={k} out of range for m={m}")
    S = np.maximum((S + S.T) / 2.0, 0.0)
    deg = S.sum(axis=1)
    dinv = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
    L = np.eye(m) - (dinv[:, None] * S) * dinv[None, :]
    L = (L + L.T) / 2.0
    w, V = np.linalg.eigh(L)
    U = V[:, :k]
    norms = np.linalg.norm(U, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    U = U / safe[:, None]
    mixed = np.random.SeedSequence([seed, _content_key(S)])
    km_seed = int(mixed.generate_state(1)[0])
    return kmeans(U, k, restarts=20, seed=km_seed)


def nmi(ct, cp) -> float:
    """Normalized mutual information 2 I(ct; cp) / (H(ct) + H(cp)) with
    natural logs and the 0 log 0 := 0 convention; two trivial partitions
    (zero denominator) score 1 by convention."""
    ct = np.asarray(ct)
    cp = np.asarray(cp)
    if ct.ndim != 1 or cp.ndim != 1 or len(ct) != len(cp):
        raise DataError(f"label vectors must match: {ct.shape} vs {cp.shape}")
    if len(ct) == 0:
        raise DataError("empty label vectors")
    _, ti = np.unique(ct, return_inverse=True)
    _, pi = np.unique(cp, return_inverse=True)
    n = len(ct)
    R = ti.max() + 1
    C = pi.max() + 1
    cont = np.zeros((R, C))
    np.add.at(cont, (ti, pi), 1.0)
    pxy = cont / n
    px = pxy.sum(axis=1)
    py = pxy.sum(axis=0)
    nz = pxy > 0
    mi = float((pxy[nz] * np.log(pxy[nz]
                                 / (px[:, None] * py[None, :])[nz])).sum())
    hx = float(-(px[px > 0] * np.log(px[px > 0])).sum())
    hy = float(-(py[py > 0] * np.log(py[py > 0])).sum())
    if hx + hy == 0.0:
        return 1.0
    return float(min(1.0, max(0.0, 2.0 * mi / (hx + hy))))


def hierarchical_cluster(dm: DistanceMatrix, linkage: str = "average"
                         ) -> Dendrogram:
    """Agglomerative clustering by Lance-Williams updates.

    Merge ties are broken by the smallest (cluster_a, cluster_b) id pair;
    merge t creates cluster id m + t.
    """
    if linkage not in LINKAGES:
        raise DataError(f"unknown linkage {linkage!r}")
    m = dm.m
    if m < 2:
        raise DataError("hierarchical clustering needs at least 2 items")
    dist: dict[tuple[int, int], float] = {}
    for i in range(m):
        for j in range(i + 1, m):
            dist[(i, j)] = float(dm.values[i, j])
    sizes = {i: 1 for i in range(m)}
    active = list(range(m))
    merges = []
    next_id = m
    for _ in range(m - 1):
        best = None
        for ai in range(len(active)):
            for bi in range(ai + 1, len(active)):
                a, b = active[ai], active[bi]
                d = dist[(a, b) if a < b else (b, a)]
                if best is None or d < best[0]:
                    best = (d, a, b)
        d, a, b = best
        merges.append((a, b, d, next_id))
        na, nb = sizes[a], sizes[b]
        for c in active:
            if c == a or c == b:
                continue
            dac = dist.pop((a, c) if a < c else (c, a))
            dbc = dist.pop((b, c) if b < c else (c, b))
            if linkage == "average":
                dnew = (na * dac + nb * dbc) / (na + nb)
            elif linkage == "single":
                dnew = min(dac, dbc)
            else:
                dnew = max(dac, dbc)
            dist[(c, next_id)] = dnew
        dist.pop((a, b) if a < b else (b, a))
        active = [c for c in active if c not in (a, b)] + [next_id]
        sizes[next_id] = na + nb
        next_id += 1
    return Dendrogram(tuple(merges), m)


def cut_dendrogram(dd: Dendrogram, k: int) -> ClusterAssignment:
    """Flat clustering with k clusters: apply the first m-k merges, then
    number the surviving clusters by their smallest leaf."""
    m = dd.n_leaves
    if not (1 <= k <= m):
        raise DataError(f"k={k} out of range for {m} leaves")
    parent = {}
    for a, b, _, nid in dd.merges[:m - k]:
        parent[a] = nid
        parent[b] = nid

    def find(x):
        while x in parent:
            x = parent[x]
        return x

    roots = [find(i) for i in range(m)]
    first_leaf = {}
    for i, r in enumerate(roots):
        first_leaf.setdefault(r, i)
    order = {r: rank for rank, r in
             enumerate(sorted(first_leaf, key=first_leaf.get))}
    return ClusterAssignment(tuple(order[r] for r in roots), k)


def mds_layout(dm: DistanceMatrix, out_dim: int = 2) -> np.ndarray:
    """Classical MDS: double-center -1/2 J D^2 J, keep the top ``out_dim``
    eigenpairs, scale eigenvectors by sqrt(max(eigenvalue, 0)).

    Axis signs are fixed so the first nonzero coordinate of each axis is
    positive.
    """
    m = dm.m
    if not (1 <= out_dim <= m):
        raise DataError(f"out_dim={out_dim} out of range for m={m}")
    D2 = dm.values ** 2
    J = np.eye(m) - np.full((m, m), 1.0 / m)
    B = -0.5 * (J @ D2 @ J)
    B = (B + B.T) / 2.0
    w, V = np.linalg.eigh(B)
    order = np.argsort(w)[::-1][:out_dim]
    coords = V[:, order] * np.sqrt(np.maximum(w[order], 0.0))[None, :]
    for j in range(coords.shape[1]):
        col = coords[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if len(nz) and col[nz[0]] < 0:
            coords[:, j] = -col
    return coords
