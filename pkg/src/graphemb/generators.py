"""Synthetic graph collection generators.

Four kinds: Erdos-Renyi, Barabasi-Albert preferential attachment, a
degree-corrected planted partition (heterogeneous community sizes, power-law
degrees, mixing parameter mu = external stub fraction), and a dynamic
edge-churn sequence with regime change points.  Every generator is
deterministic given its seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from graphemb.errors import DataError
from graphemb.graphs import Graph, GraphCollection

GENERATOR_KINDS = ("erdos_renyi", "barabasi_albert", "planted_partition",
                   "dynamic_sequence")


@dataclass(frozen=True)
class DynamicParams:
    """Edge-churn dynamics: per-step rewiring fraction, base add/delete
    probabilities, and (time, new p_add, new p_del) change points."""

    p_rewire: float = 0.05
    p_add_base: float = 0.015
    p_del_base: float = 0.015
    change_points: tuple[tuple[int, float, float], ...] = ()

    def __post_init__(self):
        for name, p in (("p_rewire", self.p_rewire),
                        ("p_add_base", self.p_add_base),
                        ("p_del_base", self.p_del_base)):
            if not (0.0 <= p <= 1.0):
                raise DataError(f"{name} must be in [0, 1], got {p!r}")
        cps = tuple((int(t), float(pa), float(pd))
                    for t, pa, pd in self.change_points)
        last = None
        for t, pa, pd in cps:
            if last is not None and t <= last:
                raise DataError("change_points must be strictly increasing "
                                "in time")
            last = t
            for p in (pa, pd):
                if not (0.0 <= p <= 1.0):
                    raise DataError(f"change-point probability {p!r} "
                                    f"outside [0, 1]")
        object.__setattr__(self, "change_points", cps)


@dataclass(frozen=True)
class GeneratorSpec:
    """Serializable description of one generator run: kind, node count,
    kind-specific params, seed, and how many graphs to emit."""

    kind: str
    n: int
    params: dict = field(default_factory=dict)
    seed: int = 0
    count: int = 1

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise DataError(f"unknown generator kind {self.kind!r}")
        if not isinstance(self.n, int) or self.n < 2:
            raise DataError(f"n must be an int >= 2, got {self.n!r}")
        if not isinstance(self.count, int) or self.count < 1:
            raise DataError(f"count must be an int >= 1, got {self.count!r}")
        for key, value in self.params.items():
            if key.startswith("p_") or key in ("p", "mu"):
                if not (isinstance(value, (int, float))
                        and 0.0 <= float(value) <= 1.0):
                    raise DataError(f"parameter {key}={value!r} must be a "
                                    f"probability in [0, 1]")


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _er_adjacency(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(len(iu)) < p
    A = np.zeros((n, n))
    A[iu[mask], ju[mask]] = 1.0
    A[ju[mask], iu[mask]] = 1.0
    return A


def gen_erdos_renyi(n: int, p: float, seed=0) -> Graph:
    """G(n, p): each unordered pair is an edge independently with
    probability p."""
    if not (0.0 <= p <= 1.0):
        raise DataError(f"p must be in [0, 1], got {p!r}")
    if n < 2:
        raise DataError(f"n must be >= 2, got {n}")
    return Graph(_er_adjacency(n, p, _rng(seed)))


def gen_barabasi_albert(n: int, m_attach: int, seed=0) -> Graph:
    """Preferential attachment from an m_attach-node seed clique; each new
    node attaches to m_attach distinct existing nodes chosen proportionally
    to current degree (uniformly while all degrees are zero)."""
    if not (1 <= m_attach < n):
        raise DataError(f"need 1 <= m_attach < n, got m_attach={m_attach}, "
                        f"n={n}")
    rng = _rng(seed)
    A = np.zeros((n, n))
    # degree-proportional sampling via the repeated-nodes trick
    repeated: list[int] = []
    for i in range(m_attach):
        for j in range(i + 1, m_attach):
            A[i, j] = A[j, i] = 1.0
        repeated.extend([i] * (m_attach - 1))
    for new in range(m_attach, n):
        chosen: set[int] = set()
        while len(chosen) < m_attach:
            if repeated:
                pick = repeated[int(rng.integers(len(repeated)))]
            else:
                pick = int(rng.integers(new))
            chosen.add(pick)
        for tgt in sorted(chosen):
            A[new, tgt] = A[tgt, new] = 1.0
            repeated.append(tgt)
        repeated.extend([new] * m_attach)
    return Graph(A)


def _truncated_powerlaw_mean(dmin: float, dmax: float, gamma: float) -> float:
    """Mean of the continuous truncated power law pdf ~ x^-gamma on
    [dmin, dmax]."""
    if abs(gamma - 1.0) < 1e-12:
        z = np.log(dmax / dmin)
        return (dmax - dmin) / z
    if abs(gamma - 2.0) < 1e-12:
        z = (dmax ** (1 - gamma) - dmin ** (1 - gamma)) / (1 - gamma)
        return np.log(dmax / dmin) / z
    z = (dmax ** (1 - gamma) - dmin ** (1 - gamma)) / (1 - gamma)
    m1 = (dmax ** (2 - gamma) - dmin ** (2 - gamma)) / (2 - gamma)
    return m1 / z


def _powerlaw_degrees(n: int, gamma: float, avg_degree: float, dmax: float,
                      rng: np.random.Generator) -> np.ndarray:
    """Integer degree sequence with approximately the requested mean:
    solve the lower cutoff by bisection on the continuous mean, sample by
    inverse CDF, then round."""
    if avg_degree >= dmax:
        raise DataError(f"avg_degree {avg_degree} must be below the degree "
                        f"cutoff {dmax}")
    lo, hi = 1e-6, dmax - 1e-9
    if _truncated_powerlaw_mean(hi, dmax, gamma) < avg_degree:
        raise DataError("degree target infeasible under the cutoff")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _truncated_powerlaw_mean(mid, dmax, gamma) < avg_degree:
            lo = mid
        else:
            hi = mid
    dmin = 0.5 * (lo + hi)
    u = rng.random(n)
    if abs(gamma - 1.0) < 1e-12:
        x = dmin * (dmax / dmin) ** u
    else:
        a = 1.0 - gamma
        x = (dmin ** a + u * (dmax ** a - dmin ** a)) ** (1.0 / a)
    deg = np.clip(np.round(x).astype(int), 1, n - 1)
    return deg


def _heterogeneous_sizes(n: int, k: int, s_min: int, s_max: int,
                         rng: np.random.Generator) -> np.ndarray:
    if not (k * s_min <= n <= k * s_max):
        raise DataError(f"cannot split {n} nodes into {k} communities with "
                        f"sizes in [{s_min}, {s_max}]")
    sizes = rng.integers(s_min, s_max + 1, size=k)
    diff = n - int(sizes.sum())
    guard = 0
    while diff != 0:
        guard += 1
        if guard > 100000:
            raise DataError("community size adjustment failed to converge")
        i = int(rng.integers(k))
        if diff > 0 and sizes[i] < s_max:
            sizes[i] += 1
            diff -= 1
        elif diff < 0 and sizes[i] > s_min:
            sizes[i] -= 1
            diff += 1
    return sizes


def _pair_stubs(stubs: np.ndarray, rng: np.random.Generator,
                existing: set, max_rounds: int = 50) -> list[tuple[int, int]]:
    """Configuration-model pairing: shuffle stubs, pair consecutively, drop
    self-loops and already-present pairs.  Stubs freed by a dropped pair are
    re-shuffled and re-paired for up to max_rounds rounds (or until a round
    makes no progress); whatever remains is dropped, including one odd
    leftover stub per pool."""
    pairs: list[tuple[int, int]] = []
    seen = set(existing)
    stubs = np.asarray(stubs)
    for _ in range(max_rounds):
        if len(stubs) < 2:
            break
        stubs = stubs[rng.permutation(len(stubs))]
        leftover = []
        if len(stubs) % 2 == 1:
            leftover.append(int(stubs[-1]))
            stubs = stubs[:-1]
        progressed = False
        for t in range(len(stubs) // 2):
            u, v = int(stubs[2 * t]), int(stubs[2 * t + 1])
            e = (u, v) if u < v else (v, u)
            if u == v or e in seen:
                leftover.extend((u, v))
                continue
            seen.add(e)
            pairs.append(e)
            progressed = True
        if not progressed:
            stubs = np.array(leftover, dtype=int)
            break
        stubs = np.array(leftover, dtype=int)
    # greedy completion: random shuffling rarely lands the last few stubs
    # of a near-saturated pool on exactly the missing pairs, so match the
    # remaining multiset directly before dropping what is left
    counts: dict[int, int] = {}
    for s in stubs:
        counts[int(s)] = counts.get(int(s), 0) + 1
    nodes = np.array(sorted(counts), dtype=int)
    nodes = nodes[rng.permutation(len(nodes))]
    for a in range(len(nodes)):
        u = int(nodes[a])
        if counts[u] == 0:
            continue
        for b in range(a + 1, len(nodes)):
            v = int(nodes[b])
            if counts[u] == 0:
                break
            if counts[v] == 0:
                continue
            e = (u, v) if u < v else (v, u)
            if e in seen:
                continue
            seen.add(e)
            pairs.append(e)
            counts[u] -= 1
            counts[v] -= 1
    return pairs


def gen_planted_partition(n: int, k_communities: int, mu: float,
                          avg_degree: float, degree_exponent: float = 2.0,
                          seed=0, *, s_min: int | None = None,
                          s_max: int | None = None
                          ) -> tuple[Graph, tuple[int, ...]]:
    """Degree-corrected planted partition.

    Draws a power-law degree sequence (exponent ``degree_exponent``, mean
    ``avg_degree``), splits nodes into ``k_communities`` of heterogeneous
    sizes, routes a fraction (1 - mu) of each node's stubs into its own
    community and mu into a global pool, then pairs stubs configuration-
    model style (self-loops, duplicate pairs, and odd leftover stubs are
    dropped, with leftover stubs re-paired for several rounds first).

    Internal degrees are clipped to the largest community capacity, and
    nodes are assigned to communities that can host their internal degree
    (highest-degree nodes placed first), so the realized mean degree stays
    close to the target.  Returns the graph and per-node community labels.
    """
    if not (2 <= k_communities <= n):
        raise DataError(f"need 2 <= k <= n, got k={k_communities}, n={n}")
    if not (0.0 <= mu <= 1.0):
        raise DataError(f"mu must be in [0, 1], got {mu!r}")
    rng = _rng(seed)
    k = k_communities
    if s_min is None:
        s_min = max(2, (2 * n) // (3 * k))
    if s_max is None:
        s_max = min(n, ((3 * n) // (2 * k)) + 1)
    sizes = _heterogeneous_sizes(n, k, s_min, s_max, rng)
    dmax_cut = min(n - 1, max(int(np.ceil(3 * avg_degree)), 3))
    deg = _powerlaw_degrees(n, degree_exponent, avg_degree, dmax_cut, rng)
    ext = np.round(mu * deg).astype(int)
    internal = deg - ext
    # no community can host an internal degree above its size - 1
    cap = int(sizes.max()) - 1
    over = internal > cap
    if mu > 0.0:
        ext[over] += internal[over] - cap
    internal[over] = cap

    # place high-internal-degree nodes first, into communities with free
    # slots that can host them (probability ~ free slots); infeasible nodes
    # fall back to the roomiest community and lose stubs in pairing
    order = rng.permutation(n)
    order = order[np.argsort(-internal[order], kind="stable")]
    free = sizes.astype(int).copy()
    labels = np.full(n, -1, dtype=int)
    for node in order:
        open_c = np.flatnonzero(free > 0)
        fits = open_c[sizes[open_c] - 1 >= internal[node]]
        pool = fits if len(fits) else open_c
        weights = free[pool].astype(float)
        c = int(pool[rng.choice(len(pool), p=weights / weights.sum())])
        labels[node] = c
        free[c] -= 1

    # canonical planted-partition presentation: community c occupies one
    # contiguous index block; reordering nodes here relabels everything
    # downstream consistently and changes no degree or label statistic
    new_order = np.argsort(labels, kind="stable")
    labels = labels[new_order]
    internal = internal[new_order]
    ext = ext[new_order]

    # internal stubs a community cannot realize spill into the external
    # pool so the total degree survives; with mu=0 there is no external
    # wiring, so the excess is dropped and communities stay self-contained
    def spill(node_idx, amount):
        internal[node_idx] -= amount
        if mu > 0.0:
            ext[node_idx] += amount

    for node in range(n):
        room = int(sizes[labels[node]]) - 1
        if internal[node] > room:
            spill(node, internal[node] - room)
    for c in range(k):
        members = np.flatnonzero(labels == c)
        cap_stubs = len(members) * (len(members) - 1)
        excess = int(internal[members].sum()) - cap_stubs
        by_load = members[np.argsort(-internal[members], kind="stable")]
        i = 0
        while excess > 0:
            node = by_load[i % len(by_load)]
            if internal[node] > 0:
                spill(node, 1)
                excess -= 1
            i += 1

    edges: set[tuple[int, int]] = set()
    for c in range(k):
        members = np.flatnonzero(labels == c)
        stubs = np.repeat(members, internal[members])
        edges.update(_pair_stubs(stubs, rng, edges))
    global_stubs = np.repeat(np.arange(n), ext)
    edges.update(_pair_stubs(global_stubs, rng, edges))

    A = np.zeros((n, n))
    for u, v in edges:
        A[u, v] = A[v, u] = 1.0
    return Graph(A), tuple(int(x) for x in labels)


def _active_probs(t: int, dp: DynamicParams) -> tuple[float, float]:
    pa, pd = dp.p_add_base, dp.p_del_base
    for ct, cpa, cpd in dp.change_points:
        if t >= ct:
            pa, pd = cpa, cpd
    return pa, pd


def segment_label(t: int, dp: DynamicParams) -> int:
    """Regime index of snapshot t: how many change points are <= t."""
    return sum(1 for ct, _, _ in dp.change_points if t >= ct)


def gen_dynamic_sequence(n: int, p_init: float, steps: int,
                         dp: DynamicParams, seed=0) -> GraphCollection:
    """Edge-churn sequence: G_0 ~ ER(n, p_init); each later step rewires a
    p_rewire fraction of current edges (uniform edge, one endpoint moved to
    a uniform non-neighbor), then deletes each edge with the active p_del
    and adds each absent pair with the active p_add (both evaluated on the
    post-rewiring state).  Labels mark the regime segment of each snapshot.
    """
    if steps < 1:
        raise DataError(f"steps must be >= 1, got {steps}")
    if not (0.0 <= p_init <= 1.0):
        raise DataError(f"p_init must be in [0, 1], got {p_init!r}")
    rng = _rng(seed)
    n_pairs_iu = np.triu_indices(n, k=1)
    A = _er_adjacency(n, p_init, rng)
    snapshots = [Graph(A)]
    labels = [segment_label(0, dp)]
    for t in range(1, steps):
        p_add, p_del = _active_probs(t, dp)
        A = np.array(A, copy=True)
        # rewiring sub-step: edge count stays constant
        n_edges = int(A[n_pairs_iu].sum())
        for _ in range(int(dp.p_rewire * n_edges)):
            iu, ju = n_pairs_iu
            present = np.flatnonzero(A[iu, ju] != 0)
            if len(present) == 0:
                break
            e = present[int(rng.integers(len(present)))]
            u, v = int(iu[e]), int(ju[e])
            keep, drop = (u, v) if rng.integers(2) == 0 else (v, u)
            candidates = np.flatnonzero(A[keep] == 0)
            candidates = candidates[candidates != keep]
            if len(candidates) == 0:
                continue
            w = int(candidates[int(rng.integers(len(candidates)))])
            A[keep, drop] = A[drop, keep] = 0.0
            A[keep, w] = A[w, keep] = 1.0
        iu, ju = n_pairs_iu
        vals = A[iu, ju]
        present = np.flatnonzero(vals != 0)
        absent = np.flatnonzero(vals == 0)
        del_mask = rng.random(len(present)) < p_del
        add_mask = rng.random(len(absent)) < p_add
        di, dj = iu[present[del_mask]], ju[present[del_mask]]
        ai, aj = iu[absent[add_mask]], ju[absent[add_mask]]
        A[di, dj] = A[dj, di] = 0.0
        A[ai, aj] = A[aj, ai] = 1.0
        snapshots.append(Graph(A))
        labels.append(segment_label(t, dp))
    return GraphCollection(tuple(snapshots), labels=tuple(labels))


def generate(spec: GeneratorSpec) -> GraphCollection:
    """Emit a GraphCollection for a GeneratorSpec.

    Static kinds derive one child seed per graph from (spec.seed, index).
    ``planted_partition`` accepts either a fixed ``k`` or a ``k_min``/
    ``k_max`` range sampled per graph; node-level community labels are not
    collection labels and are dropped here.  ``dynamic_sequence`` treats
    ``count`` as the step count and labels snapshots by regime.
    """
    p = dict(spec.params)
    if spec.kind == "erdos_renyi":
        prob = float(p.pop("p"))
        _reject_extra(p)
        graphs = tuple(gen_erdos_renyi(spec.n, prob, seed=[spec.seed, i])
                       for i in range(spec.count))
        return GraphCollection(graphs)
    if spec.kind == "barabasi_albert":
        m_attach = int(p.pop("m_attach"))
        _reject_extra(p)
        graphs = tuple(gen_barabasi_albert(spec.n, m_attach,
                                           seed=[spec.seed, i])
                       for i in range(spec.count))
        return GraphCollection(graphs)
    if spec.kind == "planted_partition":
        mu = float(p.pop("mu"))
        avg_degree = float(p.pop("avg_degree"))
        gamma = float(p.pop("degree_exponent", 2.0))
        s_min = p.pop("s_min", None)
        s_max = p.pop("s_max", None)
        k_fixed = p.pop("k", None)
        k_min = p.pop("k_min", None)
        k_max = p.pop("k_max", None)
        _reject_extra(p)
        if k_fixed is None and (k_min is None or k_max is None):
            raise DataError("planted_partition needs k or k_min/k_max")
        graphs = []
        for i in range(spec.count):
            seed_i = [spec.seed, i]
            if k_fixed is not None:
                k = int(k_fixed)
            else:
                k = int(_rng(seed_i + [1]).integers(int(k_min),
                                                    int(k_max) + 1))
            g, _ = gen_planted_partition(
                spec.n, k, mu, avg_degree, gamma, seed=seed_i,
                s_min=None if s_min is None else int(s_min),
                s_max=None if s_max is None else int(s_max))
            graphs.append(g)
        return GraphCollection(tuple(graphs))
    if spec.kind == "dynamic_sequence":
        dp = DynamicParams(
            p_rewire=float(p.pop("p_rewire", 0.05)),
            p_add_base=float(p.pop("p_add", 0.015)),
            p_del_base=float(p.pop("p_del", 0.015)),
            change_points=tuple(p.pop("change_points", ())))
        p_init = float(p.pop("p_init"))
        _reject_extra(p)
        return gen_dynamic_sequence(spec.n, p_init, spec.count, dp,
                                    seed=spec.seed)
    raise DataError(f"unknown generator kind {spec.kind!r}")


def _reject_extra(params: dict) -> None:
    if params:
        raise DataError(f"unknown generator parameters: "
                        f"{sorted(params)}")
