"""Classical graph distances against hand oracles and invariances."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphemb.errors import DataError
from graphemb.graphs import Graph, GraphCollection, permute
from graphemb.distances import (
    DistanceMatrix,
    SpectralConfig,
    default_deltacon_eps,
    deltacon_distance,
    graph_distance,
    hamming_distance,
    jaccard_distance,
    laplacian,
    normalize,
    pairwise,
    spectral_distance,
)

from conftest import path3, random_graph, triangle


def graph_pair(seed: int, n: int = 8, p: float = 0.4):
    rng = np.random.default_rng(seed)
    return random_graph(n, p, rng), random_graph(n, p, rng)


class TestHamming:
    def test_identical_graphs_zero(self):
        g = triangle()
        assert hamming_distance(g, g) == 0.0

    def test_k3_vs_p3_exact(self):
        # one differing edge, counted in both orientations: 2/(3*2)
        assert abs(hamming_distance(triangle(), path3()) - 1.0 / 3.0) < 1e-9

    def test_empty_vs_complete_is_one(self):
        n = 6
        empty = Graph(np.zeros((n, n)))
        full = Graph(np.ones((n, n)) - np.eye(n))
        assert hamming_distance(empty, full) == 1.0

    def test_universe_mismatch_rejected(self):
        g1 = Graph.from_edges("abc")
        g2 = Graph.from_edges("abd")
        with pytest.raises(DataError):
            hamming_distance(g1, g2)

    def test_simultaneous_permutation_invariance(self, rng):
        g1, g2 = graph_pair(5)
        d0 = hamming_distance(g1, g2)
        for _ in range(5):
            perm = tuple(int(x) for x in rng.permutation(8))
            d1 = hamming_distance(permute(g1, perm), permute(g2, perm))
            assert abs(d0 - d1) < 1e-12


class TestJaccard:
    def test_identical_graphs_zero(self):
        g = triangle()
        assert jaccard_distance(g, g) == 0.0

    def test_one_third_case(self):
        # union 3 edges, intersection 2
        assert abs(jaccard_distance(triangle(), path3()) - 1.0 / 3.0) < 1e-9

    def test_edge_disjoint_is_one(self):
        g1 = Graph.from_edges(4, [(0, 1)])
        g2 = Graph.from_edges(4, [(2, 3)])
        assert jaccard_distance(g1, g2) == 1.0

    def test_both_empty_is_zero(self):
        g = Graph.from_edges(3)
        assert jaccard_distance(g, g) == 0.0

    def test_zero_iff_equal_edge_sets(self):
        # weights differ but edge sets match: jaccard sees sets only
        g1 = Graph.from_edges(3, [(0, 1, 1.0)])
        g2 = Graph.from_edges(3, [(0, 1, 2.5)])
        assert jaccard_distance(g1, g2) == 0.0

    def test_simultaneous_permutation_invariance(self, rng):
        g1, g2 = graph_pair(9)
        d0 = jaccard_distance(g1, g2)
        for _ in range(5):
            perm = tuple(int(x) for x in rng.permutation(8))
            d1 = jaccard_distance(permute(g1, perm), permute(g2, perm))
            assert abs(d0 - d1) < 1e-12


def deltacon_2node_oracle(eps: float) -> float:
    """Closed-form Matusita distance: empty vs single-edge on 2 nodes.

    Empty graph affinity is I.  Edge graph: [[1+e^2, -e], [-e, 1+e^2]]
    inverted by the 2x2 cofactor formula.
    """
    a = 1.0 + eps * eps
    b = -eps
    det = a * a - b * b
    s_diag = a / det
    s_off = -b / det
    return math.sqrt(2 * (1.0 - math.sqrt(s_diag)) ** 2 + 2 * math.sqrt(s_off) ** 2)


class TestDeltaCon:
    def test_identical_graphs_zero(self):
        g = triangle()
        assert deltacon_distance(g, g) == 0.0

    def test_symmetry_on_random_pairs(self):
        for seed in range(5):
            g1, g2 = graph_pair(seed)
            assert deltacon_distance(g1, g2) == deltacon_distance(g2, g1)

    def test_two_node_closed_form(self):
        empty = Graph.from_edges(2)
        edge = Graph.from_edges(2, [(0, 1)])
        got = deltacon_distance(empty, edge, eps=0.05)
        assert abs(got - deltacon_2node_oracle(0.05)) < 1e-10

    def test_two_node_closed_form_default_eps(self):
        empty = Graph.from_edges(2)
        edge = Graph.from_edges(2, [(0, 1)])
        eps = default_deltacon_eps(empty, edge)
        assert eps == 1.0 / (1.0 + 1.0)
        got = deltacon_distance(empty, edge)
        assert abs(got - deltacon_2node_oracle(eps)) < 1e-10

    def test_eps_stability_of_zero_verdicts(self):
        # doubling eps must not change which pairs sit at distance zero
        pairs = [(triangle(), triangle()), (triangle(), path3()),
                 graph_pair(3), (path3(), path3())]
        for g1, g2 in pairs:
            z1 = deltacon_distance(g1, g2, eps=0.01) < 1e-12
            z2 = deltacon_distance(g1, g2, eps=0.02) < 1e-12
            assert z1 == z2

    def test_eps_too_large_rejected(self):
        g = triangle()
        with pytest.raises(DataError):
            deltacon_distance(g, g, eps=0.5)  # 1/(1+maxdeg) = 1/3

    def test_affinities_nonnegative_under_sqrt(self):
        # dense graph close to the eps bound: no NaN from negative radicands
        g1 = Graph(np.ones((7, 7)) - np.eye(7))
        g2 = Graph.from_edges(7, [(0, 1)])
        assert np.isfinite(deltacon_distance(g1, g2))


class TestLaplacian:
    def test_combinatorial_k3(self):
        lap = laplacian(triangle())
        assert np.array_equal(lap, 2 * np.eye(3) - (np.ones((3, 3)) - np.eye(3)))

    def test_normalized_single_edge_plus_isolate(self):
        # isolated node keeps its identity row: spectrum {0, 1, 2}
        g = Graph.from_edges(3, [(0, 1)])
        lap = laplacian(g, "normalized")
        w = np.sort(np.linalg.eigvalsh(lap))
        assert np.allclose(w, [0.0, 1.0, 2.0], atol=1e-12)

    def test_unknown_kind_rejected(self):
        with pytest.raises(DataError):
            laplacian(triangle(), "random_walk")


class TestSpectralDistance:
    def test_permutation_invariance(self, rng):
        g = random_graph(10, 0.35, rng)
        for kind in ("combinatorial", "normalized"):
            cfg = SpectralConfig(kind)
            for _ in range(4):
                perm = tuple(int(x) for x in rng.permutation(10))
                assert spectral_distance(g, permute(g, perm), cfg) < 1e-8

    def test_k3_vs_p3_combinatorial(self):
        # spectra (0,3,3) vs (0,1,3): sqrt(0 + 4 + 0) = 2
        cfg = SpectralConfig("combinatorial", n_lambda=3)
        assert abs(spectral_distance(triangle(), path3(), cfg) - 2.0) < 1e-9

    def test_node_count_mismatch_rejected(self):
        g1 = triangle()
        g2 = Graph.from_edges(4, [(0, 1), (1, 2), (0, 2)])
        with pytest.raises(DataError):
            spectral_distance(g1, g2)

    def test_n_lambda_out_of_range_rejected(self):
        cfg = SpectralConfig("combinatorial", n_lambda=4)
        with pytest.raises(DataError):
            spectral_distance(triangle(), path3(), cfg)

    def test_n_lambda_subset(self):
        # largest eigenvalue only: |3 - 3| = 0 up to solver noise
        cfg = SpectralConfig("combinatorial", n_lambda=1)
        assert spectral_distance(triangle(), path3(), cfg) < 1e-9

    def test_different_universes_allowed(self):
        # method is correspondence-free; only the node count must agree
        g1 = Graph.from_edges("abc", [(0, 1)])
        g2 = Graph.from_edges("xyz", [(1, 2)])
        assert spectral_distance(g1, g2) < 1e-9


class TestPairwise:
    def test_single_graph_zero_matrix(self):
        col = GraphCollection([triangle()])
        dm = pairwise(col, "hamming")
        assert dm.values.shape == (1, 1)
        assert dm.values[0, 0] == 0.0

    def test_identical_graphs_zero_matrix(self):
        col = GraphCollection([triangle()] * 4)
        for metric in ("hamming", "jaccard", "deltacon", "spectral_cl", "spectral_nl"):
            dm = pairwise(col, metric)
            assert np.all(dm.values == 0.0), metric

    @pytest.mark.parametrize(
        "metric", ["hamming", "jaccard", "deltacon", "spectral_cl", "spectral_nl"])
    def test_entries_match_per_pair_calls(self, metric, rng):
        graphs = [random_graph(7, 0.4, rng) for _ in range(5)]
        col = GraphCollection(graphs)
        dm = pairwise(col, metric)
        for i in range(5):
            for j in range(5):
                want = graph_distance(graphs[i], graphs[j], metric)
                assert dm.values[i, j] == pytest.approx(want, abs=1e-12)

    @pytest.mark.parametrize(
        "metric", ["hamming", "jaccard", "deltacon", "spectral_cl", "spectral_nl"])
    def test_cache_flag_changes_nothing(self, metric, rng):
        col = GraphCollection([random_graph(6, 0.5, rng) for _ in range(4)])
        fast = pairwise(col, metric, cache=True)
        slow = pairwise(col, metric, cache=False)
        assert np.array_equal(fast.values, slow.values)

    def test_threads_change_nothing(self, rng):
        col = GraphCollection([random_graph(6, 0.5, rng) for _ in range(6)])
        one = pairwise(col, "spectral_cl", threads=1)
        four = pairwise(col, "spectral_cl", threads=4)
        assert np.array_equal(one.values, four.values)

    def test_ids_follow_collection_names(self):
        col = GraphCollection([triangle(), path3()], names=("left", "right"))
        dm = pairwise(col, "hamming")
        assert dm.row_ids() == ("left", "right")

    def test_metric_tag_recorded(self):
        col = GraphCollection([triangle(), path3()])
        assert pairwise(col, "jaccard").metric == "jaccard"

    def test_unknown_metric_rejected(self):
        col = GraphCollection([triangle()])
        with pytest.raises(DataError):
            pairwise(col, "cosine")

    def test_embedding_metric_redirected(self):
        col = GraphCollection([triangle()])
        with pytest.raises(DataError):
            pairwise(col, "embedding")

    def test_pair_errors_carry_indices(self):
        col = GraphCollection([triangle(), path3()])
        bad = SpectralConfig("combinatorial", n_lambda=7)
        with pytest.raises(DataError, match=r"pair \(0, 1\)"):
            pairwise(col, "spectral_cl", cfg=bad, cache=False)

    def test_signature_errors_carry_graph_index(self):
        col = GraphCollection([triangle(), path3()])
        bad = SpectralConfig("combinatorial", n_lambda=7)
        with pytest.raises(DataError, match=r"graph 0"):
            pairwise(col, "spectral_cl", cfg=bad, cache=True)


class TestNormalize:
    def test_ratios_preserved(self):
        v = np.array([[0.0, 2.0, 4.0], [2.0, 0.0, 1.0], [4.0, 1.0, 0.0]])
        dm = normalize(DistanceMatrix(v, "hamming"))
        assert dm.normalized
        assert dm.values.max() == 1.0
        assert np.allclose(dm.values, v / 4.0)

    def test_zero_matrix_unchanged(self):
        dm = normalize(DistanceMatrix(np.zeros((3, 3)), "hamming"))
        assert dm.normalized
        assert np.all(dm.values == 0.0)

    def test_idempotent(self):
        v = np.array([[0.0, 3.0], [3.0, 0.0]])
        once = normalize(DistanceMatrix(v, "jaccard"))
        twice = normalize(once)
        assert np.array_equal(once.values, twice.values)


class TestDistanceMatrixInvariants:
    def test_asymmetric_rejected(self):
        v = np.array([[0.0, 1.0], [2.0, 0.0]])
        with pytest.raises(DataError):
            DistanceMatrix(v, "hamming")

    def test_negative_entry_rejected(self):
        v = np.array([[0.0, -1.0], [-1.0, 0.0]])
        with pytest.raises(DataError):
            DistanceMatrix(v, "hamming")

    def test_nonzero_diagonal_rejected(self):
        v = np.array([[1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(DataError):
            DistanceMatrix(v, "hamming")

    def test_normalized_flag_needs_unit_max(self):
        v = np.array([[0.0, 0.5], [0.5, 0.0]])
        with pytest.raises(DataError):
            DistanceMatrix(v, "hamming", normalized=True)

    def test_unknown_metric_tag_rejected(self):
        with pytest.raises(DataError):
            DistanceMatrix(np.zeros((2, 2)), "manhattan")


@given(st.integers(0, 500))
@settings(max_examples=20, deadline=None)
def test_metric_axioms_on_random_pairs(seed):
    g1, g2 = graph_pair(seed, n=6)
    for metric in ("hamming", "jaccard", "deltacon", "spectral_cl", "spectral_nl"):
        d12 = graph_distance(g1, g2, metric)
        d21 = graph_distance(g2, g1, metric)
        assert d12 >= 0.0
        assert d12 == pytest.approx(d21, abs=1e-12)
        assert graph_distance(g1, g1, metric) <= 1e-12
