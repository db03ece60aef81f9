"""Encoder application and the inner-product distance formulation."""

import numpy as np
import pytest

from graphemb.dae import DaeConfig, DaeModel, encode, train
from graphemb.embedding import (
    EmbeddingMatrix,
    embed_collection,
    embedding_distance,
    pairwise_embedding_distances,
)
from graphemb.errors import DataError
from graphemb.graphs import (
    GraphCollection,
    LAYOUT_UPPER,
    adjacency_power,
    vectorize,
)

from conftest import random_collection


def tiny_model(n: int = 5, hidden: int = 3, r: int = 2,
               seed: int = 0) -> DaeModel:
    D = n * (n + 1) // 2
    rng = np.random.default_rng(seed)
    cfg = DaeConfig(input_dim=D, hidden_dim=hidden, dtype="float64")
    return DaeModel(rng.standard_normal((hidden, D)) * 0.3,
                    rng.standard_normal(hidden) * 0.1,
                    rng.standard_normal((D, hidden)) * 0.3,
                    rng.standard_normal(D) * 0.1,
                    cfg, 2.5, power_r=r, layout=LAYOUT_UPPER)


class TestEmbeddingMatrix:
    def test_must_be_2d(self):
        with pytest.raises(DataError):
            EmbeddingMatrix(np.zeros(4), ("a",))

    def test_non_finite_rejected(self):
        with pytest.raises(DataError):
            EmbeddingMatrix(np.array([[0.0, np.nan]]), ("a",))

    def test_id_count_must_match_rows(self):
        with pytest.raises(DataError):
            EmbeddingMatrix(np.zeros((2, 3)), ("a",))

    def test_duplicate_ids_rejected(self):
        with pytest.raises(DataError):
            EmbeddingMatrix(np.zeros((2, 3)), ("a", "a"))

    def test_shape_properties(self):
        em = EmbeddingMatrix(np.zeros((4, 7)), tuple("abcd"))
        assert em.m == 4 and em.dim == 7

    def test_values_frozen(self):
        em = EmbeddingMatrix(np.zeros((2, 2)), ("a", "b"))
        with pytest.raises(ValueError):
            em.values[0, 0] = 1.0


class TestEmbedCollection:
    def test_rows_match_standalone_encode(self):
        col = random_collection(6, 5, 0.5, seed=4)
        model = tiny_model(5, 3, r=2)
        em = embed_collection(model, col)
        for i, g in enumerate(col):
            x = vectorize(adjacency_power(g, 2), LAYOUT_UPPER, power=2)
            assert np.array_equal(em.values[i], encode(model, x))

    def test_fingerprint_and_ids(self):
        col = random_collection(3, 5, 0.4, seed=1)
        model = tiny_model(5, 2)
        em = embed_collection(model, col)
        assert em.model_fingerprint == model.fingerprint()
        assert em.ids == col.graph_names()

    def test_node_count_mismatch_rejected(self):
        model = tiny_model(5, 3)
        with pytest.raises(DataError, match="expects"):
            embed_collection(model, random_collection(3, 6, 0.4, seed=2))

    def test_extend_appends(self):
        a = random_collection(3, 5, 0.4, seed=5)
        raw_b = random_collection(2, 5, 0.6, seed=6)
        b = GraphCollection(raw_b.graphs, names=("h0", "h1"))
        model = tiny_model(5, 3)
        base = embed_collection(model, a)
        grown = embed_collection(model, b, extend=base)
        assert grown.m == 5
        assert grown.ids == base.ids + ("h0", "h1")
        assert np.array_equal(grown.values[:3], base.values)
        both = GraphCollection(tuple(a.graphs) + tuple(b.graphs))
        assert np.array_equal(grown.values,
                              embed_collection(model, both).values)

    def test_extend_rejects_other_encoder(self):
        col = random_collection(2, 5, 0.4, seed=7)
        base = embed_collection(tiny_model(5, 3, seed=0), col)
        with pytest.raises(DataError, match="fingerprint"):
            embed_collection(tiny_model(5, 3, seed=1), col, extend=base)

    def test_trained_model_roundtrip(self):
        col = random_collection(4, 6, 0.5, seed=9)
        model, _ = train(col, r=3)
        em = embed_collection(model, col)
        assert em.m == 4 and em.dim == model.config.hidden_dim


class TestEmbeddingDistance:
    def test_hand_value(self):
        assert embedding_distance([0.0, 0.0], [3.0, 4.0]) == 5.0

    def test_zero_for_equal(self):
        assert embedding_distance([1.5, -2.0], [1.5, -2.0]) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DataError):
            embedding_distance([1.0], [1.0, 2.0])


class TestPairwiseEmbeddingDistances:
    def test_matches_naive_euclidean(self):
        # the precomputed-inner-product identity against the direct form
        rng = np.random.default_rng(3)
        for trial in range(10):
            X = rng.standard_normal((12, 5)) * rng.uniform(0.1, 10.0)
            em = EmbeddingMatrix(X, tuple(str(i) for i in range(12)))
            got = pairwise_embedding_distances(em).values
            for i in range(12):
                for j in range(12):
                    want = np.linalg.norm(X[i] - X[j])
                    scale = max(want, 1.0)
                    assert abs(got[i, j] - want) / scale < 1e-7

    def test_identical_rows_distance_zero(self):
        X = np.tile([0.3, 0.7, 0.1], (3, 1))
        em = EmbeddingMatrix(X, ("a", "b", "c"))
        assert np.all(pairwise_embedding_distances(em).values == 0.0)

    def test_tag_and_ids_carried(self):
        em = EmbeddingMatrix(np.eye(3), ("x", "y", "z"))
        dm = pairwise_embedding_distances(em)
        assert dm.metric == "embedding"
        assert dm.ids == ("x", "y", "z")

    def test_triangle_inequality(self):
        rng = np.random.default_rng(8)
        X = rng.random((9, 4))
        d = pairwise_embedding_distances(
            EmbeddingMatrix(X, tuple(str(i) for i in range(9)))).values
        for i in range(9):
            for j in range(9):
                for k in range(9):
                    assert d[i, k] <= d[i, j] + d[j, k] + 1e-9

    def test_agrees_with_single_pair_calls(self):
        rng = np.random.default_rng(5)
        X = rng.random((6, 3))
        em = EmbeddingMatrix(X, tuple(str(i) for i in range(6)))
        d = pairwise_embedding_distances(em).values
        for i in range(6):
            for j in range(6):
                assert abs(d[i, j]
                           - embedding_distance(X[i], X[j])) < 1e-10
