"""Shared builders for the test suite."""

import numpy as np
import pytest

from graphemb.graphs import Graph, GraphCollection


def triangle() -> Graph:
    """K3 on nodes a,b,c."""
    return Graph.from_edges("abc", [(0, 1), (1, 2), (0, 2)])


def path3() -> Graph:
    """P3: edges a-b, b-c."""
    return Graph.from_edges("abc", [(0, 1), (1, 2)])


def random_graph(n: int, p: float, rng: np.random.Generator) -> Graph:
    iu = np.triu_indices(n, k=1)
    a = np.zeros((n, n))
    mask = rng.random(iu[0].size) < p
    a[iu[0][mask], iu[1][mask]] = 1.0
    a += a.T
    return Graph(a)


def random_collection(m: int, n: int, p: float, seed: int = 0) -> GraphCollection:
    rng = np.random.default_rng(seed)
    return GraphCollection([random_graph(n, p, rng) for _ in range(m)])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
