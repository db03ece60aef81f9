"""Symmetric eigensolver: both backends against independent oracles."""

import itertools
import os
import subprocess
import sys

import numpy as np
import pytest

from graphemb import kernels
from graphemb.errors import DataError, NumericalError
from graphemb.kernels import pure

try:
    from graphemb.kernels import _native as native
except ImportError:
    native = None

from graphemb.distances import laplacian, symmetric_eigenvalues

from conftest import path3, random_graph, triangle


def jacobi(m, **kw):
    return kernels.jacobi_eigh(np.asarray(m, dtype=float), **kw)


def test_zero_matrix():
    assert np.array_equal(jacobi(np.zeros((4, 4))), np.zeros(4))


def test_k3_laplacian_spectrum():
    w = jacobi(laplacian(triangle()))
    assert np.allclose(w, [0.0, 3.0, 3.0], atol=1e-9)


def test_p3_laplacian_spectrum():
    w = jacobi(laplacian(path3()))
    assert np.allclose(w, [0.0, 1.0, 3.0], atol=1e-9)


def test_diagonal_matrix_sorted():
    w = jacobi(np.diag([3.0, -1.0, 2.0]))
    assert np.array_equal(w, [-1.0, 2.0, 3.0])


def char_poly_roots(m: np.ndarray) -> np.ndarray:
    """Exact characteristic-polynomial roots of an integer matrix.

    Solved symbolically so the oracle stays exact at repeated roots, where
    floating companion-matrix root finders lose half the digits.
    """
    import sympy

    sm = sympy.Matrix(m.astype(int).tolist())
    vals = []
    for root, mult in sm.eigenvals().items():
        vals.extend([float(root.evalf(30))] * mult)
    return np.sort(vals)


def all_graph_laplacians(n: int):
    pairs = list(itertools.combinations(range(n), 2))
    for bits in range(2 ** len(pairs)):
        a = np.zeros((n, n))
        for b, (i, j) in enumerate(pairs):
            if bits >> b & 1:
                a[i, j] = a[j, i] = 1.0
        yield np.diag(a.sum(axis=1)) - a


def test_all_graphs_n4_match_char_poly_roots():
    # every undirected graph on 4 nodes, Laplacian spectrum vs exact roots
    for lap in all_graph_laplacians(4):
        assert np.max(np.abs(jacobi(lap) - char_poly_roots(lap))) < 1e-8


def test_graphs_n3_match_char_poly_roots():
    for lap in all_graph_laplacians(3):
        assert np.max(np.abs(jacobi(lap) - char_poly_roots(lap))) < 1e-8


@pytest.mark.parametrize("n", [2, 5, 20, 40])
def test_matches_lapack(n):
    rng = np.random.default_rng(n)
    m = rng.standard_normal((n, n))
    m = (m + m.T) / 2.0
    assert np.max(np.abs(jacobi(m) - np.linalg.eigvalsh(m))) < 1e-8


def test_eigenvectors_reconstruct():
    rng = np.random.default_rng(7)
    m = rng.standard_normal((12, 12))
    m = (m + m.T) / 2.0
    w, v = jacobi(m, compute_vectors=True)
    assert np.max(np.abs(v.T @ v - np.eye(12))) < 1e-9
    assert np.max(np.abs(m @ v - v * w)) < 1e-8


def test_convergence_threshold():
    rng = np.random.default_rng(3)
    m = rng.standard_normal((25, 25))
    m = (m + m.T) / 2.0
    v = kernels.jacobi_eigh(m, compute_vectors=True)[1]
    residual = v.T @ m @ v
    off = residual - np.diag(np.diag(residual))
    assert np.linalg.norm(off) < 1e-8 * np.linalg.norm(m)


def test_sweep_budget_exhaustion_raises():
    rng = np.random.default_rng(1)
    m = rng.standard_normal((10, 10))
    m = (m + m.T) / 2.0
    with pytest.raises(NumericalError):
        pure.jacobi_eigh(m, max_sweeps=0)


@pytest.mark.skipif(native is None, reason="compiled backend not built")
class TestBackendParity:
    def test_bitwise_equal_eigenvalues(self):
        rng = np.random.default_rng(42)
        for n in (2, 3, 8, 31, 64):
            m = rng.standard_normal((n, n))
            m = (m + m.T) / 2.0
            assert np.array_equal(pure.jacobi_eigh(m), native.jacobi_eigh(m))

    def test_bitwise_equal_eigenvectors(self):
        rng = np.random.default_rng(43)
        m = rng.standard_normal((17, 17))
        m = (m + m.T) / 2.0
        wp, vp = pure.jacobi_eigh(m, compute_vectors=True)
        wn, vn = native.jacobi_eigh(m, compute_vectors=True)
        assert np.array_equal(wp, wn)
        assert np.array_equal(vp, vn)

    def test_laplacian_parity_on_graphs(self, rng):
        for _ in range(5):
            g = random_graph(19, 0.3, rng)
            lap = laplacian(g)
            assert np.array_equal(pure.jacobi_eigh(lap), native.jacobi_eigh(lap))


def test_env_var_forces_pure_backend():
    env = dict(os.environ, GRAPHEMB_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c", "from graphemb import kernels; print(kernels.BACKEND)"],
        capture_output=True, text=True, env=env)
    assert out.returncode == 0
    assert out.stdout.strip() == "pure"


def test_symmetric_eigenvalues_rejects_asymmetry():
    m = np.zeros((3, 3))
    m[0, 1] = 1.0
    with pytest.raises(DataError):
        symmetric_eigenvalues(m)


def test_symmetric_eigenvalues_tolerates_tiny_asymmetry():
    m = np.zeros((2, 2))
    m[0, 1] = 1.0
    m[1, 0] = 1.0 + 1e-12
    w = symmetric_eigenvalues(m)
    assert np.allclose(w, [-1.0, 1.0], atol=1e-9)
