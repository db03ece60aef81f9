# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled cyclic Jacobi eigensolver.

Same contract and pivot order as :mod:`graphemb.kernels.pure`; the rotation
arithmetic matches the fallback formula-for-formula so both backends agree
to the last few ulps.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

from graphemb.errors import NumericalError

cnp.import_array()

DEFAULT_TOL = 1e-10
MAX_SWEEPS = 60


def jacobi_eigh(a, bint compute_vectors=False, double tol=1e-10,
                int max_sweeps=60):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ascending eigenvalues, plus the orthonormal eigenvector matrix
    when ``compute_vectors`` is set.  See the pure backend for details.
    """
    A_arr = np.array(a, dtype=np.float64, order="C", copy=True)
    if A_arr.ndim != 2 or A_arr.shape[0] != A_arr.shape[1]:
        raise ValueError("jacobi_eigh needs a square matrix")
    cdef double[:, ::1] A = A_arr
    cdef Py_ssize_t n = A_arr.shape[0]
    V_arr = np.eye(n) if compute_vectors else None
    cdef double[:, ::1] V = V_arr if compute_vectors else A  # dummy binding
    cdef bint with_v = compute_vectors

    cdef double norm2 = 0.0
    cdef Py_ssize_t i, j, p, q, sweep
    for i in range(n):
        for j in range(n):
            norm2 += A[i, j] * A[i, j]
    cdef double norm = sqrt(norm2)
    cdef double target = tol * norm
    cdef double skip = target / n if n > 0 else 0.0

    cdef double off2, d
    cdef double apq, app, aqq, tau, t, c, s, rho
    cdef double aip, aiq, vip, viq
    cdef bint converged = False

    for sweep in range(max_sweeps):
        off2 = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off2 += 2.0 * A[i, j] * A[i, j]
        if off2 <= target * target or norm == 0.0:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if fabs(apq) <= skip:
                    continue
                app = A[p, p]
                aqq = A[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                rho = s / (1.0 + c)
                for i in range(n):
                    if i == p or i == q:
                        continue
                    aip = A[i, p]
                    aiq = A[i, q]
                    A[i, p] = aip - s * (aiq + rho * aip)
                    A[i, q] = aiq + s * (aip - rho * aiq)
                    A[p, i] = A[i, p]
                    A[q, i] = A[i, q]
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = 0.0
                A[q, p] = 0.0
                if with_v:
                    for i in range(n):
                        vip = V[i, p]
                        viq = V[i, q]
                        V[i, p] = vip - s * (viq + rho * vip)
                        V[i, q] = viq + s * (vip - rho * viq)

    if not converged:
        off2 = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off2 += 2.0 * A[i, j] * A[i, j]
        if off2 > target * target:
            raise NumericalError(
                "Jacobi sweep budget (%d) exhausted: off-diagonal norm "
                "%.3e > %.3e" % (max_sweeps, sqrt(off2), target))

    w = np.diagonal(A_arr).copy()
    order = np.argsort(w, kind="stable")
    w = w[order]
    if compute_vectors:
        return w, V_arr[:, order]
    return w
