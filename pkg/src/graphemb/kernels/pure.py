"""Pure-numpy cyclic Jacobi eigensolver.

Fallback backend with the same contract as the compiled kernel: full sweeps
over the strict upper triangle in row-major pivot order, Givens rotations
annihilating each pivot, until the off-diagonal Frobenius norm drops below
``tol`` times the Frobenius norm of the input.
"""

import numpy as np

from graphemb.errors import NumericalError

DEFAULT_TOL = 1e-10
MAX_SWEEPS = 60


def jacobi_eigh(a, compute_vectors=False, tol=DEFAULT_TOL,
                max_sweeps=MAX_SWEEPS):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    a : (n, n) array_like
        Symmetric matrix.  Symmetry is the caller's responsibility.
    compute_vectors : bool
        Accumulate the orthogonal eigenvector matrix as well.
    tol : float
        Convergence threshold on off(A) relative to ||A||_F.
    max_sweeps : int
        Sweep budget before declaring non-convergence.

    Returns
    -------
    w : (n,) ndarray
        Eigenvalues in ascending order.
    v : (n, n) ndarray, only if ``compute_vectors``
        Orthonormal eigenvectors, column i pairing with w[i].
    """
    A = np.array(a, dtype=np.float64, copy=True)
    n = A.shape[0]
    V = np.eye(n) if compute_vectors else None
    norm = np.linalg.norm(A)
    target = tol * norm
    # pivots whose magnitude cannot lift off(A) above target may be skipped:
    # sqrt(n(n-1)/2) * (target/n) < target
    skip = target / max(n, 1)

    # summing the off-diagonal squares directly avoids the catastrophic
    # cancellation of the ||A||_F^2 - ||diag||^2 shortcut near convergence
    iu = np.triu_indices(n, k=1)

    converged = False
    for _ in range(max_sweeps):
        off2 = 2.0 * float((A[iu] ** 2).sum())
        if off2 <= target * target or norm == 0.0:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= skip:
                    continue
                app = A[p, p]
                aqq = A[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rho = s / (1.0 + c)
                colp = A[:, p].copy()
                colq = A[:, q].copy()
                newp = colp - s * (colq + rho * colp)
                newq = colq + s * (colp - rho * colq)
                A[:, p] = newp
                A[:, q] = newq
                A[p, :] = newp
                A[q, :] = newq
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = 0.0
                A[q, p] = 0.0
                if V is not None:
                    vp = V[:, p].copy()
                    vq = V[:, q].copy()
                    V[:, p] = vp - s * (vq + rho * vp)
                    V[:, q] = vq + s * (vp - rho * vq)
    else:
        converged = False
    if not converged:
        # the loop above breaks on success; re-check after the last sweep
        off2 = 2.0 * float((A[iu] ** 2).sum())
        if off2 > target * target:
            raise NumericalError(
                f"Jacobi sweep budget ({max_sweeps}) exhausted: "
                f"off-diagonal norm {np.sqrt(off2):.3e} > {target:.3e}")
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    w = w[order]
    if V is not None:
        return w, V[:, order]
    return w
