"""Independent reference computations the tests check the package against.

Everything here deliberately avoids the code paths under test: the gain
oracle goes through the classical reachability-matrix formula, and the
preimage oracle solves a block null-space problem instead of the
complement construction the package uses.
"""

import numpy as np

from deadbeat import subspace as sub


def ackermann_deadbeat_gain(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Standard-form deadbeat gain e_n^T C^-1 A^n for a scalar-input pair.

    C is the reachability matrix [B, AB, ..., A^(n-1)B]; placing every
    closed-loop eigenvalue at zero makes the desired characteristic
    polynomial z^n, so the classical formula collapses to C^-1 A^n.
    """
    n = A.shape[0]
    C = np.hstack([np.linalg.matrix_power(A, k) @ B for k in range(n)])
    e_n = np.zeros(n)
    e_n[-1] = 1.0
    y = np.linalg.solve(C.T, e_n)
    return (y @ np.linalg.matrix_power(A, n)).reshape(1, n)


def preimage_by_block_nullspace(A: np.ndarray, S: sub.Subspace) -> sub.Subspace:
    """{x : Ax in S} via the null space of [A  -basis(S)].

    Solutions (x, c) of Ax = S.basis c are computed in one SVD; the
    x-components span the preimage.
    """
    n = A.shape[0]
    M = np.hstack([A, -S.basis])
    _, s, Vt = np.linalg.svd(M, full_matrices=True)
    if s.size == 0 or s[0] <= 0:
        r = 0
    else:
        r = int(np.count_nonzero(s >= 1e-10 * s[0]))
    X = Vt[r:].T[:n, :]
    return sub.column_space(X) if X.shape[1] else sub.zero_subspace(n)


def rotation(theta: float) -> np.ndarray:
    return np.array(
        [[np.cos(theta), np.sin(theta)], [-np.sin(theta), np.cos(theta)]]
    )


def is_subspace_of(S: sub.Subspace, T: sub.Subspace, tol=sub.DEFAULT_TOL) -> bool:
    """S ⊆ T, checked column by column."""
    return all(sub.contains(T, c, tol) for c in S.basis.T)
