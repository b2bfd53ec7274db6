"""Seeded generators for random linear test systems.

Draws are shaped for the numerical tolerances of the test suites: A is
built from random orthogonal factors with singular values in [0.5, 2] so
that repeated application of A and its inverse stays well conditioned,
and reachability is verified (with a condition bound on the reachability
matrix) before a pair is accepted.
"""

import numpy as np

from .errors import NumericalFailure

__all__ = [
    "random_orthogonal",
    "random_pair",
    "random_controllable",
    "random_uncontrollable",
    "random_singular_controllable",
    "controllability_matrix",
]

_MAX_TRIES = 200


def random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def controllability_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """[B, AB, ..., A^(n-1) B]."""
    n = A.shape[0]
    blocks = [B]
    for _ in range(n - 1):
        blocks.append(A @ blocks[-1])
    return np.hstack(blocks)


def _well_conditioned_A(rng: np.random.Generator, n: int) -> np.ndarray:
    s = rng.uniform(0.5, 2.0, size=n)
    return random_orthogonal(rng, n) @ np.diag(s) @ random_orthogonal(rng, n)


def random_pair(
    rng: np.random.Generator, n: int, m: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Unfiltered random pair: standard-normal A and B."""
    return rng.standard_normal((n, n)), rng.standard_normal((n, m))


def _reachable(A, B, cond_max=1e8) -> bool:
    C = controllability_matrix(A, B)
    s = np.linalg.svd(C, compute_uv=False)
    return s[-1] > 0 and s[0] / s[-1] < cond_max


def random_controllable(
    rng: np.random.Generator, n: int, m: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Reachable pair with invertible, well-conditioned A."""
    for _ in range(_MAX_TRIES):
        A = _well_conditioned_A(rng, n)
        B = rng.standard_normal((n, m))
        if n == 1 or _reachable(A, B):
            return A, B
    raise NumericalFailure("could not draw a controllable pair")


def random_singular_controllable(
    rng: np.random.Generator, n: int, m: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Reachable pair whose A has exactly one zero singular value."""
    if n < 2:
        raise NumericalFailure("singular yet reachable needs n >= 2")
    for _ in range(_MAX_TRIES):
        s = rng.uniform(0.5, 2.0, size=n)
        s[-1] = 0.0
        A = random_orthogonal(rng, n) @ np.diag(s) @ random_orthogonal(rng, n)
        B = rng.standard_normal((n, m))
        if _reachable(A, B):
            return A, B
    raise NumericalFailure("could not draw a singular controllable pair")


def random_uncontrollable(
    rng: np.random.Generator, n: int, m: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Pair with at least one unreachable mode at a nonzero eigenvalue.

    Built in block-triangular form with B confined to the leading block,
    then rotated by a random orthogonal similarity.
    """
    if n < 2:
        raise NumericalFailure("an unreachable mode needs n >= 2")
    k = int(rng.integers(1, n))  # unreachable dimension
    r = n - k
    A = np.zeros((n, n))
    A[:r, :r] = rng.standard_normal((r, r))
    A[:r, r:] = rng.standard_normal((r, k))
    # Unreachable eigenvalues bounded away from zero so the failure is
    # visible to the nonzero-eigenvalue rank test.
    A[r:, r:] = np.diag(rng.uniform(0.5, 2.0, size=k) * rng.choice([-1.0, 1.0], size=k))
    B = np.zeros((n, m))
    B[:r] = rng.standard_normal((r, m))
    T = random_orthogonal(rng, n)
    return T @ A @ T.T, T @ B
