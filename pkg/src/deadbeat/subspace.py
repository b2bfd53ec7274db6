"""Numerical subspace algebra over real dense matrices.

Subspaces are stored as orthonormal bases produced by rank-revealing SVD
with a relative singular-value cutoff, so every downstream construction
(complements, sums, intersections, preimages, affine-set intersections)
has an explicit, reproducible rank policy.  All functions are pure and
their outputs are deterministic: a fixed sign convention makes repeated
calls on identical inputs bitwise identical.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "Subspace",
    "AffineSet",
    "zero_subspace",
    "full_subspace",
    "column_space",
    "null_space",
    "complement",
    "sum",
    "intersect",
    "preimage",
    "contains",
    "equal",
    "affine_intersect",
]


@dataclass(frozen=True)
class Tolerance:
    """Numeric policy: relative rank cutoff and relative residual bound.

    rank_rel decides which singular values count as nonzero
    (sigma >= rank_rel * sigma_max); residual_rel bounds the relative
    residual accepted by consistency tests such as membership and
    affine intersection.
    """

    rank_rel: float = 1e-10
    residual_rel: float = 1e-8

    def __post_init__(self):
        for name in ("rank_rel", "residual_rel"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise InvalidInput(f"{name} must lie strictly between 0 and 1, got {v}")


DEFAULT_TOL = Tolerance()


def _as_matrix(M, name: str = "M") -> np.ndarray:
    try:
        M = np.asarray(M, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"{name} is not numeric: {exc}") from None
    if M.ndim != 2:
        raise InvalidInput(f"{name} must be 2-dimensional, got ndim={M.ndim}")
    if not np.all(np.isfinite(M)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return M


def _as_vector(x, n: int, name: str = "x") -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != n:
        raise InvalidInput(f"{name} has length {x.shape[0]}, expected {n}")
    if not np.all(np.isfinite(x)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return x


def _fix_signs(Q: np.ndarray) -> np.ndarray:
    # Make the first entry of largest magnitude in each column positive;
    # magnitudes within one part in 1e12 of the maximum count as tied so
    # that analytically symmetric entries resolve to the first index.
    if Q.size == 0:
        return Q
    absQ = np.abs(Q)
    thresholds = absQ.max(axis=0) * (1.0 - 1e-12)
    signs = np.ones(Q.shape[1])
    for j in range(Q.shape[1]):
        i = int(np.argmax(absQ[:, j] >= thresholds[j]))
        if Q[i, j] < 0:
            signs[j] = -1.0
    return Q * signs


def _rank(s: np.ndarray, rank_rel: float) -> int:
    if s.size == 0 or s[0] <= 0.0:
        return 0
    return int(np.count_nonzero(s >= rank_rel * s[0]))


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace of R^n held as an orthonormal basis.

    ``basis`` is n-by-d with orthonormal columns; d = 0 encodes {0}.
    Instances are immutable values and safe to share between threads.
    """

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        n = self.ambient_dim
        if n < 1:
            raise InvalidInput(f"ambient_dim must be positive, got {n}")
        Q = _as_matrix(self.basis, "basis")
        if Q.shape[0] != n:
            raise InvalidInput(f"basis has {Q.shape[0]} rows, expected {n}")
        d = Q.shape[1]
        if d > n:
            raise InvalidInput(f"basis has {d} columns in ambient dimension {n}")
        if d > 0:
            gram_err = np.max(np.abs(Q.T @ Q - np.eye(d)))
            if gram_err > 1e-12:
                raise InvalidInput(f"basis columns not orthonormal (error {gram_err:.2e})")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def project(self, x: np.ndarray) -> np.ndarray:
        """Orthogonal projection of x onto this subspace."""
        Q = self.basis
        if Q.shape[1] == 0:
            return np.zeros(self.ambient_dim)
        return Q @ (Q.T @ x)

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def zero_subspace(n: int) -> Subspace:
    """The zero subspace {0} of R^n."""
    return Subspace(n, np.zeros((n, 0)))


def full_subspace(n: int) -> Subspace:
    """All of R^n with the identity basis."""
    return Subspace(n, np.eye(n))


def column_space(M, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of the span of M's columns.

    Rank is the number of singular values >= rank_rel * sigma_max.
    """
    M = _as_matrix(M)
    n = M.shape[0]
    if M.shape[1] == 0:
        return zero_subspace(n)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    r = _rank(s, tol.rank_rel)
    return Subspace(n, _fix_signs(U[:, :r]))


def null_space(M, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of {x : Mx = 0}, same rank policy as column_space."""
    M = _as_matrix(M)
    m, n = M.shape
    if n == 0:
        raise InvalidInput("null_space needs at least one column")
    if m == 0:
        return full_subspace(n)
    _, s, Vt = np.linalg.svd(M, full_matrices=True)
    r = _rank(s, tol.rank_rel)
    return Subspace(n, _fix_signs(Vt[r:].T))


def complement(S: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Orthogonal complement; dim(S) + dim(complement(S)) = ambient_dim."""
    n = S.ambient_dim
    if S.dim == 0:
        return full_subspace(n)
    if S.dim == n:
        return zero_subspace(n)
    return null_space(S.basis.T, tol)


def _check_same_ambient(S: Subspace, T: Subspace):
    if S.ambient_dim != T.ambient_dim:
        raise InvalidInput(
            f"ambient dimensions differ: {S.ambient_dim} vs {T.ambient_dim}"
        )


def sum(S: Subspace, T: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Subspace sum S + T as the column space of the concatenated bases."""
    _check_same_ambient(S, T)
    return column_space(np.hstack([S.basis, T.basis]), tol)


def intersect(S: Subspace, T: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """S intersect T, computed through complements: (S^perp + T^perp)^perp."""
    _check_same_ambient(S, T)
    return complement(sum(complement(S, tol), complement(T, tol), tol), tol)


def preimage(A, S: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """The set {x : Ax in S}, well defined for singular A.

    Computed as the null space of V^T A where V spans the complement of S,
    so it always contains the null space of A.
    """
    A = _as_matrix(A, "A")
    n = S.ambient_dim
    if A.shape[0] != A.shape[1]:
        raise InvalidInput(f"A must be square, got {A.shape}")
    if A.shape[0] != n:
        raise InvalidInput(f"A is {A.shape[0]}x{A.shape[1]} but S lives in R^{n}")
    V = complement(S, tol)
    if V.dim == 0:
        return full_subspace(n)
    return null_space(V.basis.T @ A, tol)


def contains(S: Subspace, x, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Whether x lies in S up to the relative residual bound."""
    x = _as_vector(x, S.ambient_dim)
    r = x - S.project(x)
    return float(np.linalg.norm(r)) <= tol.residual_rel * (1.0 + float(np.linalg.norm(x)))


def equal(S: Subspace, T: Subspace, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Set equality: dimensions match and each basis is contained in the other."""
    _check_same_ambient(S, T)
    if S.dim != T.dim:
        return False
    return all(contains(T, c, tol) for c in S.basis.T) and all(
        contains(S, c, tol) for c in T.basis.T
    )


@dataclass(frozen=True, eq=False)
class AffineSet:
    """An affine set point + direction, stored canonically.

    The stored point is the minimum-norm element (orthogonal to the
    direction subspace), so equality of affine sets is equality of
    representations.
    """

    point: np.ndarray
    direction: Subspace

    def __post_init__(self):
        p = _as_vector(self.point, self.direction.ambient_dim, "point")
        p = p - self.direction.project(p)
        object.__setattr__(self, "point", p)

    @property
    def ambient_dim(self) -> int:
        return self.direction.ambient_dim

    def __repr__(self):
        return f"AffineSet(point={self.point!r}, dim={self.direction.dim})"


def affine_intersect(
    P: AffineSet, Q: AffineSet, tol: Tolerance = DEFAULT_TOL
) -> AffineSet | None:
    """Intersection of two affine sets, or None when they are disjoint.

    The direction is intersect(P.direction, Q.direction).  The point is
    recovered from the minimum-norm least-squares solution of
    P.point + U u = Q.point + V v over the stacked unknowns (u, v); the
    sets are judged disjoint when the residual of that solve exceeds
    residual_rel * (1 + ||Q.point - P.point||).
    """
    if P.ambient_dim != Q.ambient_dim:
        raise InvalidInput(
            f"ambient dimensions differ: {P.ambient_dim} vs {Q.ambient_dim}"
        )
    direction = intersect(P.direction, Q.direction, tol)
    U = P.direction.basis
    V = Q.direction.basis
    d = Q.point - P.point
    M = np.hstack([U, -V])
    if M.shape[1] == 0:
        residual = d
        z = P.point
    else:
        w, _, _, _ = np.linalg.lstsq(M, d, rcond=tol.rank_rel)
        residual = M @ w - d
        z = P.point + U @ w[: U.shape[1]]
    if float(np.linalg.norm(residual)) > tol.residual_rel * (
        1.0 + float(np.linalg.norm(d))
    ):
        return None
    return AffineSet(z, direction)
