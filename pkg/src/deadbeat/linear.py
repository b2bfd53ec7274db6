"""Deadbeat machinery for linear systems.

Covers the controllability tests (eigenvalue rank test and its geometric
equivalent through the subspace chain), scalar-input deadbeat gain
synthesis by the primal and dual algorithms with built-in nilpotency
verification, and the set-intersection deadbeat tracker that also handles
multi-input systems.

Two system forms appear throughout.  Standard is x+ = A x + B u; factored
is x+ = A (x + B u).  A gain K2 for the factored form converts to the
standard-form gain K = K2 A, and the corresponding closed loops
A (I - B K2) and A - B K are nilpotent together.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from . import subspace as sub
from .errors import (
    InvalidInput,
    NotControllable,
    NumericalFailure,
    SingularA,
    Uncontrollable,
    UnsupportedInputWidth,
)
from .subspace import DEFAULT_TOL, AffineSet, Subspace, Tolerance

__all__ = [
    "Form",
    "LinearSystem",
    "SubspaceChain",
    "GainResult",
    "ControllabilityReport",
    "pbh_test",
    "subspace_chain",
    "geometric_controllable",
    "check_controllability",
    "deadbeat_gain",
    "deadbeat_gain_dual",
    "verify_nilpotent",
    "convert_gain",
    "class_at_level",
    "minus_class_at_level",
    "pi_level",
    "linear_tracker_step",
]


class Form(enum.Enum):
    """Which update law the pair (A, B) describes."""

    STANDARD = "standard"  # x+ = A x + B u
    FACTORED = "factored"  # x+ = A (x + B u)


@dataclass(frozen=True, eq=False)
class LinearSystem:
    A: np.ndarray
    B: np.ndarray
    form: Form = Form.FACTORED

    def __post_init__(self):
        A = sub._as_matrix(self.A, "A")
        B = sub._as_matrix(self.B, "B")
        if A.shape[0] != A.shape[1]:
            raise InvalidInput(f"A must be square, got {A.shape}")
        if B.shape[0] != A.shape[0]:
            raise InvalidInput(f"B has {B.shape[0]} rows, expected {A.shape[0]}")
        if B.shape[1] < 1:
            raise InvalidInput("B needs at least one column")
        if not isinstance(self.form, Form):
            raise InvalidInput(f"form must be a Form, got {self.form!r}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]


@dataclass(frozen=True, eq=False)
class SubspaceChain:
    """The nested chain S_0 ⊆ S_-1 ⊆ ... built from S_0 = range(B).

    ``levels[k]`` holds the k-th chain member; ``stabilized_at`` is the
    first index where two consecutive members coincide (None only when
    the chain was cut off before stabilizing).
    """

    levels: list[Subspace]
    stabilized_at: int | None

    @property
    def dims(self) -> list[int]:
        return [S.dim for S in self.levels]


@dataclass(frozen=True, eq=False)
class GainResult:
    """Deadbeat gains for both system forms plus the verification residual.

    K2 drives the factored form, K = K2 A the standard form;
    nilpotency_residual is ||(A(I - B K2))^n||_F / max(1, ||A||_F^n).
    """

    K2: np.ndarray
    K: np.ndarray
    nilpotency_residual: float


@dataclass(frozen=True)
class ControllabilityReport:
    pbh_pass: bool | None = None
    geometric_pass: bool | None = None
    chain_dims: list[int] | None = None
    failing_eigenvalue: complex | None = None


def _complex_rank(X: np.ndarray, Y: np.ndarray, rank_rel: float) -> int:
    # Rank over C of X + iY via the real 2r x 2c compound [[X, -Y], [Y, X]];
    # the real rank is exactly twice the complex rank.
    R = np.block([[X, -Y], [Y, X]])
    s = np.linalg.svd(R, compute_uv=False)
    if s.size == 0 or s[0] <= 0.0:
        return 0
    real_rank = int(np.count_nonzero(s >= rank_rel * s[0]))
    return real_rank // 2


def pbh_test(sys: LinearSystem, tol: Tolerance = DEFAULT_TOL) -> ControllabilityReport:
    """Eigenvalue rank test: rank [A - lambda I  B] = n at every lambda != 0.

    Eigenvalues with magnitude at or below rank_rel * ||A|| are treated as
    zero and exempted.  Records the first failing eigenvalue, if any.
    """
    A, B, n = sys.A, sys.B, sys.n
    try:
        eigs = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue computation failed: {exc}") from exc
    thresh = tol.rank_rel * float(np.linalg.norm(A, 2))
    for lam in eigs:
        if abs(lam) <= thresh:
            continue
        X = np.hstack([A - lam.real * np.eye(n), B])
        Y = np.hstack([-lam.imag * np.eye(n), np.zeros_like(B)])
        if _complex_rank(X, Y, tol.rank_rel) < n:
            return ControllabilityReport(pbh_pass=False, failing_eigenvalue=complex(lam))
    return ControllabilityReport(pbh_pass=True)


def subspace_chain(
    sys: LinearSystem, kmax: int | None = None, tol: Tolerance = DEFAULT_TOL
) -> SubspaceChain:
    """Iterate S_0 = range(B), S_{k+1} = preimage(A, S_k) + S_0.

    With the default kmax = n + 1 the chain always runs past its
    stabilization point, which lies at index <= n.
    """
    n = sys.n
    if kmax is None:
        kmax = n + 1
    if kmax < 0:
        raise InvalidInput(f"kmax must be >= 0, got {kmax}")
    levels = [sub.column_space(sys.B, tol)]
    for _ in range(kmax):
        levels.append(sub.sum(sub.preimage(sys.A, levels[-1], tol), levels[0], tol))
    stabilized_at = None
    for k in range(len(levels) - 1):
        if sub.equal(levels[k + 1], levels[k], tol):
            stabilized_at = k
            break
    return SubspaceChain(levels=levels, stabilized_at=stabilized_at)


def geometric_controllable(sys: LinearSystem, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff the n-th chain member is all of R^n."""
    chain = subspace_chain(sys, sys.n, tol)
    return chain.levels[sys.n].dim == sys.n


def check_controllability(
    sys: LinearSystem, tol: Tolerance = DEFAULT_TOL
) -> ControllabilityReport:
    """Run both controllability tests and cross-check that they agree.

    A disagreement would contradict the equivalence the tests are built
    on, so it is reported as a NumericalFailure rather than a verdict.
    """
    pbh = pbh_test(sys, tol)
    chain = subspace_chain(sys, None, tol)
    geometric = chain.levels[sys.n].dim == sys.n
    if pbh.pbh_pass != geometric:
        raise NumericalFailure(
            "controllability cross-check failed: eigenvalue test says "
            f"{pbh.pbh_pass}, chain test says {geometric}"
        )
    return ControllabilityReport(
        pbh_pass=pbh.pbh_pass,
        geometric_pass=geometric,
        chain_dims=chain.dims,
        failing_eigenvalue=pbh.failing_eigenvalue,
    )


def verify_nilpotent(M, scale: float | None = None) -> float:
    """Relative size of M^n: ||M^n||_F / max(1, scale^n), scale = ||M||_F.

    Near zero means numerically nilpotent; the caller picks the cutoff.
    """
    M = sub._as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise InvalidInput(f"M must be square, got {M.shape}")
    n = M.shape[0]
    if scale is None:
        scale = float(np.linalg.norm(M, "fro"))
    Mn = np.linalg.matrix_power(M, n)
    return float(np.linalg.norm(Mn, "fro")) / max(1.0, scale**n)


def convert_gain(K2, A) -> np.ndarray:
    """Map a factored-form gain to the standard-form gain K = K2 A."""
    K2 = sub._as_matrix(K2, "K2")
    A = sub._as_matrix(A, "A")
    if K2.shape[1] != A.shape[0]:
        raise InvalidInput(f"shape mismatch: K2 is {K2.shape}, A is {A.shape}")
    return K2 @ A


def _gain_result(sys: LinearSystem, K2: np.ndarray, tol: Tolerance) -> GainResult:
    A, B, n = sys.A, sys.B, sys.n
    K = K2 @ A
    M = A @ (np.eye(n) - B @ K2)
    residual = verify_nilpotent(M, scale=float(np.linalg.norm(A, "fro")))
    if residual > tol.residual_rel:
        raise NumericalFailure(
            f"computed gain fails nilpotency verification (residual {residual:.2e})"
        )
    return GainResult(K2=K2, K=K, nilpotency_residual=residual)


def _scalar_input_checks(sys: LinearSystem):
    if sys.m != 1:
        raise UnsupportedInputWidth(
            f"gain synthesis needs a single input column, got m={sys.m}"
        )


def _gain_n1(sys: LinearSystem, tol: Tolerance) -> GainResult:
    # One-dimensional case: the loop is empty and the closed loop
    # A(1 - B K2) vanishes exactly for K2 = 1/B.
    b = float(sys.B[0, 0])
    if abs(b) <= tol.residual_rel:
        raise Uncontrollable("B is (numerically) zero")
    return _gain_result(sys, np.array([[1.0 / b]]), tol)


def deadbeat_gain(sys: LinearSystem, tol: Tolerance = DEFAULT_TOL) -> GainResult:
    """Primal gain algorithm for a single-input pair with invertible A.

    Builds the work matrix X = [A^-(n-2) B ... A^-1 B  B] column block by
    column block, takes the one-dimensional null space of (A^-1 X)^T and
    normalizes it against B:

        X = B
        repeat n-2 times:  X = [A^-1 X  B]
        w  = basis of null((A^-1 X)^T)
        K2 = w^T / (w^T B),  K = K2 A

    The returned gains are verified: a nilpotency residual above
    tol.residual_rel raises NumericalFailure instead of returning.
    """
    _scalar_input_checks(sys)
    A, B, n = sys.A, sys.B, sys.n
    if n == 1:
        return _gain_n1(sys, tol)
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= tol.rank_rel * s[0]:
        raise SingularA(
            "A is singular to the rank tolerance; use deadbeat_gain_dual"
        )
    X = B
    for _ in range(n - 2):
        X = np.hstack([np.linalg.solve(A, X), B])
    W = np.linalg.solve(A, X)
    null = sub.null_space(W.T, tol)
    if null.dim != 1:
        raise Uncontrollable(
            f"null space of the work matrix has dimension {null.dim}, expected 1"
        )
    w = null.basis[:, 0]
    wb = float(w @ B[:, 0])
    if abs(wb) <= tol.residual_rel * float(np.linalg.norm(w)) * float(
        np.linalg.norm(B)
    ):
        raise Uncontrollable("normal direction is orthogonal to B")
    return _gain_result(sys, (w / wb).reshape(1, n), tol)


def deadbeat_gain_dual(sys: LinearSystem, tol: Tolerance = DEFAULT_TOL) -> GainResult:
    """Dual gain algorithm; works for singular A.

    Tracks the orthogonal complement of the chain instead of the chain
    itself, swapping preimages under A for images under A^T:

        Xp = null(B^T)
        repeat n-2 times:  Xp = null([null((A^T Xp)^T)  B]^T)
        K2 = (A^T Xp)^T / ((A^T Xp)^T B),  K = K2 A

    Same verification and n = 1 handling as the primal algorithm.
    """
    _scalar_input_checks(sys)
    A, B, n = sys.A, sys.B, sys.n
    if n == 1:
        return _gain_n1(sys, tol)
    Xp = sub.null_space(B.T, tol).basis
    for _ in range(n - 2):
        inner = sub.null_space((A.T @ Xp).T, tol).basis
        Xp = sub.null_space(np.hstack([inner, B]).T, tol).basis
    if Xp.shape[1] != 1:
        raise Uncontrollable(
            f"complement chain ended with dimension {Xp.shape[1]}, expected 1"
        )
    w = A.T @ Xp[:, 0]
    wb = float(w @ B[:, 0])
    if abs(wb) <= tol.residual_rel * float(np.linalg.norm(w)) * float(
        np.linalg.norm(B)
    ):
        raise Uncontrollable("normal direction is orthogonal to B")
    return _gain_result(sys, (w / wb).reshape(1, n), tol)


def class_at_level(x, k: int, chain: SubspaceChain) -> AffineSet:
    """The affine class x + S_k for chain level k."""
    if not 0 <= k < len(chain.levels):
        raise InvalidInput(f"level {k} outside the chain (length {len(chain.levels)})")
    return AffineSet(np.asarray(x, dtype=float), chain.levels[k])


def minus_class_at_level(
    x, k: int, sys: LinearSystem, chain: SubspaceChain, tol: Tolerance = DEFAULT_TOL
) -> AffineSet:
    """The pulled-back class at chain level k: x + preimage(A, S_k).

    k = -1 addresses the one level above the chain, the singleton {x}.
    """
    x = np.asarray(x, dtype=float)
    if k == -1:
        return AffineSet(x, sub.zero_subspace(sys.n))
    if not 0 <= k < len(chain.levels):
        raise InvalidInput(f"level {k} outside the chain (length {len(chain.levels)})")
    return AffineSet(x, sub.preimage(sys.A, chain.levels[k], tol))


def _scan_levels(xhat, x, sys, chain, tol):
    if chain.stabilized_at is None:
        raise InvalidInput("chain did not stabilize; rebuild with a larger kmax")
    p = chain.stabilized_at + 1
    base = class_at_level(xhat, 0, chain)
    for j in range(1, 1 - p, -1):  # j = 1, 0, ..., 2 - p
        inter = sub.affine_intersect(
            base, minus_class_at_level(x, -j, sys, chain, tol), tol
        )
        if inter is not None:
            return j, inter
    raise NotControllable(
        "no class level produced a nonempty intersection; the pair is not "
        "deadbeat controllable"
    )


def pi_level(
    xhat, x, sys: LinearSystem, chain: SubspaceChain, tol: Tolerance = DEFAULT_TOL
) -> int:
    """Highest level j in {2-p, ..., 0, 1} whose pulled-back class meets
    the input-reachable class of xhat.

    Level 1 means x is reachable from xhat in one input application, so
    tracking is already exact after the next step.
    """
    j, _ = _scan_levels(xhat, x, sys, chain, tol)
    return j


def linear_tracker_step(
    xhat, x, sys: LinearSystem, chain: SubspaceChain, tol: Tolerance = DEFAULT_TOL
) -> np.ndarray:
    """One step of the set-intersection deadbeat tracker.

    Intersects the input-reachable class of xhat with the deepest
    pulled-back class of x that it meets, picks the canonical
    minimum-norm point z of that intersection, and advances to A z.
    Requires the factored system form.
    """
    if sys.form is not Form.FACTORED:
        raise InvalidInput("the set-intersection tracker needs the factored form")
    _, inter = _scan_levels(xhat, x, sys, chain, tol)
    return sys.A @ inter.point
