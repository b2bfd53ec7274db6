"""Two third-order nonlinear systems with hand-derived deadbeat trackers.

Both systems follow the update law x+ = f(mu(x, u)): f is the drift and
mu applies the input.  Each carries a closed-form feedback kappa(xhat, x)
that steers the tracker state onto the reference solution in at most
three steps.

Homogeneous system on R^3 (cube-root/cube nonlinearities, neutral input 0):

    f(x)  = (-x2, x1 + cbrt(x3), x2^3 + x3)
    mu(x, u) = (x1, x2, x3 + u^3)
    kappa(xhat, x) = cbrt((x1 - xhat1 + cbrt(x3))^3 - xhat3)

The whole construction commutes with the dilation (l*x1, l*x2, l^3*x3).

Positive system on the strictly positive orthant (neutral input 1):

    f(x)  = (x1*x2*x3, x3/x1, sqrt(x1*x2))
    mu(x, u) = (x1/u, x2*u^2, x3/u)
    kappa(xhat, x) = x1^(1/3) x2^(5/3) x3^2 / (xhat1^(1/3) xhat2^(5/3) xhat3^2)

All operations preserve strict positivity and reject non-positive states
eagerly.
"""

import abc
from dataclasses import dataclass

import numpy as np

from .errors import DomainViolation, InvalidInput

__all__ = [
    "real_cbrt",
    "Dilation",
    "ControlledSystem",
    "HomogeneousSystem",
    "PositiveSystem",
    "homogeneous_kappa",
    "homogeneous_tracker_step",
    "positive_kappa",
    "positive_tracker_step",
    "class_membership_check",
    "named_system",
    "SYSTEMS",
]


def real_cbrt(y):
    """Sign-preserving real cube root: sign(y) * |y|^(1/3)."""
    return np.cbrt(y)


def _vec3(x, name="x"):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (3,):
        raise InvalidInput(f"{name} must have 3 components, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return x


@dataclass(frozen=True)
class Dilation:
    """Weighted scaling x -> (l*x1, l*x2, l^3*x3)."""

    lam: float

    def __call__(self, x) -> np.ndarray:
        x = _vec3(x)
        return np.array([self.lam * x[0], self.lam * x[1], self.lam**3 * x[2]])


class ControlledSystem(abc.ABC):
    """Interface shared by the worked nonlinear systems.

    Instances are stateless: every method is a pure function of its
    arguments.  ``horizon`` is the step count after which the coupled
    tracker/reference solutions are guaranteed equal.
    """

    state_dim: int = 3
    horizon: int = 3
    neutral_input: float

    @abc.abstractmethod
    def f(self, x) -> np.ndarray:
        """Drift map."""

    @abc.abstractmethod
    def f_inv(self, x) -> np.ndarray:
        """Inverse of the drift map."""

    @abc.abstractmethod
    def mu(self, x, u) -> np.ndarray:
        """Apply input u at state x; mu(x, neutral_input) = x."""

    @abc.abstractmethod
    def kappa(self, xhat, x) -> float:
        """Deadbeat feedback input."""

    @abc.abstractmethod
    def tracker_step(self, xhat, x) -> np.ndarray:
        """Closed-form tracker update, equal to f(mu(xhat, kappa(xhat, x)))."""

    @abc.abstractmethod
    def in_domain(self, x) -> bool:
        """Whether x is an admissible state."""


class HomogeneousSystem(ControlledSystem):
    neutral_input = 0.0

    def f(self, x):
        x = _vec3(x)
        return np.array([-x[1], x[0] + real_cbrt(x[2]), x[1] ** 3 + x[2]])

    def f_inv(self, x):
        x = _vec3(x)
        return np.array([x[1] - real_cbrt(x[0] ** 3 + x[2]), -x[0], x[0] ** 3 + x[2]])

    def mu(self, x, u):
        x = _vec3(x)
        return np.array([x[0], x[1], x[2] + float(u) ** 3])

    def kappa(self, xhat, x):
        return homogeneous_kappa(xhat, x)

    def tracker_step(self, xhat, x):
        return homogeneous_tracker_step(xhat, x)

    def in_domain(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        return x.shape == (3,) and bool(np.all(np.isfinite(x)))


def homogeneous_kappa(xhat, x) -> float:
    """Input that sends xhat onto the singleton class intersection."""
    xhat = _vec3(xhat, "xhat")
    x = _vec3(x, "x")
    return float(real_cbrt((x[0] - xhat[0] + real_cbrt(x[2])) ** 3 - xhat[2]))


def homogeneous_tracker_step(xhat, x) -> np.ndarray:
    """Closed-form tracker update for the homogeneous system."""
    xhat = _vec3(xhat, "xhat")
    x = _vec3(x, "x")
    a = x[0] - xhat[0] + real_cbrt(x[2])
    return np.array([-xhat[1], x[0] + real_cbrt(x[2]), xhat[1] ** 3 + a**3])


def _positive_vec3(x, name="x"):
    x = _vec3(x, name)
    if np.any(x <= 0.0):
        raise DomainViolation(f"{name} must be strictly positive, got {x}")
    return x


class PositiveSystem(ControlledSystem):
    neutral_input = 1.0

    def f(self, x):
        x = _positive_vec3(x)
        return np.array([x[0] * x[1] * x[2], x[2] / x[0], np.sqrt(x[0] * x[1])])

    def f_inv(self, x):
        x = _positive_vec3(x)
        return np.array(
            [x[0] / (x[1] * x[2] ** 2), x[1] * x[2] ** 4 / x[0], x[0] / x[2] ** 2]
        )

    def mu(self, x, u):
        x = _positive_vec3(x)
        u = float(u)
        if u <= 0.0:
            raise DomainViolation(f"input must be strictly positive, got {u}")
        return np.array([x[0] / u, x[1] * u**2, x[2] / u])

    def kappa(self, xhat, x):
        return positive_kappa(xhat, x)

    def tracker_step(self, xhat, x):
        return positive_tracker_step(xhat, x)

    def in_domain(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        return (
            x.shape == (3,) and bool(np.all(np.isfinite(x))) and bool(np.all(x > 0.0))
        )


def positive_kappa(xhat, x) -> float:
    """Ratio-form feedback; kappa(x, x) = 1 and kappa(xhat, x)*kappa(x, xhat) = 1."""
    xhat = _positive_vec3(xhat, "xhat")
    x = _positive_vec3(x, "x")
    num = x[0] ** (1.0 / 3.0) * x[1] ** (5.0 / 3.0) * x[2] ** 2
    den = xhat[0] ** (1.0 / 3.0) * xhat[1] ** (5.0 / 3.0) * xhat[2] ** 2
    return float(num / den)


def positive_tracker_step(xhat, x) -> np.ndarray:
    """Closed-form tracker update for the positive system."""
    xhat = _positive_vec3(xhat, "xhat")
    x = _positive_vec3(x, "x")
    third = (
        xhat[0] ** (1.0 / 3.0)
        * x[0] ** (1.0 / 6.0)
        * x[1] ** (5.0 / 6.0)
        * x[2]
        / (xhat[1] ** (1.0 / 3.0) * xhat[2])
    )
    return np.array([xhat[0] * xhat[1] * xhat[2], xhat[2] / xhat[0], third])


def _rel_close(a, b, rtol):
    return abs(a - b) <= rtol * (1.0 + max(abs(a), abs(b)))


def class_membership_check(
    sys: ControlledSystem, xhat, x, point=None, rtol: float = 1e-9
) -> bool:
    """Verify a point lies in both parametric class families.

    Defaults to the point mu(xhat, kappa(xhat, x)) the feedback law
    produces; pass ``point`` explicitly to probe other candidates.  The
    families are the input-reachable class of xhat and the one-level
    pulled-back class of x, in the closed forms each system admits.
    """
    xhat = np.asarray(xhat, dtype=float).reshape(-1)
    x = np.asarray(x, dtype=float).reshape(-1)
    if point is None:
        z = sys.mu(xhat, sys.kappa(xhat, x))
    else:
        z = np.asarray(point, dtype=float).reshape(-1)
    if isinstance(sys, HomogeneousSystem):
        # [xhat]_0 = {(xhat1, xhat2, a^3)}: first two coordinates pinned.
        in_zero = _rel_close(z[0], xhat[0], rtol) and _rel_close(z[1], xhat[1], rtol)
        # [x]_-1^- = {(x1 + cbrt(x3) - b, a, b^3)}: solve b from z3.
        b = float(real_cbrt(z[2]))
        in_minus = _rel_close(z[0], x[0] + float(real_cbrt(x[2])) - b, rtol)
        return bool(in_zero and in_minus)
    if isinstance(sys, PositiveSystem):
        if np.any(z <= 0.0):
            return False
        # [xhat]_0 = {(xhat1/a, xhat2*a^2, xhat3/a)}: solve a from z1.
        a = xhat[0] / z[0]
        in_zero = _rel_close(z[1], xhat[1] * a**2, rtol) and _rel_close(
            z[2], xhat[2] / a, rtol
        )
        # [x]_-1^- = {(x1/(a^2 b), x2*a^4/b, x3*b/a^3)}: solve a, b from z1, z2.
        a2 = (x[0] * z[1] / (x[1] * z[0])) ** (1.0 / 6.0)
        b2 = x[0] / (z[0] * a2**2)
        in_minus = b2 > 0.0 and _rel_close(z[2], x[2] * b2 / a2**3, rtol)
        return bool(in_zero and in_minus)
    raise InvalidInput(f"no class parametrization known for {type(sys).__name__}")


SYSTEMS = {
    "homogeneous": HomogeneousSystem,
    "positive": PositiveSystem,
}


def named_system(name: str) -> ControlledSystem:
    """Look up one of the worked systems by name."""
    try:
        return SYSTEMS[name]()
    except KeyError:
        raise InvalidInput(
            f"unknown system {name!r}; available: {', '.join(sorted(SYSTEMS))}"
        ) from None
