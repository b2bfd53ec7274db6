"""Coupled-system simulation, deadbeat-step detection, batch experiments.

Convergence of the tracker solution psi to the reference solution phi is
judged with a relative-plus-absolute test ||psi - phi|| <= tol*(1 + ||phi||),
the floating-point stand-in for exact equality.  Any state whose norm
exceeds the divergence guard aborts the run.
"""

import io
from dataclasses import dataclass, field

import numpy as np

from . import linear, nonlinear, random_systems
from .errors import DeadbeatError, DivergedAtStep, InvalidInput
from .subspace import DEFAULT_TOL, Tolerance

__all__ = [
    "Trajectory",
    "TrackingRun",
    "RegulationRun",
    "BatchConfig",
    "BatchSummary",
    "simulate_autonomous",
    "simulate_coupled",
    "regulation_run",
    "batch_experiment",
    "tracking_run_to_csv",
]

DIVERGENCE_NORM = 1e12


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-indexed states, row k holding the state at step k."""

    states: np.ndarray  # (N+1, n)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return self.states.shape[0]

    def __getitem__(self, k: int) -> np.ndarray:
        return self.states[k]


@dataclass(frozen=True, eq=False)
class TrackingRun:
    """Reference and tracker trajectories from one coupled simulation.

    deadbeat_step is the smallest k from which the tolerance test holds
    at every remaining step, or None if tracking never locks in.
    """

    reference: Trajectory
    tracker: Trajectory
    deadbeat_step: int | None
    tol_used: float


@dataclass(frozen=True, eq=False)
class RegulationRun:
    trajectory: Trajectory
    first_zero_step: int | None
    tol_used: float


def _guard(x: np.ndarray, k: int, in_domain=None):
    if not np.all(np.isfinite(x)) or float(np.linalg.norm(x)) > DIVERGENCE_NORM:
        raise DivergedAtStep(k)
    if in_domain is not None and not in_domain(x):
        raise DivergedAtStep(k, f"state left the domain at step {k}")


def simulate_autonomous(step, x0, N: int, in_domain=None) -> Trajectory:
    """Iterate x -> step(x) for N steps, returning all N+1 states."""
    if N < 0:
        raise InvalidInput(f"N must be >= 0, got {N}")
    x = np.asarray(x0, dtype=float).reshape(-1)
    _guard(x, 0, in_domain)
    states = np.empty((N + 1, x.shape[0]))
    states[0] = x
    for k in range(1, N + 1):
        x = np.asarray(step(x), dtype=float).reshape(-1)
        _guard(x, k, in_domain)
        states[k] = x
    return Trajectory(states)


def _lockin_step(ok: np.ndarray) -> int | None:
    # Smallest k such that ok[j] holds for every j >= k; None if ok[-1] fails.
    if not ok[-1]:
        return None
    k = len(ok) - 1
    while k > 0 and ok[k - 1]:
        k -= 1
    return k


def simulate_coupled(
    tracker_step, f, x0, xhat0, N: int, tol: float = 1e-8, in_domain=None
) -> TrackingRun:
    """Advance reference x by f and tracker xhat by tracker_step(xhat, x)
    in lockstep, then locate the deadbeat step."""
    if N < 0:
        raise InvalidInput(f"N must be >= 0, got {N}")
    x = np.asarray(x0, dtype=float).reshape(-1)
    xh = np.asarray(xhat0, dtype=float).reshape(-1)
    if x.shape != xh.shape:
        raise InvalidInput(f"state shapes differ: {x.shape} vs {xh.shape}")
    _guard(x, 0, in_domain)
    _guard(xh, 0, in_domain)
    ref = np.empty((N + 1, x.shape[0]))
    trk = np.empty_like(ref)
    ref[0], trk[0] = x, xh
    for k in range(1, N + 1):
        xh = np.asarray(tracker_step(xh, x), dtype=float).reshape(-1)
        x = np.asarray(f(x), dtype=float).reshape(-1)
        _guard(x, k, in_domain)
        _guard(xh, k, in_domain)
        ref[k], trk[k] = x, xh
    err = np.linalg.norm(trk - ref, axis=1)
    ok = err <= tol * (1.0 + np.linalg.norm(ref, axis=1))
    return TrackingRun(
        reference=Trajectory(ref),
        tracker=Trajectory(trk),
        deadbeat_step=_lockin_step(ok),
        tol_used=tol,
    )


def regulation_run(A, B, K, x0, N: int, tol: float = 1e-8) -> RegulationRun:
    """Simulate the standard-form closed loop x+ = (A - B K) x and report
    the first step from which the state stays at the origin."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    K = np.asarray(K, dtype=float)
    M = A - B @ K
    if M.shape[0] != M.shape[1]:
        raise InvalidInput(f"closed-loop matrix is not square: {M.shape}")
    traj = simulate_autonomous(lambda x: M @ x, x0, N)
    x0n = float(np.linalg.norm(traj[0]))
    ok = np.linalg.norm(traj.states, axis=1) <= tol * (1.0 + x0n)
    return RegulationRun(
        trajectory=traj, first_zero_step=_lockin_step(ok), tol_used=tol
    )


@dataclass(frozen=True)
class BatchConfig:
    """Seeded batch of randomized runs over one system family.

    family: "linear-gain", "linear-tracker", "homogeneous" or "positive".
    n_min/n_max bound the state dimension of random linear draws;
    horizon defaults to 2(n+1), leaving headroom past the guarantee.
    """

    family: str
    count: int
    seed: int = 0
    n_min: int = 2
    n_max: int = 8
    horizon: int | None = None
    tol: float = 1e-8

    def __post_init__(self):
        if self.count < 0:
            raise InvalidInput(f"count must be >= 0, got {self.count}")
        if self.family not in ("linear-gain", "linear-tracker", "homogeneous", "positive"):
            raise InvalidInput(f"unknown batch family {self.family!r}")
        if not 1 <= self.n_min <= self.n_max:
            raise InvalidInput(f"bad dimension range [{self.n_min}, {self.n_max}]")


@dataclass
class BatchSummary:
    family: str
    count: int
    passes: int = 0
    failures: int = 0
    errors: int = 0
    max_residual: float = 0.0
    step_histogram: dict[int, int] = field(default_factory=dict)

    def _record_step(self, k: int):
        self.step_histogram[k] = self.step_histogram.get(k, 0) + 1


def _run_linear_gain(rng, cfg: BatchConfig, summary: BatchSummary):
    n = int(rng.integers(cfg.n_min, cfg.n_max + 1))
    A, B = random_systems.random_controllable(rng, n)
    sys = linear.LinearSystem(A, B)
    result = linear.deadbeat_gain(sys)
    summary.max_residual = max(summary.max_residual, result.nilpotency_residual)
    x0 = rng.standard_normal(n)
    reg = regulation_run(A, B, result.K, x0, n, cfg.tol)
    if (
        result.nilpotency_residual <= cfg.tol
        and reg.first_zero_step is not None
        and reg.first_zero_step <= n
    ):
        summary.passes += 1
        summary._record_step(reg.first_zero_step)
    else:
        summary.failures += 1


def _run_linear_tracker(rng, cfg: BatchConfig, summary: BatchSummary):
    n = int(rng.integers(cfg.n_min, cfg.n_max + 1))
    m = int(rng.integers(1, 3))
    A, B = random_systems.random_controllable(rng, n, m)
    sys = linear.LinearSystem(A, B)
    chain = linear.subspace_chain(sys)
    horizon = cfg.horizon if cfg.horizon is not None else 2 * (n + 1)
    run = simulate_coupled(
        lambda xh, x: linear.linear_tracker_step(xh, x, sys, chain),
        lambda x: A @ x,
        rng.standard_normal(n),
        rng.standard_normal(n),
        horizon,
        cfg.tol,
    )
    p = chain.stabilized_at + 1
    if run.deadbeat_step is not None and run.deadbeat_step <= p:
        summary.passes += 1
        summary._record_step(run.deadbeat_step)
    else:
        summary.failures += 1


def _run_nonlinear(rng, cfg: BatchConfig, summary: BatchSummary):
    sys = nonlinear.named_system(cfg.family)
    if cfg.family == "homogeneous":
        x0 = rng.uniform(-2.0, 2.0, size=3)
        xh0 = rng.uniform(-2.0, 2.0, size=3)
    else:
        x0 = rng.uniform(0.5, 2.0, size=3)
        xh0 = rng.uniform(0.5, 2.0, size=3)
    horizon = cfg.horizon if cfg.horizon is not None else 2 * (sys.horizon + 1)
    run = simulate_coupled(
        sys.tracker_step, sys.f, x0, xh0, horizon, cfg.tol, in_domain=sys.in_domain
    )
    err = np.linalg.norm(run.tracker.states - run.reference.states, axis=1)
    rel = err / (1.0 + np.linalg.norm(run.reference.states, axis=1))
    post = float(np.max(rel[sys.horizon :]))
    summary.max_residual = max(summary.max_residual, post)
    if run.deadbeat_step is not None and run.deadbeat_step <= sys.horizon:
        summary.passes += 1
        summary._record_step(run.deadbeat_step)
    else:
        summary.failures += 1


def batch_experiment(cfg: BatchConfig) -> BatchSummary:
    """Run a seeded batch; per-run errors are tallied, not raised."""
    rng = np.random.default_rng(cfg.seed)
    summary = BatchSummary(family=cfg.family, count=cfg.count)
    runners = {
        "linear-gain": _run_linear_gain,
        "linear-tracker": _run_linear_tracker,
        "homogeneous": _run_nonlinear,
        "positive": _run_nonlinear,
    }
    runner = runners[cfg.family]
    for _ in range(cfg.count):
        try:
            runner(rng, cfg, summary)
        except DeadbeatError:
            summary.errors += 1
            summary.failures += 1
    return summary


def tracking_run_to_csv(run: TrackingRun, target) -> None:
    """Write a coupled run as CSV: k,x1..xn,xhat1..xhatn per step,
    full double precision."""
    n = run.reference.dim
    header = (
        "k,"
        + ",".join(f"x{i}" for i in range(1, n + 1))
        + ","
        + ",".join(f"xhat{i}" for i in range(1, n + 1))
    )
    if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
        with open(target, "w", encoding="utf-8") as fh:
            _write_csv(run, fh, header)
    else:
        _write_csv(run, target, header)


def _write_csv(run: TrackingRun, fh: io.TextIOBase, header: str):
    fh.write(header + "\n")
    for k in range(len(run.reference)):
        row = [str(k)]
        row += [f"{v:.17g}" for v in run.reference[k]]
        row += [f"{v:.17g}" for v in run.tracker[k]]
        fh.write(",".join(row) + "\n")
