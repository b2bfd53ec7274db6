"""Command-line front end.

Subcommands: check (controllability), gain (scalar-input deadbeat gain),
track (set-intersection tracking run), demo (the two nonlinear systems),
batch (seeded randomized experiments).

System files are plain text, one ``key = value`` per line with ``#``
comments; matrices are flat row-major arrays:

    n = 2
    m = 1
    form = factored
    A = 0 1 -1 0
    B = 1 0

``form`` defaults to factored, the x+ = A(x + Bu) update law.  A and B
may instead be given as separate whitespace matrix files (one row per
line) via --a-file/--b-file.

Exit codes: 0 success/controllable, 1 not controllable, 2 input error,
3 singular A (rerun gain with --dual), 4 tracking guarantee violated.
The environment variable DEADBEAT_TOL overrides the default tolerances:
a single float sets the residual tolerances, a pair "rank,residual" sets
both cutoffs.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import linear, nonlinear, simulate
from .errors import (
    DeadbeatError,
    InvalidInput,
    NotControllable,
    SingularA,
    Uncontrollable,
    UnsupportedInputWidth,
)
from .linear import Form, LinearSystem
from .subspace import Tolerance

__all__ = ["main", "entry", "parse_system_file", "read_matrix_file"]

EXIT_OK = 0
EXIT_NOT_CONTROLLABLE = 1
EXIT_INPUT_ERROR = 2
EXIT_SINGULAR_A = 3
EXIT_TRACKING_VIOLATED = 4

DEFAULT_TRACK_TOL = 1e-8
DEFAULT_DEMO_TOL = 1e-6


class FileFormatError(Exception):
    """Raised with a message naming the offending field."""


def _parse_floats(text: str, field: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split()]
    except ValueError as exc:
        raise FileFormatError(f"field {field!r}: {exc}") from None
    if not all(np.isfinite(values)):
        raise FileFormatError(f"field {field!r}: non-finite entries")
    return values


def parse_system_file(path: str) -> LinearSystem:
    """Read a key/value system file into a LinearSystem."""
    fields: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise FileFormatError(f"line {lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            fields[key.strip().lower()] = value.strip()
    for required in ("n", "m", "a", "b"):
        if required not in fields:
            raise FileFormatError(f"missing field {required!r}")
    try:
        n = int(fields["n"])
        m = int(fields["m"])
    except ValueError as exc:
        raise FileFormatError(f"field 'n'/'m': {exc}") from None
    if n < 1 or m < 1:
        raise FileFormatError(f"field 'n'/'m': must be positive, got n={n} m={m}")
    a = _parse_floats(fields["a"], "A")
    b = _parse_floats(fields["b"], "B")
    if len(a) != n * n:
        raise FileFormatError(f"field 'A': has {len(a)} entries, expected {n * n}")
    if len(b) != n * m:
        raise FileFormatError(f"field 'B': has {len(b)} entries, expected {n * m}")
    form_name = fields.get("form", "factored")
    try:
        form = Form(form_name)
    except ValueError:
        raise FileFormatError(
            f"field 'form': {form_name!r} is not 'standard' or 'factored'"
        ) from None
    return LinearSystem(
        np.array(a).reshape(n, n), np.array(b).reshape(n, m), form
    )


def read_matrix_file(path: str) -> np.ndarray:
    """Plain whitespace matrix, one row per line."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            rows.append(_parse_floats(line, f"{path}:{lineno}"))
    if not rows:
        raise FileFormatError(f"{path}: no matrix rows found")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise FileFormatError(f"{path}: ragged rows")
    return np.array(rows)


def _load_system(args) -> LinearSystem:
    if args.path is not None:
        return parse_system_file(args.path)
    if args.a_file is None or args.b_file is None:
        raise FileFormatError("give a system file or both --a-file and --b-file")
    A = read_matrix_file(args.a_file)
    B = read_matrix_file(args.b_file)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    return LinearSystem(A, B, Form(args.form))


def _env_tolerance() -> tuple[Tolerance, float | None]:
    """Tolerance from DEADBEAT_TOL; also returns the residual override."""
    raw = os.environ.get("DEADBEAT_TOL")
    if not raw:
        return Tolerance(), None
    try:
        parts = [float(p) for p in raw.split(",")]
    except ValueError:
        raise FileFormatError(f"DEADBEAT_TOL: cannot parse {raw!r}") from None
    if len(parts) == 1:
        return Tolerance(residual_rel=parts[0]), parts[0]
    if len(parts) == 2:
        return Tolerance(rank_rel=parts[0], residual_rel=parts[1]), parts[1]
    raise FileFormatError("DEADBEAT_TOL: expected one float or 'rank,residual'")


def _parse_vector(text: str, n: int, name: str) -> np.ndarray:
    values = _parse_floats(text.replace(",", " "), name)
    if len(values) != n:
        raise FileFormatError(f"{name}: has {len(values)} entries, expected {n}")
    return np.array(values)


def _fmt_vec(v) -> str:
    return " ".join(f"{x:.12g}" for x in np.asarray(v).reshape(-1))


def cmd_check(args, tol: Tolerance) -> int:
    sys_ = _load_system(args)
    report = linear.check_controllability(sys_, tol)
    # display the chain only up to its stabilization point
    stop = len(report.chain_dims)
    for k in range(1, len(report.chain_dims)):
        if report.chain_dims[k] == report.chain_dims[k - 1]:
            stop = k
            break
    print(f"pbh: {'pass' if report.pbh_pass else 'fail'}")
    print("chain dims:", " ".join(str(d) for d in report.chain_dims[:stop]))
    print(f"geometric: {'pass' if report.geometric_pass else 'fail'}")
    if report.failing_eigenvalue is not None:
        lam = report.failing_eigenvalue
        print(f"failing eigenvalue: {lam.real:.12g} {lam.imag:.12g}")
    print(f"controllable: {'yes' if report.pbh_pass else 'no'}")
    return EXIT_OK if report.pbh_pass else EXIT_NOT_CONTROLLABLE


def cmd_gain(args, tol: Tolerance) -> int:
    sys_ = _load_system(args)
    if args.tol is not None:
        tol = Tolerance(rank_rel=tol.rank_rel, residual_rel=args.tol)
    algorithm = linear.deadbeat_gain_dual if args.dual else linear.deadbeat_gain
    try:
        result = algorithm(sys_, tol)
    except SingularA as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR_A
    except (Uncontrollable, UnsupportedInputWidth) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONTROLLABLE
    if args.json:
        print(
            json.dumps(
                {
                    "K2": result.K2.reshape(-1).tolist(),
                    "K": result.K.reshape(-1).tolist(),
                    "residual": result.nilpotency_residual,
                }
            )
        )
    else:
        print("K2:", _fmt_vec(result.K2))
        print("K:", _fmt_vec(result.K))
        print(f"residual: {result.nilpotency_residual:.3e}")
    return EXIT_OK


def cmd_track(args, tol: Tolerance, track_tol: float) -> int:
    sys_ = _load_system(args)
    if sys_.form is not Form.FACTORED:
        raise FileFormatError(
            "field 'form': the set-intersection tracker needs the factored form"
        )
    if args.tol is not None:
        track_tol = args.tol
    if not linear.geometric_controllable(sys_, tol):
        print("error: system is not deadbeat controllable", file=sys.stderr)
        return EXIT_NOT_CONTROLLABLE
    chain = linear.subspace_chain(sys_, None, tol)
    rng = np.random.default_rng(args.seed)
    x0 = (
        _parse_vector(args.x0, sys_.n, "--x0")
        if args.x0
        else rng.standard_normal(sys_.n)
    )
    xhat0 = (
        _parse_vector(args.xhat0, sys_.n, "--xhat0")
        if args.xhat0
        else rng.standard_normal(sys_.n)
    )
    steps = args.steps if args.steps is not None else 2 * (sys_.n + 1)
    run = simulate.simulate_coupled(
        lambda xh, x: linear.linear_tracker_step(xh, x, sys_, chain, tol),
        lambda x: sys_.A @ x,
        x0,
        xhat0,
        steps,
        track_tol,
    )
    if args.out:
        simulate.tracking_run_to_csv(run, args.out)
        print(f"wrote {args.out}")
    p = chain.stabilized_at + 1
    print(f"deadbeat_step: {run.deadbeat_step} (guarantee p = {p})")
    if run.deadbeat_step is None or run.deadbeat_step > p:
        return EXIT_TRACKING_VIOLATED
    return EXIT_OK


def cmd_demo(args, demo_tol: float) -> int:
    try:
        system = nonlinear.named_system(args.name)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if args.tol is not None:
        demo_tol = args.tol
    rng = np.random.default_rng(args.seed)
    if args.name == "homogeneous":
        x0, xhat0 = rng.uniform(-2.0, 2.0, size=3), rng.uniform(-2.0, 2.0, size=3)
    else:
        x0, xhat0 = rng.uniform(0.5, 2.0, size=3), rng.uniform(0.5, 2.0, size=3)
    steps = args.steps if args.steps is not None else 2 * (system.horizon + 1)
    run = simulate.simulate_coupled(
        system.tracker_step,
        system.f,
        x0,
        xhat0,
        steps,
        demo_tol,
        in_domain=system.in_domain,
    )
    if args.out:
        simulate.tracking_run_to_csv(run, args.out)
        print(f"wrote {args.out}")
    err = np.linalg.norm(run.tracker.states - run.reference.states, axis=1)
    rel = err / (1.0 + np.linalg.norm(run.reference.states, axis=1))
    post = float(np.max(rel[system.horizon :]))
    print(f"deadbeat_step: {run.deadbeat_step} (guarantee p = {system.horizon})")
    print(f"max residual after step {system.horizon}: {post:.3e}")
    return EXIT_OK if post <= demo_tol else EXIT_TRACKING_VIOLATED


def cmd_batch(args, tol_override: float | None) -> int:
    cfg = simulate.BatchConfig(
        family=args.family,
        count=args.count,
        seed=args.seed,
        n_min=args.n_min,
        n_max=args.n_max,
        horizon=args.steps,
        tol=args.tol if args.tol is not None else (tol_override or 1e-8),
    )
    summary = simulate.batch_experiment(cfg)
    print(f"family: {summary.family}")
    print(f"runs: {summary.count}  passes: {summary.passes}  "
          f"failures: {summary.failures}  errors: {summary.errors}")
    print(f"max residual: {summary.max_residual:.3e}")
    if summary.step_histogram:
        hist = " ".join(
            f"{k}:{summary.step_histogram[k]}" for k in sorted(summary.step_histogram)
        )
        print(f"deadbeat-step histogram: {hist}")
    return EXIT_OK if summary.failures == 0 else EXIT_NOT_CONTROLLABLE


def _add_system_args(p: argparse.ArgumentParser):
    p.add_argument("path", nargs="?", help="system file (key = value format)")
    p.add_argument("--a-file", help="plain matrix file holding A")
    p.add_argument("--b-file", help="plain matrix file holding B")
    p.add_argument(
        "--form",
        default="factored",
        choices=["standard", "factored"],
        help="system form when using --a-file/--b-file",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deadbeat",
        description="Deadbeat controllability checks, gain synthesis and tracking.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("check", help="controllability tests on a system file")
    _add_system_args(p)

    p = subs.add_parser("gain", help="scalar-input deadbeat gain")
    _add_system_args(p)
    p.add_argument("--dual", action="store_true", help="use the dual algorithm")
    p.add_argument("--tol", type=float, help="residual tolerance override")
    p.add_argument("--json", action="store_true", help="machine-readable output")

    p = subs.add_parser("track", help="run the set-intersection tracker")
    _add_system_args(p)
    p.add_argument("--x0", help="reference initial state, comma separated")
    p.add_argument("--xhat0", help="tracker initial state, comma separated")
    p.add_argument("--steps", type=int, help="horizon (default 2(n+1))")
    p.add_argument("--seed", type=int, default=0, help="seed for random initial states")
    p.add_argument("--out", help="write the run as CSV")
    p.add_argument("--tol", type=float, help="tracking equality tolerance")

    p = subs.add_parser("demo", help="nonlinear tracker demos")
    p.add_argument("name", help="homogeneous or positive")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--steps", type=int, help="horizon (default 8)")
    p.add_argument("--out", help="write the run as CSV")
    p.add_argument("--tol", type=float, help="tracking equality tolerance")

    p = subs.add_parser("batch", help="seeded randomized experiment batches")
    p.add_argument(
        "--family",
        required=True,
        choices=["linear-gain", "linear-tracker", "homogeneous", "positive"],
    )
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--steps", type=int, help="horizon override")
    p.add_argument("--tol", type=float, help="pass/fail tolerance")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol, residual_override = _env_tolerance()
        track_tol = residual_override or DEFAULT_TRACK_TOL
        demo_tol = residual_override or DEFAULT_DEMO_TOL
        if args.command == "check":
            return cmd_check(args, tol)
        if args.command == "gain":
            return cmd_gain(args, tol)
        if args.command == "track":
            return cmd_track(args, tol, track_tol)
        if args.command == "demo":
            return cmd_demo(args, demo_tol)
        if args.command == "batch":
            return cmd_batch(args, residual_override)
        parser.error(f"unknown command {args.command!r}")
    except (FileFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except NotControllable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONTROLLABLE
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except DeadbeatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    return EXIT_OK


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
