"""Deadbeat controller synthesis and tracking via subspace intersections."""

from .errors import (
    DeadbeatError,
    DivergedAtStep,
    DomainViolation,
    InvalidInput,
    NotControllable,
    NumericalFailure,
    SingularA,
    Uncontrollable,
    UnsupportedInputWidth,
)
from .linear import (
    ControllabilityReport,
    Form,
    GainResult,
    LinearSystem,
    SubspaceChain,
    check_controllability,
    class_at_level,
    convert_gain,
    deadbeat_gain,
    deadbeat_gain_dual,
    geometric_controllable,
    linear_tracker_step,
    minus_class_at_level,
    pbh_test,
    pi_level,
    subspace_chain,
    verify_nilpotent,
)
from .nonlinear import (
    ControlledSystem,
    Dilation,
    HomogeneousSystem,
    PositiveSystem,
    class_membership_check,
    homogeneous_kappa,
    homogeneous_tracker_step,
    named_system,
    positive_kappa,
    positive_tracker_step,
    real_cbrt,
)
from .simulate import (
    BatchConfig,
    BatchSummary,
    RegulationRun,
    TrackingRun,
    Trajectory,
    batch_experiment,
    regulation_run,
    simulate_autonomous,
    simulate_coupled,
    tracking_run_to_csv,
)
from .subspace import (
    DEFAULT_TOL,
    AffineSet,
    Subspace,
    Tolerance,
    affine_intersect,
    column_space,
    full_subspace,
    null_space,
    preimage,
    zero_subspace,
)

__version__ = "0.1.0"
