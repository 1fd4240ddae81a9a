"""Strong Bell inequalities for two-channel polarizer experiments.

Quantum cascade-photon predictions, pluggable local hidden-variable models
with quadrature and Monte Carlo ensemble estimation, a brute-force verifier
for the underlying multilinear box inequality, evaluators for the weak,
strong, CH, FC, CHSH and phase-momentum inequalities, and a grid optimizer
over polarizer-axis configurations.
"""

from .core import (
    CHSH_DEFAULT_ANGLES,
    AngleConfig,
    ApparatusParams,
    InequalityReport,
    OutcomePdf,
    correlation_E,
    fold_angle_diff,
    normalize_angle,
    three_axes_config,
)
from .errors import (
    ComparisonUndefinedError,
    DegenerateSourceError,
    InvalidInputError,
    MissingTableEntryError,
    ModelContractError,
    StrongbellError,
    SymmetryError,
    UnsupportedMethodError,
)
from .inequalities import (
    INEQUALITY_NAMES,
    LhvSource,
    QuantumSource,
    SymmetryCheckReport,
    TableSource,
    check_symmetry,
    eval_ch_30,
    eval_chsh,
    eval_fc_31,
    eval_rt_32,
    eval_simplified_29,
    eval_strong_23,
    eval_three_axes_family,
    eval_weak_17,
    evaluate_by_name,
    violation_improvement,
)
from .lhv import (
    CountTally,
    HiddenVariableModel,
    MalusModel,
    NoDetectionModel,
    RandomFourierModel,
    SignModel,
    check_pointwise_inequality,
    check_supplementary,
    ensemble_pdf,
    make_model,
    simulate_counts,
)
from .optimizer import OptimizeResult, SearchSpec, optimize
from .quantum import QuantumModel, angular_correlation_g, solid_angle
from .theorem import (
    BoxPoint,
    TheoremReport,
    case_lower_bound,
    verify_theorem,
    z_grouped,
    z_value,
)

__version__ = "0.1.0"
