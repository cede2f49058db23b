"""Near-separable NMF with SPA preconditioned by the minimum-volume enclosing ellipsoid."""
from .errors import (
    ConstantVector,
    DegenerateBasis,
    InsufficientColumns,
    NoConvergence,
    NotPositiveDefinite,
    NotSymmetric,
    PrecSpaError,
    RankDeficient,
    RankDeficientInput,
    RankDeficientWarning,
    SingularAggregate,
    ZeroVector,
)
from .linalg import (
    SymEigResult,
    cholesky,
    condition_number,
    extreme_singular_values,
    gram,
    project_out,
    sym_eig,
    truncated_svd,
)
from .mvee import (
    EllipsoidSolution,
    MveeOptions,
    dual_objective,
    feasibility_margin,
    mvee_active_set,
    mvee_dual_ascent,
)
from .pipeline import (
    ALGORITHMS,
    Preconditioner,
    beta_measure,
    conditioning_report,
    prec_spa,
    reduce_dimension,
    run_algorithm,
    sdp_preconditioner,
    svd_heuristic_preconditioner,
)
from .spa import SpaOptions, l1_normalize_columns, repeated_spa_init, spa, spa_post_process

__version__ = "0.1.0"
