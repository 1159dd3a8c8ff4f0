"""Blind identification of linear time-varying operators from one Dirac-train probe."""
from .certify import Certificate, Verdict, certify, condition_profile, counterexample
from .errors import (
    BudgetError,
    GenerationError,
    IdentError,
    InconsistencyError,
    InfeasibleError,
    PreconditionError,
    StructuralError,
)
from .gabor import (
    MeasurementMatrix,
    build_matrix,
    draw_coefficients,
    spark_check,
    stability_bounds,
    submatrix,
)
from .model import (
    CellVectorField,
    ModelParams,
    SpreadingFunction,
    SupportSet,
    devectorize,
    hs_inner,
    hs_norm,
    random_spreading,
    random_support,
    vectorize,
)
from .recover import (
    CorrelationMatrix,
    Method,
    RecoveryReport,
    correlation,
    factor_Q,
    gram_rank,
    identify,
    mmv_exhaustive,
    music_scores,
    music_support,
    reconstruct,
    somp,
)
from .simulate import ZakField, add_noise, simulate_response, simulate_response_reference

__version__ = "0.1.0"
