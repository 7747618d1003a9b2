"""Multi-copy steerability analysis of bipartite quantum states."""

__version__ = "0.1.0"

from .linalg import DensityMatrix, PureState, ValidationError  # noqa: E402
from .states import IsotropicClass, isotropic, phi_plus, pure_schmidt, random_density  # noqa: E402
from .criteria import (  # noqa: E402
    FilterOperator,
    OptimizerOptions,
    ReductionVerdict,
    apply_filter,
    build_filter,
    fidelity_phi_plus,
    isotropic_twirl,
    max_entanglement_fraction,
    reduction_check,
)
from .thresholds import MeasurementClass, ThresholdValue, Variant, f_povm, f_proj, harmonic, kcopy_threshold  # noqa: E402
from .activation import (  # noqa: E402
    ActivationReport,
    AnalysisOptions,
    analyze,
    bootstrap_two_copy,
    hashing_check,
    minimal_d_two_copies,
    minimal_k,
    superactivation_window,
)
