"""tetrakit: numerical operator theory on the tetrablock.

Membership geometry for the domain and its distinguished boundary,
classification of operator triples (tetrablock unitaries, isometries,
pseudo-commutative variants, a necessary-condition contraction certifier),
fundamental operator pairs, Douglas-type functional models with verified
lifts, and characteristic data sets with coincidence testing.
"""

from .classify import (
    Certificate,
    ClassificationReport,
    DecompositionResult,
    OperatorTriple,
    canonical_decomposition,
    certify_e_contraction,
    check_e_isometry,
    check_pc,
    classify_triple,
    is_commuting,
)
from .errors import TetrakitError
from .fundops import (
    FundamentalPair,
    defect,
    fundamental_pair,
    is_special_pair,
    pencil_contractive,
    solve_quadratic_douglas,
    symbols_commute,
)
from .geometry import (
    MembershipVerdict,
    Point3,
    in_distinguished_boundary,
    in_tetrablock,
    psi_eval,
    sample_bE,
    sup_psi_circle,
)
from .matkernel import (
    SubspaceBasis,
    Tolerances,
    commutator,
    compress,
    joint_eigenvalues,
    numerical_radius,
    operator_norm,
    orthonormal_range,
    psd_sqrt,
    solve_sandwich,
    spectral_radius,
)
from .models import (
    CoincidenceReport,
    DouglasModel,
    ResidualTriple,
    TetrablockDataSet,
    build_lift,
    char_function,
    coincide,
    compute_Q,
    defect_of_theta,
    extract_data_set,
    kernel_model_triple,
    lift_is_strict,
    omega_tau,
    residual_triple,
    validate_special_data_set,
    verify_lift,
)

__version__ = "0.1.0"
