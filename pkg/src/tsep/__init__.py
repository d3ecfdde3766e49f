"""Toeplitz cone toolkit: positivity certificates, atomic (separable)
decompositions, Naimark factorizations, duality pairings, and entanglement
witnesses for block-Toeplitz matrices and matrix trig polynomials."""

from .errors import (
    BadParamsError,
    BudgetExhaustedError,
    DecompositionFailedError,
    DegenerateAtomWarning,
    DimensionMismatchError,
    GridExhaustedError,
    InconsistentAdjointsError,
    NoConvergenceError,
    NotHermitianError,
    NotHermitianValuedError,
    NotOnCircleError,
    NotPSDError,
    NotPositiveError,
    NotStrictlyPositiveError,
    NotUnitaryError,
    ParseError,
    TsepError,
    ZeroInputError,
)
from .toeplitz import (
    BlockToeplitz,
    TrigMatrixPoly,
    assemble,
    duality_pair,
    flip_conjugate,
    flip_unitary,
    gamma_vec,
    shift_basis,
    universal_toeplitz,
)
from .positivity import (
    NOT_POSITIVE,
    POSITIVE,
    STRICTLY_POSITIVE,
    PositivityCertificate,
    check_toeplitz_psd,
    check_trigpoly_psd,
)
from .separability import (
    AtomicDecomposition,
    ProductDecomposition,
    PurityResult,
    caratheodory_scalar,
    decompose_block,
    decompose_identity,
    decompose_toeplitz_toeplitz,
    purity_check,
)
from .dilation import (
    DilationFactorization,
    coefficient_deviation,
    naimark_from_atoms,
    universal_at_unitary,
    verify_factorization,
)
from .cpmaps import (
    FROM_DUAL,
    FROM_TOEPLITZ,
    DualSystemMap,
    MatrixMap,
    ProbeReport,
    apply_map_blockwise,
    hat_of_toeplitz,
    hat_of_trigpoly,
    is_cp_dual_map,
    is_cp_toeplitz_map,
    toeplitz_cp_probe,
    toeplitz_of_dual_map,
    trigpoly_of_toeplitz_map,
)
from .entanglement import (
    ENTANGLED,
    SEPARABLE_FOUND,
    UNDECIDED,
    EntanglementCertificate,
    dual_pure_element,
    rank_one_range_witness,
    separability_search_dual,
)

__version__ = "0.1.0"
