"""Factor unitary matrices into products of symmetries (self-adjoint unitaries)."""
from .centerfun import MatrixField, det_c, detc_properties_check, field_four_factor
from .certkit import VerificationReport, deserialize, distance_lower_bound_s4, serialize, verify_certificate
from .factor import (
    FactorizationCertificate,
    FiniteSpectrumSpec,
    RationalAngle,
    conjugate_pair_two_factor,
    finite_spectrum_four_factor,
    finite_spectrum_unitary_four_factor,
    intertwiner_to_symmetry,
    lemma_four_sym_step,
    lemma_two_uni_step,
    radjavi_four_factor,
    scalar_four_factor,
    three_factor_scalar,
    two_symmetry_factor,
    weyl_scalar_four_factor,
)
from .matcore import (
    SpectralDecomposition,
    Tolerance,
    adjoint,
    determinant,
    haar_random_unitary,
    is_symmetry,
    is_unitary,
    operator_norm,
    spectral_decompose,
)
from .obstruct import (
    MembershipReport,
    ObstructionCertificate,
    classify_membership,
    conj_spectrum_obstruction,
    det_obstruction,
    quadrant_obstruction,
)

__version__ = "0.1.0"
