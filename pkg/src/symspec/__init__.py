"""Virtual immersions of compact symmetric spaces and index bounds for minimal hypersurfaces."""
from .bounds import BoundReport, affine_bound_report, cross_corollary_report, linear_bound_report
from .errors import (
    BackendMismatch,
    CalibrationFailure,
    HypothesisNotMet,
    InvalidInput,
    NotASubalgebra,
    RankTooSmall,
    SymSpecError,
    TopologyMismatch,
    UnsupportedHypersurface,
    UnsupportedSpace,
)
from .hypersurface import (
    HypersurfaceMesh,
    affine_constant_a,
    affine_constant_b,
    build_hypersurface,
    genericity_check,
)
from .lie_core import LieAlgebraData, adjoint, bracket, center_of_subalgebra, inner, orthonormalize
from .spectral import (
    HarmonicBasis,
    SpectralReport,
    acs_integral_identity,
    harmonic_forms,
    jacobi_operator,
    q_form,
    rigidity_conditions,
    spectrum,
    test_sections,
)
from .symmetric_space import (
    AmbientVector,
    SpacePoint,
    SymmetricPair,
    build_space,
    calibrate_scale,
    rank_of,
    tangent_frame,
)
from .virtual_immersion import (
    ImmersionContext,
    ResidualReport,
    acs,
    curvature,
    normal_curvature,
    omega,
    second_fundamental_form,
    shape_operator,
    split,
    verify_fundamental,
)

__version__ = "0.1.0"
