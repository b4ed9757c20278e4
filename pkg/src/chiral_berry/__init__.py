"""Geometric quantities of light-driven chiral molecular response over the
sphere of complex polarization orientations."""

from .algebra import (
    EPSILON,
    ABS_EPSILON,
    cross,
    diamond,
    odot,
    vec3,
    levi_civita,
    symmetrized_levi_civita_identity_check,
    signed_contraction_identity_check,
    contraction_identity_check,
)
from .berry import (
    AmplitudeField,
    ConnectionSample,
    CurvatureTensor,
    LoopPath,
    LoopPhase,
    connection_at,
    connection_line_integral,
    connection_pullback,
    curvature_density,
    curvature_from_gram,
    curvature_tensor,
    density_from_channels,
    density_from_wedge,
    exterior_derivative_check,
    holomorphy_check,
    loop_phase,
    stokes_check,
)
from .errors import NotOrthogonal, OpenPath, PoleSingularity, QuadratureUnderResolved
from .molecule import (
    HarmonicDipoleModel,
    QuadratureRule,
    SampledDipoleModel,
    chiral_demo_model,
    default_rule,
    evaluate_dipole,
    gram_tensor,
    harmonic_gram_exact,
    isotropic_model,
    propensity_from_gram,
    propensity_vector,
    random_harmonic_model,
    transform_model,
    uniform_circular_model,
    zero_model,
)
from .polarization import (
    DEFAULT_POLE_MARGIN,
    CircularPolarization,
    FormDensityGrid,
    LinearPolarization,
    OrientationPoint,
    chi_density,
    circular_vector,
    circular_vector_derivatives,
    form_density_grid,
    linear_vector,
    linear_vector_derivatives,
    projection_map,
    projection_map_normalized,
    spherical_frame,
    uniform_grid,
    wedge_coefficient,
    xi_density,
    zeta_density,
)
from .pumpprobe import (
    CurvatureBlocks,
    TwoFieldConfiguration,
    TwoPhotonAmplitudeModel,
    curvature_blocks,
    one_field_reduction_check,
    split_connection,
    split_pullback,
)

__version__ = "0.1.0"
