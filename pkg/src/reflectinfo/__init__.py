"""Fisher-information positioning bounds for single-anchor 2D scenes.

A transmitter with a known pose illuminates a receiver both directly and via
single-bounce reflections off flat surfaces. Each reflection behaves like a
direct path from the transmitter's mirror image (virtual anchor), whose
position may carry a Gaussian prior. The package builds the hybrid Fisher
information of the receiver pose, clock offset and virtual anchors from an
OFDM observation model, reduces it to position information in closed form,
and evaluates error bounds and eigen-structure over prior-accuracy sweeps.
"""

from .analysis import (
    CheckResult,
    EigenRow,
    PebRow,
    SweepGrid,
    ValidationReport,
    default_grid,
    eigen_structure,
    eigen_sweep,
    peb_sweep,
    validation_report,
)
from .closedform import (
    DiagonalPathInfo,
    MlMatrix,
    NoPriorResult,
    ZVectors,
    det_va_no_prior_limit,
    m_matrix,
    nlos_efim,
    nlos_efim_no_prior,
    nlos_efim_perfect_prior,
    no_prior_direction,
    poc_efim_closed_form,
    z_vectors,
)
from .errors import (
    ConfigParseError,
    DegenerateGeometry,
    GeometryError,
    LambdaOutOfRange,
    MissingMeasurement,
    NoValidReflection,
    ReflectInfoError,
    SingularFim,
    SingularNuisanceBlock,
    SingularPriorCovariance,
    SubcarrierNotInUse,
    ZeroDistance,
)
from .fim import (
    PERFECT,
    PriorSpec,
    VaPrior,
    asymptotic_channel_fim,
    asymptotic_path_infos,
    channel_fim,
    efim_poc,
    fix_parameters,
    gain_reduced_channel_fim,
    hybrid_fim,
    invert_spd,
    jacobian_T,
    peb,
    prior_fim,
    reciprocal_condition,
)
from .geometry import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    PathGeometry,
    Point2,
    Reflector,
    Scenario,
    incidence_point,
    locus_family,
    path_geometry,
    scenario_paths,
    uca_array,
    ula_array,
    unit,
    unit_perp,
    virtual_anchor,
    wrap_angle,
)
from .signal import (
    ChannelParams,
    OfdmConfig,
    PilotSignal,
    make_pilot,
    mean_signal,
    mean_signal_gradient,
    narrowband_check,
    noise_variance,
    path_gain,
    steering_vector,
    steering_vector_derivative,
)

__version__ = "0.1.0"
