"""metriclab: intrinsic distances, similarity of distances and kernel-induced distances."""

from .core import AxiomReport, MetricSpace, check_metric_axioms, custom_space, distance, open_ball_membership
from .errors import (
    BadParams,
    CarrierViolation,
    DegenerateBall,
    DuplicatePoints,
    InsufficientData,
    MetricLabError,
    NoCanonicalPath,
    NonFiniteValue,
    NonPositiveDiagonal,
    StepLimitExceeded,
    UnknownFamily,
    ZeroDenominator,
)
from .intrinsic import (
    ComparisonReport,
    EstimatorConfig,
    IntrinsicEstimate,
    estimate_intrinsic,
    relax_path,
    verify_theorem_instance,
)
from .kernels import (
    Kernel,
    KernelSpec,
    gram_min_eigenvalue,
    kernel_distance,
    kernel_distance_generic,
    kernel_eval,
    laguerre,
    make_kernel,
    sinc,
)
from .paths import (
    LengthResult,
    Partition,
    Path,
    cover_partition,
    length_profile,
    path_length,
    polygonal_length,
    refine_partition,
    straight_path,
    uniform_partition,
)
from .similarity import (
    CompositionReport,
    RatioProfile,
    SimilarityVerdict,
    composition_check,
    composition_function,
    infinitesimal_defect,
    local_dilatation,
    local_ratio_profile,
    similarity_verdict,
)
from .spaces import SpaceSpec, closed_form_intrinsic, make_space, parse_spec

__version__ = "0.1.0"
