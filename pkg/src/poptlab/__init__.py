"""Bipartite product measures, their constraints, and the road to quantum states.

The package follows one pipeline: verify that a product measure is
non-signalling (and non-disturbing across overlapping contexts), reconstruct
the bipartite Hermitian operator behind it, test positivity on product
states, dilate the induced map to a representation on a larger space, and
read off the relative time orientation that separates genuine quantum states
from merely product-positive ones.
"""

from .bell import (
    ChshInstance,
    ChshResult,
    chsh_table_value,
    chsh_value,
    optimize_chsh,
    pr_box_table,
    singlet_state,
)
from .contexts import (
    Context,
    ContextSamplePlan,
    ProductContext,
    coarse_grain,
    computational_context,
    contexts_equal,
    fourier_context,
    overlapping_family,
    product_order_leq,
    pvm_of_context,
    random_context,
    refines,
)
from .dilation import (
    POVM,
    Dilation,
    OrthomorphismReport,
    context_dilation_consistency,
    naimark_dilate,
    orthomorphism_check,
    stinespring_dilate,
)
from .errors import (
    DimensionError,
    InconsistentOracle,
    InvalidInput,
    InvalidPOVM,
    InvalidSetting,
    InvalidSpec,
    NotCompletelyPositive,
    NumericalError,
    PartitionError,
    PoptlabError,
    ReconstructionError,
    UnsupportedQuery,
)
from .fixtures import GeneratedFixture, GeneratorSpec, generate
from .jordan import (
    ClassificationReport,
    ClassifyConfig,
    LinearMapRep,
    OrientationVerdict,
    TimeFlowPair,
    apply_map,
    classify,
    is_completely_positive,
    jordan_defect,
    map_from_state,
    orientation_verdict,
    rep_from_action,
    reversed_flow,
    state_from_map,
    transpose_input,
)
from .measures import (
    ConstraintReport,
    OperatorBackedMeasure,
    PoptCertificate,
    TabulatedMeasure,
    check_no_disturbance,
    check_no_disturbance_operator,
    check_no_signalling,
    check_popt,
    gleason_extend,
    tabulate,
    tomography_family,
)
from .operator_core import (
    Spectrum,
    anticommutator,
    commutator,
    conjugation_flow,
    eig_hermitian,
    ensure_hermitian,
    is_psd,
    jordan_product_pm,
    partial_trace,
    partial_transpose,
    tensor,
)

__version__ = "0.1.0"
