"""Convex envelopes, C^{1,1} insertion between semi-convex and semi-concave
grid fields, and distance-field separation of disjoint closed sets.

The package computes, on uniform grids over boxes and balls in dimension
1-3: lower convex envelopes with Caratheodory witnesses, numerical
semi-concavity / C^{1,omega} estimates, constructive insertion of a
Lipschitz-gradient field between a semi-convex lower bound and a
semi-concave upper bound, and separating domains between closed sets
built from distance fields, with every metric identity measured.
"""

from .envelope import (
    ConvexCombination,
    EnvelopeResult,
    check_coercive,
    envelope_lp_oracle,
    lower_convex_envelope,
    lower_convex_envelope_1d,
    lower_convex_envelope_nd,
)
from .errors import (
    CoverError,
    DomainError,
    EstimationError,
    InputError,
    LevelError,
    ModulationError,
    PreconditionError,
    RangeError,
    RankError,
    ResolutionError,
    SmoothInsertError,
)
from .field import (
    Ball,
    Box,
    ScalarField,
    gradient_all,
    gradient_fd,
    interior_core_mask,
    refine_shape,
    sample,
    second_difference,
)
from .insertion import (
    BumpPartition,
    InsertionOptions,
    InsertionResult,
    coincidence_set,
    demodulate,
    glue,
    insert_c11,
    insert_strict,
    modulate,
)
from .regularity import (
    ModulusSpec,
    RegularityEstimate,
    estimate_c1omega,
    estimate_semiconcavity,
    estimate_semiconvexity,
)
from .separation import (
    ClosedMask,
    DistanceField,
    SeparationOptions,
    SeparationResult,
    check_metric_lemma,
    distance_field,
    midline_separate,
    select_regular_level,
    separate,
    set_distance,
    tube,
)

__version__ = "0.1.0"
