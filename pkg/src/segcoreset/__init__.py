"""Coresets for k-means clustering of segments and convex bodies."""

from .errors import (
    DimensionMismatchError,
    GridOverflowError,
    InvalidParameterError,
    ParseError,
    QuadratureError,
    SamplingStallError,
    SegcoresetError,
    UnsupportedLipError,
)
from .geometry import (
    CenterSet,
    CoresetParams,
    LipSpec,
    Segment,
    WeightedPointSet,
    lifted_distance,
    lifted_distances,
    segment_loss_exact,
    set_loss,
)
from .grid import SegCoresetOutput, coreset_cost, grid_cost, grid_resolution, seg_coreset
from .oracle import dense_loss, dense_segment_loss, quadrature_loss
from .points import (
    PointCoresetOutput,
    SensitivityProfile,
    bicriteria,
    compute_sensitivities,
    core_set,
)
from .pipeline import (
    ConvexBody,
    PipelineReport,
    ball_body,
    box_body,
    coreset_of_convex,
    coreset_of_segments,
    ellipsoid_body,
    polytope_body,
    sample_body,
)
from .solver import SolveResult, kmeanspp_seed, lloyd, solve_segments
from .data_io import (
    MotionVectorRecord,
    gen_synthetic,
    load_motion_vectors,
    load_roads_fixture,
    load_segments_csv,
    load_weighted_points_csv,
    sample_by_length,
    save_motion_vectors,
    save_segments_csv,
    save_weighted_points_csv,
)
from .tracking import TrackState, featurize, run_tracker, track_window

__version__ = "0.1.0"
