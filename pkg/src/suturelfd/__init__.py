"""Learning-from-demonstration trajectory engine for suturing motions.

Fits dynamic movement primitive models (Cartesian position plus
unit-quaternion orientation) to recorded tool trajectories with locally
weighted regression, regenerates trajectories toward new start and goal
states, and scores regenerated motions against a geometric suturing scene.
"""

from .basis import BasisSet, CanonicalSystem, LwrProblem, eval_basis, forcing_from_weights, lwr_fit, make_basis, phase_at
from .config import Config, resolve_config
from .dmp_orientation import (
    OrientationDmpModel,
    PhaseStopState,
    fit_orientation,
    goal_switch_orientation,
    orientation_error_term,
    rollout_orientation,
)
from .dmp_position import (
    PositionDmpModel,
    RolloutConfig,
    fit_position,
    goal_switch_position,
    rollout_position,
)
from .errors import (
    DegenerateRegressionWarning,
    DegenerateScalingWarning,
    DegenerateScene,
    DomainError,
    MissingReferenceWarning,
    NonMonotonicTime,
    NonUniformStamps,
    TooFewSamples,
)
from .preprocess import (
    DtwResult,
    SegmentationConfig,
    derivatives,
    dtw_align,
    resample_uniform,
    segment_by_velocity,
)
from .quat import UnitQuat, conj, continuity_fix, exp_map, geodesic_angle, log_map, quat_mul, rotate_vector, slerp
from .scene import (
    CompletionReason,
    ErrorReport,
    GeneralityScore,
    NeedleGeometry,
    Pose,
    SuccessTable,
    SutureScene,
    aggregate_success,
    derive_task_goals,
    duration_stats,
    error_report,
    mean_generality,
    needle_tip_path,
    score_generality,
    summarize_reports,
)
from .trajectory import TimedPoseTrajectory

__version__ = "0.1.0"
