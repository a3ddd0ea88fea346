//! Error types shared across the crate.

use thiserror::Error;

/// Invalid model, terrain or soil parameters.
#[derive(Debug, Clone, Error)]
pub enum ModelError {
    #[error("{field} must be strictly positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("{field} must be finite")]
    NonFinite { field: &'static str },
    #[error("{field} must be a unit vector (norm {norm})")]
    NotUnit { field: &'static str, norm: f64 },
    #[error("plane angle must lie in (0, pi), got {0}")]
    BadPlaneAngle(f64),
    #[error("terrain needs at least two samples, got {0}")]
    TooFewTerrainSamples(usize),
    #[error("terrain x-coordinates must be strictly increasing at sample {index}")]
    TerrainNotIncreasing { index: usize },
}

/// Structural problems with a keypoint trajectory or its interpolation.
#[derive(Debug, Clone, Error)]
pub enum TrajectoryError {
    #[error("need at least 5 keypoints, got {0}")]
    TooFewKeypoints(usize),
    #[error("expected {expected} intervals for {keypoints} keypoints, got {got}")]
    IntervalCountMismatch {
        keypoints: usize,
        expected: usize,
        got: usize,
    },
    #[error("expected one phase label per keypoint ({expected}), got {got}")]
    LabelCountMismatch { expected: usize, got: usize },
    #[error("interval {index} is {value} s, below the minimum {min} s")]
    IntervalTooShort { index: usize, value: f64, min: f64 },
    #[error(
        "dt must be positive and no larger than the shortest interval (dt {dt}, min interval {min_interval})"
    )]
    BadDt { dt: f64, min_interval: f64 },
    #[error(
        "labels must contain exactly one each of entry, penetration_end, drag_end, exit, in that order"
    )]
    BadLabelSequence,
    #[error("non-finite value in keypoints or intervals")]
    NonFinite,
    #[error("segment {segment} resolves to {steps} interpolation steps; at least 2 required")]
    SegmentTooCoarse { segment: usize, steps: i64 },
}

/// Constraint evaluation failures (degenerate geometry, missing labels).
#[derive(Debug, Clone, Error)]
pub enum ConstraintError {
    #[error("trajectory is missing the {0} phase label")]
    MissingLabel(&'static str),
    #[error("swept-volume quadrilateral is self-intersecting")]
    SelfIntersectingQuad,
    #[error("translation direction between keypoints {from} and {to} is degenerate (|d_t| < 1e-9)")]
    DegenerateTranslation { from: usize, to: usize },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

/// Failure while evaluating the optimization problem at some point.
#[derive(Debug, Clone, Error)]
pub enum EvalError {
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("evaluation failed while perturbing variable {variable}: {source}")]
    AtVariable {
        variable: usize,
        #[source]
        source: Box<EvalError>,
    },
}

/// Seed-generation failures.
#[derive(Debug, Clone, Error)]
pub enum SeedError {
    #[error(
        "keypoint {keypoint} ({role}): tip target ({x:.3}, {z:.3}) is outside the arm workspace"
    )]
    OutOfReach {
        keypoint: usize,
        role: &'static str,
        x: f64,
        z: f64,
    },
    #[error("dig range is degenerate: start {start} must exceed end {end}")]
    BadDigRange { start: f64, end: f64 },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}
