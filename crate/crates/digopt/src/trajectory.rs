//! Keypoint trajectories, dense interpolation and the torque-sum objective.
//!
//! The decision variable is a list of labeled joint-space keypoints plus the
//! positive time interval of each segment. For costing, segments are linearly
//! interpolated at a fixed step: segment `i` gets `Q_i = round(T_i / Δt)`
//! uniform steps of effective length `T_i / Q_i`, so segment endpoints land
//! exactly on the keypoints. Velocities and accelerations come from forward
//! differences of consecutive waypoints, with terminal values padded by
//! repetition.

use serde::{Deserialize, Serialize};

use crate::dynamics::{self, JointTorques};
use crate::error::TrajectoryError;
use crate::kinematics::{self, ExcavatorModel, JointState, JointVector, PlanarPose};
use crate::soil::{self, SoilParams, SoilWrench, TerrainProfile};

/// Lower bound on keypoint time intervals (s).
pub const MIN_INTERVAL: f64 = 0.2;

/// Default interpolation step Δt (s).
pub const DEFAULT_DT: f64 = 0.05;

/// Role of a keypoint in the excavation cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseLabel {
    Entry,
    PenetrationEnd,
    DragEnd,
    RotationMid,
    Exit,
    LiftEnd,
}

impl PhaseLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseLabel::Entry => "entry",
            PhaseLabel::PenetrationEnd => "penetration_end",
            PhaseLabel::DragEnd => "drag_end",
            PhaseLabel::RotationMid => "rotation_mid",
            PhaseLabel::Exit => "exit",
            PhaseLabel::LiftEnd => "lift_end",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "entry" => PhaseLabel::Entry,
            "penetration_end" => PhaseLabel::PenetrationEnd,
            "drag_end" => PhaseLabel::DragEnd,
            "rotation_mid" => PhaseLabel::RotationMid,
            "exit" => PhaseLabel::Exit,
            "lift_end" => PhaseLabel::LiftEnd,
            _ => return None,
        })
    }
}

/// Labeled joint-space keypoints with per-segment time intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct KeypointTrajectory {
    keypoints: Vec<JointVector>,
    intervals: Vec<f64>,
    phase_labels: Vec<PhaseLabel>,
    dt: f64,
}

impl KeypointTrajectory {
    /// Build a trajectory, checking the structural invariants: at least 5
    /// keypoints, intervals above [`MIN_INTERVAL`], `dt` no larger than the
    /// shortest interval, and exactly one each of entry, penetration_end,
    /// drag_end, exit in that order.
    pub fn new(
        keypoints: Vec<JointVector>,
        intervals: Vec<f64>,
        phase_labels: Vec<PhaseLabel>,
        dt: f64,
    ) -> Result<Self, TrajectoryError> {
        if keypoints.len() < 5 {
            return Err(TrajectoryError::TooFewKeypoints(keypoints.len()));
        }
        if intervals.len() != keypoints.len() - 1 {
            return Err(TrajectoryError::IntervalCountMismatch {
                keypoints: keypoints.len(),
                expected: keypoints.len() - 1,
                got: intervals.len(),
            });
        }
        if phase_labels.len() != keypoints.len() {
            return Err(TrajectoryError::LabelCountMismatch {
                expected: keypoints.len(),
                got: phase_labels.len(),
            });
        }
        for k in &keypoints {
            if !k.iter().all(|v| v.is_finite()) {
                return Err(TrajectoryError::NonFinite);
            }
        }
        let mut min_interval = f64::INFINITY;
        for (i, &t) in intervals.iter().enumerate() {
            if !t.is_finite() {
                return Err(TrajectoryError::NonFinite);
            }
            if t < MIN_INTERVAL {
                return Err(TrajectoryError::IntervalTooShort {
                    index: i,
                    value: t,
                    min: MIN_INTERVAL,
                });
            }
            min_interval = min_interval.min(t);
        }
        if !(dt > 0.0 && dt <= min_interval) {
            return Err(TrajectoryError::BadDt { dt, min_interval });
        }
        let ordered: Vec<usize> = [
            PhaseLabel::Entry,
            PhaseLabel::PenetrationEnd,
            PhaseLabel::DragEnd,
            PhaseLabel::Exit,
        ]
        .iter()
        .map(|want| {
            let hits: Vec<usize> = phase_labels
                .iter()
                .enumerate()
                .filter(|(_, l)| *l == want)
                .map(|(i, _)| i)
                .collect();
            if hits.len() == 1 {
                Ok(hits[0])
            } else {
                Err(())
            }
        })
        .collect::<Result<_, _>>()
        .map_err(|_| TrajectoryError::BadLabelSequence)?;
        if !(ordered[0] < ordered[1] && ordered[1] < ordered[2] && ordered[2] < ordered[3]) {
            return Err(TrajectoryError::BadLabelSequence);
        }
        Ok(Self {
            keypoints,
            intervals,
            phase_labels,
            dt,
        })
    }

    /// Build without invariant checks. Used by the solver while iterating,
    /// where interval bounds are maintained by the trust-region box.
    pub(crate) fn from_parts_unchecked(
        keypoints: Vec<JointVector>,
        intervals: Vec<f64>,
        phase_labels: Vec<PhaseLabel>,
        dt: f64,
    ) -> Self {
        Self {
            keypoints,
            intervals,
            phase_labels,
            dt,
        }
    }

    pub fn keypoints(&self) -> &[JointVector] {
        &self.keypoints
    }

    pub fn intervals(&self) -> &[f64] {
        &self.intervals
    }

    pub fn phase_labels(&self) -> &[PhaseLabel] {
        &self.phase_labels
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn total_duration(&self) -> f64 {
        self.intervals.iter().sum()
    }

    /// Index of the first keypoint carrying the given label.
    pub fn label_index(&self, label: PhaseLabel) -> Option<usize> {
        self.phase_labels.iter().position(|l| *l == label)
    }
}

/// Densely interpolated trajectory with forward-difference derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTrajectory {
    pub timestamps: Vec<f64>,
    pub positions: Vec<JointVector>,
    pub velocities: Vec<JointVector>,
    pub accelerations: Vec<JointVector>,
    /// Segment index of each waypoint (final waypoint belongs to the last
    /// segment).
    pub segment_index: Vec<usize>,
    /// Effective interpolation step per segment, `T_i / Q_i`.
    pub segment_steps: Vec<f64>,
}

impl DenseTrajectory {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn state(&self, i: usize) -> JointState {
        JointState {
            q: self.positions[i],
            qd: self.velocities[i],
            qdd: self.accelerations[i],
        }
    }
}

/// Linear interpolation at fixed step per segment (`Q_i = round(T_i/Δt)`,
/// effective step `T_i/Q_i`). Rejects segments that resolve to fewer than
/// two steps.
pub fn interpolate(traj: &KeypointTrajectory) -> Result<DenseTrajectory, TrajectoryError> {
    let m = traj.intervals.len();
    let mut timestamps = Vec::new();
    let mut positions = Vec::new();
    let mut segment_index = Vec::new();
    let mut segment_steps = Vec::with_capacity(m);

    let mut t_start = 0.0;
    for seg in 0..m {
        let t_i = traj.intervals[seg];
        let steps = (t_i / traj.dt).round() as i64;
        if steps < 2 {
            return Err(TrajectoryError::SegmentTooCoarse {
                segment: seg,
                steps,
            });
        }
        let q0 = traj.keypoints[seg];
        let q1 = traj.keypoints[seg + 1];
        let h = t_i / steps as f64;
        segment_steps.push(h);
        for j in 0..steps {
            let frac = j as f64 / steps as f64;
            positions.push(q0 + frac * (q1 - q0));
            timestamps.push(t_start + j as f64 * h);
            segment_index.push(seg);
        }
        t_start += t_i;
    }
    positions.push(traj.keypoints[m]);
    timestamps.push(t_start);
    segment_index.push(m - 1);

    let n = positions.len();
    let mut velocities = vec![JointVector::zeros(); n];
    for k in 0..n - 1 {
        velocities[k] = (positions[k + 1] - positions[k]) / (timestamps[k + 1] - timestamps[k]);
    }
    velocities[n - 1] = velocities[n - 2];

    let mut accelerations = vec![JointVector::zeros(); n];
    for k in 0..n.saturating_sub(2) {
        accelerations[k] =
            (velocities[k + 1] - velocities[k]) / (timestamps[k + 1] - timestamps[k]);
    }
    if n >= 3 {
        accelerations[n - 2] = accelerations[n - 3];
        accelerations[n - 1] = accelerations[n - 3];
    }

    Ok(DenseTrajectory {
        timestamps,
        positions,
        velocities,
        accelerations,
        segment_index,
        segment_steps,
    })
}

/// Per-waypoint soil wrench and joint torques of a dense trajectory.
#[derive(Debug, Clone)]
pub struct WaypointDynamics {
    pub wrenches: Vec<SoilWrench>,
    pub torques: Vec<JointTorques>,
}

/// Evaluate the soil wrench and inverse dynamics at every waypoint.
pub fn waypoint_dynamics(
    dense: &DenseTrajectory,
    model: &ExcavatorModel,
    terrain: &TerrainProfile,
    soil: &SoilParams,
    n_elements: usize,
) -> WaypointDynamics {
    let n = dense.len();
    let mut wrenches = Vec::with_capacity(n);
    let mut torques = Vec::with_capacity(n);
    for i in 0..n {
        let state = dense.state(i);
        let wrench = soil::bucket_soil_wrench(model, terrain, &state, soil, n_elements);
        let tau = dynamics::inverse_dynamics(model, &state, &wrench.into(), soil.gravity);
        wrenches.push(wrench);
        torques.push(tau);
    }
    WaypointDynamics { wrenches, torques }
}

/// Torque-sum objective over all waypoints, using the default soil
/// discretization.
///
/// Each waypoint contributes its squared articulated torque norm weighted
/// by `h_i / Δt`, the segment's effective step over the nominal step.
/// When every interval is a multiple of Δt the weights are all one and
/// this is exactly the plain sum of squared torque norms; off the grid the
/// weighting keeps the objective continuous in the time intervals instead
/// of jumping at waypoint-count changes.
pub fn torque_cost(
    traj: &KeypointTrajectory,
    model: &ExcavatorModel,
    terrain: &TerrainProfile,
    soil: &SoilParams,
) -> Result<f64, TrajectoryError> {
    torque_cost_n(traj, model, terrain, soil, soil::DEFAULT_SOIL_ELEMENTS)
}

/// [`torque_cost`] with an explicit per-plane element count.
pub fn torque_cost_n(
    traj: &KeypointTrajectory,
    model: &ExcavatorModel,
    terrain: &TerrainProfile,
    soil: &SoilParams,
    n_elements: usize,
) -> Result<f64, TrajectoryError> {
    let dense = interpolate(traj)?;
    let dynamics = waypoint_dynamics(&dense, model, terrain, soil, n_elements);
    let mut cost = 0.0;
    for (i, tau) in dynamics.torques.iter().enumerate() {
        let weight = dense.segment_steps[dense.segment_index[i]] / traj.dt;
        cost += weight * tau.articulated_norm_squared();
    }
    Ok(cost)
}

/// Bucket-tip pose at every waypoint.
pub fn tip_path(dense: &DenseTrajectory, model: &ExcavatorModel) -> Vec<PlanarPose> {
    dense
        .positions
        .iter()
        .map(|q| kinematics::forward_kinematics(model, q))
        .collect()
}
