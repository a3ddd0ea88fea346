//! Excavation-task constraints as signed scalar residuals.
//!
//! Every constraint is a named residual over the keypoint trajectory:
//! inequality residuals are satisfied when ≤ 0, equality residuals when 0.
//! Direction constraints use half-plane tests `v · n < 0`; heading cones are
//! pairs of half-plane normals around an axis; monotonic direction change
//! compares consecutive directions through a ±90° rotation. Velocity and
//! torque limits are evaluated per dense waypoint and aggregated to one
//! residual per segment and joint so the residual vector keeps a fixed
//! length while time intervals change.

use nalgebra::Rotation2;

use crate::error::ConstraintError;
use crate::kinematics::{self, ExcavatorModel, JointVector, Vec2, cross2};
use crate::soil::{SoilParams, TerrainProfile};
use crate::trajectory::{
    self, DenseTrajectory, KeypointTrajectory, MIN_INTERVAL, PhaseLabel, WaypointDynamics,
};

/// Task-level constraint configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSpec {
    /// Swept-volume bounds (m³), 0 < v_min ≤ v_max.
    pub volume_min: f64,
    pub volume_max: f64,
    /// Depth window [Z1, Z2] below the surface for the penetration-end and
    /// drag-end keypoints (m).
    pub depth_window: (f64, f64),
    /// Half-angle of the entry heading cone around the inward terrain
    /// normal (rad).
    pub entry_cone_half_angle: f64,
    /// Half-angle of the lift heading cone around vertical (rad).
    pub lift_cone_half_angle: f64,
    /// Handedness of the monotonicity rotation R90: +1 digs with clockwise
    /// direction sweep (R90 = +90° CCW), -1 the mirror image.
    pub rotation_sign: f64,
    /// Per-joint velocity limits (rad/s), mirrored from the excavator model.
    pub velocity_limits: [f64; 4],
    /// Per-joint torque limits (N·m), mirrored from the excavator model.
    pub torque_limits: [f64; 4],
    /// Pin first/last keypoint velocities to zero as equality constraints.
    pub pin_boundary_velocities: bool,
}

impl ConstraintSpec {
    pub fn from_model(model: &ExcavatorModel) -> Self {
        Self {
            volume_min: 0.8,
            volume_max: 1.0,
            depth_window: (0.3, 1.2),
            entry_cone_half_angle: 20.0_f64.to_radians(),
            lift_cone_half_angle: 15.0_f64.to_radians(),
            rotation_sign: 1.0,
            velocity_limits: model.joint_velocity_limits,
            torque_limits: model.joint_torque_limits,
            pin_boundary_velocities: false,
        }
    }
}

/// Residual kind: inequality (satisfied ≤ 0) or equality (satisfied = 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    Inequality,
    Equality,
}

/// Constraint family, used to group residuals in iteration traces. The
/// trace names follow the solver's convention: `SweptVolumeCstr`,
/// `LHDirCstr` (lift heading), `TDirMonoCstrPDR` (translation monotonicity
/// over penetration-drag-rotation), and so on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintFamily {
    SweptVolume,
    Depth,
    EntryHeading,
    LiftHeading,
    HeadingMono,
    TranslationMonoPdr,
    Velocity,
    Torque,
    Interval,
    BoundaryVelocity,
}

impl ConstraintFamily {
    pub const ALL: [ConstraintFamily; 10] = [
        ConstraintFamily::SweptVolume,
        ConstraintFamily::Depth,
        ConstraintFamily::EntryHeading,
        ConstraintFamily::LiftHeading,
        ConstraintFamily::HeadingMono,
        ConstraintFamily::TranslationMonoPdr,
        ConstraintFamily::Velocity,
        ConstraintFamily::Torque,
        ConstraintFamily::Interval,
        ConstraintFamily::BoundaryVelocity,
    ];

    pub fn trace_name(&self) -> &'static str {
        match self {
            ConstraintFamily::SweptVolume => "SweptVolumeCstr",
            ConstraintFamily::Depth => "DepthCstr",
            ConstraintFamily::EntryHeading => "EHDirCstr",
            ConstraintFamily::LiftHeading => "LHDirCstr",
            ConstraintFamily::HeadingMono => "HDirMonoCstr",
            ConstraintFamily::TranslationMonoPdr => "TDirMonoCstrPDR",
            ConstraintFamily::Velocity => "VelCstr",
            ConstraintFamily::Torque => "TorqueCstr",
            ConstraintFamily::Interval => "IntervalCstr",
            ConstraintFamily::BoundaryVelocity => "BndVelCstr",
        }
    }
}

/// One named residual.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedResidual {
    pub name: String,
    pub value: f64,
    pub kind: ResidualKind,
    pub family: ConstraintFamily,
}

impl NamedResidual {
    /// Violation magnitude: hinge for inequalities, absolute value for
    /// equalities.
    pub fn violation(&self) -> f64 {
        match self.kind {
            ResidualKind::Inequality => self.value.max(0.0),
            ResidualKind::Equality => self.value.abs(),
        }
    }
}

/// All active constraint residuals of one trajectory, each exactly once.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintReport {
    pub entries: Vec<NamedResidual>,
}

impl ConstraintReport {
    pub fn max_violation(&self) -> f64 {
        self.entries
            .iter()
            .map(NamedResidual::violation)
            .fold(0.0, f64::max)
    }

    /// Largest raw residual of a family, if the family is present.
    pub fn family_max(&self, family: ConstraintFamily) -> Option<f64> {
        self.entries
            .iter()
            .filter(|e| e.family == family)
            .map(|e| e.value)
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }

    pub fn get(&self, name: &str) -> Option<&NamedResidual> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// Half-plane residual `v · n`; negative means satisfied.
pub fn direction_halfplane_residual(v: Vec2, n: Vec2) -> f64 {
    v.dot(&n)
}

/// Bucket heading (tooth direction) in the base frame: `d_h = R(q) d_h^B`.
pub fn heading_direction(model: &ExcavatorModel, q: &JointVector) -> Vec2 {
    let rotation = kinematics::wrap_angle(q[1] + q[2] + q[3]);
    kinematics::rotate_to_base(rotation, model.bucket.tooth_direction)
}

/// Bucket-tip translation between consecutive keypoint tip positions.
/// Degenerate (near-stationary) pairs are reported as errors because their
/// direction is undefined.
pub fn translation_direction(p_from: Vec2, p_to: Vec2) -> Result<Vec2, ConstraintError> {
    let d = p_to - p_from;
    if d.norm() < 1e-9 {
        return Err(ConstraintError::DegenerateTranslation { from: 0, to: 0 });
    }
    Ok(d)
}

/// Two half-plane normals whose intersection is the cone of directions
/// within `half_angle` of `axis`.
pub fn cone_halfplane_normals(axis: Vec2, half_angle: f64) -> (Vec2, Vec2) {
    let offset = std::f64::consts::FRAC_PI_2 + half_angle;
    (
        Rotation2::new(offset) * axis,
        Rotation2::new(-offset) * axis,
    )
}

fn shoelace_signed_area(points: &[Vec2; 4]) -> f64 {
    let mut sum = 0.0;
    for i in 0..4 {
        let a = points[i];
        let b = points[(i + 1) % 4];
        sum += a.x * b.y - b.x * a.y;
    }
    0.5 * sum
}

fn segments_properly_intersect(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> bool {
    let d1 = cross2(a1 - a0, b0 - a0);
    let d2 = cross2(a1 - a0, b1 - a0);
    let d3 = cross2(b1 - b0, a0 - b0);
    let d4 = cross2(b1 - b0, a1 - b0);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

fn labeled_tip_positions(
    traj: &KeypointTrajectory,
    model: &ExcavatorModel,
) -> Result<[Vec2; 4], ConstraintError> {
    let mut points = [Vec2::zeros(); 4];
    for (slot, (label, name)) in [
        (PhaseLabel::Entry, "entry"),
        (PhaseLabel::PenetrationEnd, "penetration_end"),
        (PhaseLabel::DragEnd, "drag_end"),
        (PhaseLabel::Exit, "exit"),
    ]
    .into_iter()
    .enumerate()
    {
        let idx = traj
            .label_index(label)
            .ok_or(ConstraintError::MissingLabel(name))?;
        points[slot] = kinematics::forward_kinematics(model, &traj.keypoints()[idx]).position;
    }
    Ok(points)
}

/// Swept volume: shoelace area of the quadrilateral of entry,
/// penetration-end, drag-end and exit tip points, times the bucket width.
/// Rejects self-intersecting quadrilaterals as degenerate task geometry.
pub fn swept_volume(
    traj: &KeypointTrajectory,
    model: &ExcavatorModel,
) -> Result<f64, ConstraintError> {
    let pts = labeled_tip_positions(traj, model)?;
    if segments_properly_intersect(pts[0], pts[1], pts[2], pts[3])
        || segments_properly_intersect(pts[1], pts[2], pts[3], pts[0])
    {
        return Err(ConstraintError::SelfIntersectingQuad);
    }
    Ok(shoelace_signed_area(&pts).abs() * model.bucket.width)
}

/// Swept volume without the self-intersection check; total on any labeled
/// trajectory. Used inside the solver where transiently degenerate iterates
/// must still evaluate.
pub(crate) fn swept_volume_relaxed(
    traj: &KeypointTrajectory,
    model: &ExcavatorModel,
) -> Result<f64, ConstraintError> {
    let pts = labeled_tip_positions(traj, model)?;
    Ok(shoelace_signed_area(&pts).abs() * model.bucket.width)
}

/// Monotonic direction-change residuals: one per consecutive heading pair
/// over all keypoints, one per consecutive translation pair over the
/// penetration–drag–rotation segments. Negative residuals mean the
/// direction keeps rotating with the configured handedness.
pub fn monotonic_direction_residuals(
    traj: &KeypointTrajectory,
    model: &ExcavatorModel,
    rotation_sign: f64,
) -> Result<Vec<NamedResidual>, ConstraintError> {
    residuals_mono(traj, model, rotation_sign, true)
}

fn residuals_mono(
    traj: &KeypointTrajectory,
    model: &ExcavatorModel,
    rotation_sign: f64,
    strict: bool,
) -> Result<Vec<NamedResidual>, ConstraintError> {
    let r90 = Rotation2::new(rotation_sign * std::f64::consts::FRAC_PI_2);
    let mut out = Vec::new();

    let headings: Vec<Vec2> = traj
        .keypoints()
        .iter()
        .map(|q| heading_direction(model, q))
        .collect();
    for i in 0..headings.len() - 1 {
        out.push(NamedResidual {
            name: format!("heading_mono[{i}]"),
            value: headings[i + 1].dot(&(r90 * headings[i])),
            kind: ResidualKind::Inequality,
            family: ConstraintFamily::HeadingMono,
        });
    }

    let entry = traj
        .label_index(PhaseLabel::Entry)
        .ok_or(ConstraintError::MissingLabel("entry"))?;
    let exit = traj
        .label_index(PhaseLabel::Exit)
        .ok_or(ConstraintError::MissingLabel("exit"))?;
    let tips: Vec<Vec2> = traj
        .keypoints()
        .iter()
        .map(|q| kinematics::forward_kinematics(model, q).position)
        .collect();
    // Segments entry..exit-1 cover penetration, drag and rotation.
    for seg in entry..exit.saturating_sub(1) {
        let d_a = tips[seg + 1] - tips[seg];
        let d_b = tips[seg + 2] - tips[seg + 1];
        let degenerate = d_a.norm() < 1e-9 || d_b.norm() < 1e-9;
        if degenerate && strict {
            return Err(ConstraintError::DegenerateTranslation {
                from: seg,
                to: seg + 1,
            });
        }
        let value = if degenerate {
            0.0
        } else {
            d_b.dot(&(r90 * d_a))
        };
        out.push(NamedResidual {
            name: format!("translation_mono[{seg}]"),
            value,
            kind: ResidualKind::Inequality,
            family: ConstraintFamily::TranslationMonoPdr,
        });
    }
    Ok(out)
}

/// Raw per-waypoint, per-joint limit residuals: `q̇² − v_max²` and
/// `τ² − τ_max²` for the articulated joints; negative means satisfied.
#[derive(Debug, Clone)]
pub struct LimitResiduals {
    pub velocity: Vec<JointVector>,
    pub torque: Vec<JointVector>,
}

pub fn limit_residuals(
    dense: &DenseTrajectory,
    dynamics: &WaypointDynamics,
    spec: &ConstraintSpec,
) -> LimitResiduals {
    let n = dense.len();
    let mut velocity = Vec::with_capacity(n);
    let mut torque = Vec::with_capacity(n);
    for i in 0..n {
        let mut v_res = JointVector::zeros();
        let mut t_res = JointVector::zeros();
        for joint in 0..4 {
            let v_lim = spec.velocity_limits[joint];
            let t_lim = spec.torque_limits[joint];
            v_res[joint] = dense.velocities[i][joint].powi(2) - v_lim * v_lim;
            t_res[joint] = dynamics.torques[i].tau[joint].powi(2) - t_lim * t_lim;
        }
        velocity.push(v_res);
        torque.push(t_res);
    }
    LimitResiduals { velocity, torque }
}

/// Full constraint evaluation. Strict: degenerate geometry (self-intersecting
/// swept quadrilateral, stationary keypoint pairs) is an error.
pub fn evaluate_all(
    traj: &KeypointTrajectory,
    spec: &ConstraintSpec,
    model: &ExcavatorModel,
    terrain: &TerrainProfile,
    soil: &SoilParams,
    n_elements: usize,
) -> Result<ConstraintReport, ConstraintError> {
    evaluate(traj, spec, model, terrain, soil, n_elements, true)
}

/// Relaxed evaluation for solver iterates: every residual is finite for any
/// structurally valid trajectory (degenerate directions contribute 0, the
/// swept quadrilateral skips the self-intersection check).
pub(crate) fn evaluate_relaxed(
    traj: &KeypointTrajectory,
    spec: &ConstraintSpec,
    model: &ExcavatorModel,
    terrain: &TerrainProfile,
    soil: &SoilParams,
    n_elements: usize,
) -> Result<ConstraintReport, ConstraintError> {
    evaluate(traj, spec, model, terrain, soil, n_elements, false)
}

fn evaluate(
    traj: &KeypointTrajectory,
    spec: &ConstraintSpec,
    model: &ExcavatorModel,
    terrain: &TerrainProfile,
    soil: &SoilParams,
    n_elements: usize,
    strict: bool,
) -> Result<ConstraintReport, ConstraintError> {
    let mut entries = Vec::new();

    // Swept-volume bounds.
    let volume = if strict {
        swept_volume(traj, model)?
    } else {
        swept_volume_relaxed(traj, model)?
    };
    entries.push(NamedResidual {
        name: "swept_volume_min".into(),
        value: spec.volume_min - volume,
        kind: ResidualKind::Inequality,
        family: ConstraintFamily::SweptVolume,
    });
    entries.push(NamedResidual {
        name: "swept_volume_max".into(),
        value: volume - spec.volume_max,
        kind: ResidualKind::Inequality,
        family: ConstraintFamily::SweptVolume,
    });

    // Depth windows at penetration-end (b) and drag-end (c).
    let (z1, z2) = spec.depth_window;
    for (label, tag) in [
        (PhaseLabel::PenetrationEnd, "b"),
        (PhaseLabel::DragEnd, "c"),
    ] {
        let idx = traj
            .label_index(label)
            .ok_or(ConstraintError::MissingLabel("penetration_end/drag_end"))?;
        let tip = kinematics::forward_kinematics(model, &traj.keypoints()[idx]).position;
        let depth = terrain.depth_below_surface(tip);
        entries.push(NamedResidual {
            name: format!("depth_min_{tag}"),
            value: z1 - depth,
            kind: ResidualKind::Inequality,
            family: ConstraintFamily::Depth,
        });
        entries.push(NamedResidual {
            name: format!("depth_max_{tag}"),
            value: depth - z2,
            kind: ResidualKind::Inequality,
            family: ConstraintFamily::Depth,
        });
    }

    // Entry heading cone around the inward surface normal.
    let entry_idx = traj
        .label_index(PhaseLabel::Entry)
        .ok_or(ConstraintError::MissingLabel("entry"))?;
    let entry_q = &traj.keypoints()[entry_idx];
    let entry_tip = kinematics::forward_kinematics(model, entry_q).position;
    let inward = -terrain.surface_normal(entry_tip.x);
    let entry_heading = heading_direction(model, entry_q);
    let (n1, n2) = cone_halfplane_normals(inward, spec.entry_cone_half_angle);
    entries.push(NamedResidual {
        name: "entry_heading_cone_1".into(),
        value: direction_halfplane_residual(entry_heading, n1),
        kind: ResidualKind::Inequality,
        family: ConstraintFamily::EntryHeading,
    });
    entries.push(NamedResidual {
        name: "entry_heading_cone_2".into(),
        value: direction_halfplane_residual(entry_heading, n2),
        kind: ResidualKind::Inequality,
        family: ConstraintFamily::EntryHeading,
    });

    // Lift heading cones (approximately upright) at exit and lift keypoints.
    let upright = Vec2::new(0.0, 1.0);
    let (l1, l2) = cone_halfplane_normals(upright, spec.lift_cone_half_angle);
    for (idx, label) in traj.phase_labels().iter().enumerate() {
        if *label == PhaseLabel::Exit || *label == PhaseLabel::LiftEnd {
            let heading = heading_direction(model, &traj.keypoints()[idx]);
            for (which, normal) in [(1, l1), (2, l2)] {
                entries.push(NamedResidual {
                    name: format!("lift_heading_cone_{which}[{idx}]"),
                    value: direction_halfplane_residual(heading, normal),
                    kind: ResidualKind::Inequality,
                    family: ConstraintFamily::LiftHeading,
                });
            }
        }
    }

    // Monotonic direction change.
    entries.extend(residuals_mono(traj, model, spec.rotation_sign, strict)?);

    // Velocity and torque limits, aggregated per segment and joint over the
    // dense waypoints and scaled by the squared limit so all residuals share
    // comparable magnitudes.
    let dense = trajectory::interpolate(traj)?;
    let dynamics = trajectory::waypoint_dynamics(&dense, model, terrain, soil, n_elements);
    let raw = limit_residuals(&dense, &dynamics, spec);
    let segments = traj.intervals().len();
    let mut vel_max = vec![[f64::NEG_INFINITY; 3]; segments];
    let mut tor_max = vec![[f64::NEG_INFINITY; 3]; segments];
    for i in 0..dense.len() {
        let seg = dense.segment_index[i];
        for joint in 1..4 {
            let v_lim = spec.velocity_limits[joint];
            let t_lim = spec.torque_limits[joint];
            let v = raw.velocity[i][joint] / (v_lim * v_lim);
            let t = raw.torque[i][joint] / (t_lim * t_lim);
            vel_max[seg][joint - 1] = vel_max[seg][joint - 1].max(v);
            tor_max[seg][joint - 1] = tor_max[seg][joint - 1].max(t);
        }
    }
    for (seg, row) in vel_max.iter().enumerate() {
        for (joint, value) in row.iter().enumerate() {
            entries.push(NamedResidual {
                name: format!("velocity_limit[{seg}][{}]", joint + 1),
                value: *value,
                kind: ResidualKind::Inequality,
                family: ConstraintFamily::Velocity,
            });
        }
    }
    for (seg, row) in tor_max.iter().enumerate() {
        for (joint, value) in row.iter().enumerate() {
            entries.push(NamedResidual {
                name: format!("torque_limit[{seg}][{}]", joint + 1),
                value: *value,
                kind: ResidualKind::Inequality,
                family: ConstraintFamily::Torque,
            });
        }
    }

    // Interval lower bounds.
    for (i, &t) in traj.intervals().iter().enumerate() {
        entries.push(NamedResidual {
            name: format!("interval_min[{i}]"),
            value: MIN_INTERVAL - t,
            kind: ResidualKind::Inequality,
            family: ConstraintFamily::Interval,
        });
    }

    // Optional rest-to-rest boundary pins.
    if spec.pin_boundary_velocities {
        let n = dense.len();
        for joint in 1..4 {
            entries.push(NamedResidual {
                name: format!("boundary_velocity_start[{joint}]"),
                value: dense.velocities[0][joint],
                kind: ResidualKind::Equality,
                family: ConstraintFamily::BoundaryVelocity,
            });
            entries.push(NamedResidual {
                name: format!("boundary_velocity_end[{joint}]"),
                value: dense.velocities[n - 1][joint],
                kind: ResidualKind::Equality,
                family: ConstraintFamily::BoundaryVelocity,
            });
        }
    }

    Ok(ConstraintReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_fixtures::{flat_terrain, soft_soil, test_model};
    use crate::trajectory::KeypointTrajectory;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn halfplane_residual_cases() {
        assert_eq!(
            direction_halfplane_residual(Vec2::new(0.0, -1.0), Vec2::new(0.0, 1.0)),
            -1.0
        );
        assert_eq!(
            direction_halfplane_residual(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)),
            0.0
        );
        let n = Vec2::new(0.6, 0.8);
        assert_eq!(direction_halfplane_residual(n, n), 1.0);
    }

    #[test]
    fn heading_direction_rotates_tooth_vector() {
        let model = test_model();
        let d = heading_direction(&model, &JointVector::zeros());
        assert!((d - Vec2::new(1.0, 0.0)).norm() < 1e-15);
        let q = JointVector::new(0.0, std::f64::consts::FRAC_PI_2, 0.0, 0.0);
        let d = heading_direction(&model, &q);
        assert!((d - Vec2::new(0.0, 1.0)).norm() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let q = JointVector::new(
                0.0,
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            );
            assert!((heading_direction(&model, &q).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn translation_direction_basics() {
        let d = translation_direction(Vec2::new(0.0, 0.0), Vec2::new(1.0, -1.0)).unwrap();
        assert_eq!(d, Vec2::new(1.0, -1.0));
        assert!(translation_direction(Vec2::new(0.5, 0.5), Vec2::new(0.5, 0.5)).is_err());
        // Additivity across a split segment.
        let (a, b, c) = (
            Vec2::new(0.0, 0.0),
            Vec2::new(0.7, -0.3),
            Vec2::new(1.1, 0.4),
        );
        let lhs = translation_direction(a, c).unwrap();
        let rhs = translation_direction(a, b).unwrap() + translation_direction(b, c).unwrap();
        assert!((lhs - rhs).norm() < 1e-15);
    }

    /// Trajectory whose labeled keypoints produce prescribed tip positions
    /// is overkill here; for swept-volume arithmetic we test the shoelace
    /// path directly through a synthetic rectangle.
    #[test]
    fn swept_volume_rectangle() {
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, -1.0),
            Vec2::new(2.0, -1.0),
            Vec2::new(2.0, 0.0),
        ];
        assert!((shoelace_signed_area(&pts).abs() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn swept_volume_degenerate_collinear() {
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(3.0, 0.0),
        ];
        assert_eq!(shoelace_signed_area(&pts), 0.0);
    }

    #[test]
    fn swept_volume_matches_triangulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            // Random convex quadrilateral: four angles around a center.
            let mut angles: Vec<f64> = (0..4)
                .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                .collect();
            angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if angles.windows(2).any(|w| w[1] - w[0] < 0.2) {
                continue;
            }
            let pts: Vec<Vec2> = angles
                .iter()
                .map(|a| {
                    let r = rng.random_range(0.5..2.0);
                    Vec2::new(r * a.cos(), r * a.sin())
                })
                .collect();
            // The fan triangulation from the first vertex is only exact for
            // convex quadrilaterals.
            let convex = (0..4).all(|i| {
                let e1 = pts[(i + 1) % 4] - pts[i];
                let e2 = pts[(i + 2) % 4] - pts[(i + 1) % 4];
                cross2(e1, e2) > 0.0
            });
            if !convex {
                continue;
            }
            let quad = [pts[0], pts[1], pts[2], pts[3]];
            let shoelace = shoelace_signed_area(&quad).abs();
            // Two-triangle oracle.
            let tri = |a: Vec2, b: Vec2, c: Vec2| 0.5 * cross2(b - a, c - a).abs();
            let oracle = tri(pts[0], pts[1], pts[2]) + tri(pts[0], pts[2], pts[3]);
            assert!((shoelace - oracle).abs() < 1e-12 * (1.0 + oracle));
        }
    }

    #[test]
    fn self_intersection_detected() {
        // Bow-tie ordering.
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(
            segments_properly_intersect(pts[0], pts[1], pts[2], pts[3])
                || segments_properly_intersect(pts[1], pts[2], pts[3], pts[0])
        );
    }

    #[test]
    fn cone_normals_bound_the_cone() {
        let axis = Vec2::new(0.0, -1.0);
        let half = 0.3;
        let (n1, n2) = cone_halfplane_normals(axis, half);
        // Axis direction satisfied strictly.
        assert!(direction_halfplane_residual(axis, n1) < 0.0);
        assert!(direction_halfplane_residual(axis, n2) < 0.0);
        // Direction just inside the cone satisfied, just outside violated.
        for sign in [-1.0, 1.0] {
            let inside = Rotation2::new(sign * (half - 1e-3)) * axis;
            assert!(direction_halfplane_residual(inside, n1) < 0.0);
            assert!(direction_halfplane_residual(inside, n2) < 0.0);
            let outside = Rotation2::new(sign * (half + 1e-3)) * axis;
            assert!(
                direction_halfplane_residual(outside, n1) > 0.0
                    || direction_halfplane_residual(outside, n2) > 0.0
            );
        }
    }

    #[test]
    fn monotone_clockwise_headings_negative_residuals() {
        // Synthetic clockwise-rotating directions with R90 = +90° CCW.
        let r90 = Rotation2::new(std::f64::consts::FRAC_PI_2);
        let mut dirs = Vec::new();
        for i in 0..6 {
            let angle = -0.5 - 0.35 * i as f64;
            dirs.push(Vec2::new(angle.cos(), angle.sin()));
        }
        for w in dirs.windows(2) {
            let residual = w[1].dot(&(r90 * w[0]));
            assert!(residual < 0.0, "clockwise rotation must satisfy");
        }
        // A heading that swings back lands in the forbidden half-plane.
        let back = Rotation2::new(0.4) * dirs[2];
        assert!(back.dot(&(r90 * dirs[2])) > 0.0);
        // Constant heading sits on the boundary.
        assert!(dirs[0].dot(&(r90 * dirs[0])).abs() < 1e-15);
    }

    #[test]
    fn hyperplane_sign_scale_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..100 {
            let v = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let n = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let s = rng.random_range(0.01..100.0);
            let r = direction_halfplane_residual(v, n);
            let r_scaled = direction_halfplane_residual(s * v, n);
            assert_eq!(r > 0.0, r_scaled > 0.0);
            assert_eq!(r < 0.0, r_scaled < 0.0);
        }
    }

    // A hand-built trajectory on flat terrain used by the report tests; the
    // seed generator in the solver module produces the real ones.
    fn dig_trajectory(model: &ExcavatorModel, depth: f64) -> KeypointTrajectory {
        let terrain = flat_terrain();
        crate::solver::seed_trajectory(
            &ConstraintSpec::from_model(model),
            model,
            &terrain,
            &crate::solver::DigTask {
                dig_x_start: 6.0,
                dig_x_end: 4.0,
                seed_depth: depth,
            },
        )
        .expect("seed should be constructible")
    }

    /// Build a trajectory whose labeled keypoints hit prescribed tip
    /// positions (bucket held at -90 degrees throughout).
    fn trajectory_through_tips(model: &ExcavatorModel, tips: [Vec2; 7]) -> KeypointTrajectory {
        let phi3 = -std::f64::consts::FRAC_PI_2;
        let [l1, l2, l3] = model.link_lengths;
        let keypoints: Vec<JointVector> = tips
            .iter()
            .map(|tip| {
                let wrist = tip - l3 * Vec2::new(phi3.cos(), phi3.sin());
                let r_sq = wrist.norm_squared();
                let cos_t2 = (r_sq - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
                assert!((-1.0..=1.0).contains(&cos_t2), "tip {tip:?} unreachable");
                let t2 = -cos_t2.acos();
                let t1 = wrist.y.atan2(wrist.x) - (l2 * t2.sin()).atan2(l1 + l2 * t2.cos());
                JointVector::new(0.0, t1, t2, phi3 - t1 - t2)
            })
            .collect();
        KeypointTrajectory::new(
            keypoints,
            vec![1.0; 6],
            vec![
                PhaseLabel::Entry,
                PhaseLabel::PenetrationEnd,
                PhaseLabel::DragEnd,
                PhaseLabel::RotationMid,
                PhaseLabel::RotationMid,
                PhaseLabel::Exit,
                PhaseLabel::LiftEnd,
            ],
            0.05,
        )
        .unwrap()
    }

    #[test]
    fn swept_volume_of_rectangular_pass() {
        // Labeled tips trace a 2 m x 1 m rectangle; with the 1 m bucket
        // width the swept volume is 2 m^3.
        let model = test_model();
        let traj = trajectory_through_tips(
            &model,
            [
                Vec2::new(5.5, 0.0),  // entry (a)
                Vec2::new(5.5, -1.0), // penetration end (b)
                Vec2::new(3.5, -1.0), // drag end (c)
                Vec2::new(4.0, -0.5),
                Vec2::new(3.6, -0.3),
                Vec2::new(3.5, 0.0), // exit (d)
                Vec2::new(3.3, 0.5),
            ],
        );
        let volume = swept_volume(&traj, &model).unwrap();
        assert!((volume - 2.0).abs() < 1e-9, "volume {volume}");
    }

    #[test]
    fn swept_volume_collinear_tips_is_zero() {
        let model = test_model();
        let traj = trajectory_through_tips(
            &model,
            [
                Vec2::new(6.0, -0.2),
                Vec2::new(5.5, -0.2),
                Vec2::new(5.0, -0.2),
                Vec2::new(4.8, -0.2),
                Vec2::new(4.6, -0.2),
                Vec2::new(4.5, -0.2),
                Vec2::new(4.2, -0.2),
            ],
        );
        let volume = swept_volume(&traj, &model).unwrap();
        assert!(volume < 1e-12, "volume {volume}");
    }

    #[test]
    fn swept_volume_rejects_bowtie() {
        // Swap the drag-end and exit tips so the quadrilateral
        // self-intersects.
        let model = test_model();
        let traj = trajectory_through_tips(
            &model,
            [
                Vec2::new(5.5, 0.0),
                Vec2::new(5.5, -1.0),
                Vec2::new(3.5, 0.0),
                Vec2::new(4.0, -0.5),
                Vec2::new(3.8, -0.5),
                Vec2::new(3.5, -1.0),
                Vec2::new(3.3, -0.5),
            ],
        );
        assert!(matches!(
            swept_volume(&traj, &model),
            Err(ConstraintError::SelfIntersectingQuad)
        ));
        // The relaxed path still yields a finite area.
        assert!(swept_volume_relaxed(&traj, &model).unwrap().is_finite());
    }

    #[test]
    fn limit_residuals_arithmetic() {
        let model = test_model();
        let spec = ConstraintSpec::from_model(&model);
        // Zero motion in zero gravity: residuals sit at the negated squared
        // limits.
        let q = JointVector::new(0.0, 0.4, -0.8, 0.2);
        let traj = KeypointTrajectory::new(
            vec![q; 7],
            vec![1.0; 6],
            vec![
                PhaseLabel::Entry,
                PhaseLabel::PenetrationEnd,
                PhaseLabel::DragEnd,
                PhaseLabel::RotationMid,
                PhaseLabel::RotationMid,
                PhaseLabel::Exit,
                PhaseLabel::LiftEnd,
            ],
            0.05,
        )
        .unwrap();
        let dense = crate::trajectory::interpolate(&traj).unwrap();
        let terrain = flat_terrain();
        let mut soil = soft_soil();
        soil.gravity = 0.0;
        let dynamics = crate::trajectory::waypoint_dynamics(&dense, &model, &terrain, &soil, 40);
        let raw = limit_residuals(&dense, &dynamics, &spec);
        for i in 0..dense.len() {
            for joint in 1..4 {
                let v_lim = spec.velocity_limits[joint];
                let t_lim = spec.torque_limits[joint];
                assert_eq!(raw.velocity[i][joint], -v_lim * v_lim);
                assert_eq!(raw.torque[i][joint], -t_lim * t_lim);
            }
        }
        // A torque exactly at the boom limit gives residual zero.
        let boom_limit = spec.torque_limits[1];
        assert_eq!(boom_limit * boom_limit - boom_limit.powi(2), 0.0);
        // A waypoint at twice the velocity limit: residual 3 v_max^2.
        let mut fast = dense.clone();
        fast.velocities[0][1] = 2.0 * spec.velocity_limits[1];
        let raw = limit_residuals(&fast, &dynamics, &spec);
        let v_lim = spec.velocity_limits[1];
        assert!((raw.velocity[0][1] - 3.0 * v_lim * v_lim).abs() < 1e-12);
    }

    #[test]
    fn report_contains_expected_families_and_is_finite() {
        let model = test_model();
        let terrain = flat_terrain();
        let soil = soft_soil();
        let spec = ConstraintSpec::from_model(&model);
        let traj = dig_trajectory(&model, 0.45);
        let report = evaluate_all(&traj, &spec, &model, &terrain, &soil, 40).unwrap();
        for family in [
            ConstraintFamily::SweptVolume,
            ConstraintFamily::Depth,
            ConstraintFamily::EntryHeading,
            ConstraintFamily::LiftHeading,
            ConstraintFamily::HeadingMono,
            ConstraintFamily::TranslationMonoPdr,
            ConstraintFamily::Velocity,
            ConstraintFamily::Torque,
            ConstraintFamily::Interval,
        ] {
            assert!(report.family_max(family).is_some(), "{family:?} missing");
        }
        for e in &report.entries {
            assert!(e.value.is_finite(), "{} is not finite", e.name);
        }
        // Names unique.
        let mut names: Vec<&str> = report.entries.iter().map(|e| e.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), report.entries.len());
    }

    #[test]
    fn shallow_seed_violates_swept_volume() {
        let model = test_model();
        let terrain = flat_terrain();
        let soil = soft_soil();
        let spec = ConstraintSpec::from_model(&model);
        let traj = dig_trajectory(&model, 0.3);
        let report = evaluate_all(&traj, &spec, &model, &terrain, &soil, 40).unwrap();
        assert!(report.get("swept_volume_min").unwrap().value > 0.0);
    }

    #[test]
    fn soil_coefficients_do_not_change_geometric_residuals() {
        let model = test_model();
        let terrain = flat_terrain();
        let spec = ConstraintSpec::from_model(&model);
        let traj = dig_trajectory(&model, 0.45);
        let soil = soft_soil();
        let mut vacuum = soil;
        vacuum.k_p = 0.0;
        vacuum.k_v = 0.0;
        vacuum.k_s = 0.0;
        let a = evaluate_all(&traj, &spec, &model, &terrain, &soil, 40).unwrap();
        let b = evaluate_all(&traj, &spec, &model, &terrain, &vacuum, 40).unwrap();
        for (ra, rb) in a.entries.iter().zip(&b.entries) {
            if ra.family != ConstraintFamily::Torque {
                assert_eq!(ra.value, rb.value, "{}", ra.name);
            }
        }
    }

    #[test]
    fn swept_volume_translation_invariance() {
        // Rigid translation of all four labeled tip points leaves the
        // shoelace area unchanged.
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..50 {
            let pts: Vec<Vec2> = (0..4)
                .map(|_| Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
                .collect();
            let quad = [pts[0], pts[1], pts[2], pts[3]];
            let shift = Vec2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let shifted = [
                pts[0] + shift,
                pts[1] + shift,
                pts[2] + shift,
                pts[3] + shift,
            ];
            let a = shoelace_signed_area(&quad);
            let b = shoelace_signed_area(&shifted);
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn rotation_equivariance_of_monotonicity_signs() {
        let r90 = Rotation2::new(std::f64::consts::FRAC_PI_2);
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        for _ in 0..100 {
            let a = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let b = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let frame = Rotation2::new(rng.random_range(0.0..std::f64::consts::TAU));
            let plain = b.dot(&(r90 * a));
            let rotated = (frame * b).dot(&(r90 * (frame * a)));
            assert!((plain - rotated).abs() < 1e-12);
        }
    }
}
