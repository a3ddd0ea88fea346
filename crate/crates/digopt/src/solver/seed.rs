//! Heuristic initial trajectory: a four-phase tip path built geometrically
//! on the terrain (approach/penetrate, drag, rotate, lift), converted to
//! joint space with analytic planar inverse kinematics. Keypoint headings
//! sweep clockwise from the inward terrain normal at entry to upright at
//! exit, and every interval starts at one second.

use crate::constraints::ConstraintSpec;
use crate::error::SeedError;
use crate::kinematics::{ExcavatorModel, JointVector, Vec2, unit_at, wrap_angle};
use crate::soil::TerrainProfile;
use crate::trajectory::{DEFAULT_DT, KeypointTrajectory, PhaseLabel};

/// Digging task geometry: the bucket enters at `dig_x_start`, drags to
/// `dig_x_end` (toward the machine, so start > end) at `seed_depth` below
/// the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DigTask {
    pub dig_x_start: f64,
    pub dig_x_end: f64,
    pub seed_depth: f64,
}

/// Heading offsets (rad, clockwise) from the entry heading for the seven
/// seed keypoints, and the matching phase labels.
const HEADING_OFFSETS: [f64; 7] = [0.0, -25.0, -60.0, -100.0, -140.0, -180.0, -183.0];
const LABELS: [PhaseLabel; 7] = [
    PhaseLabel::Entry,
    PhaseLabel::PenetrationEnd,
    PhaseLabel::DragEnd,
    PhaseLabel::RotationMid,
    PhaseLabel::RotationMid,
    PhaseLabel::Exit,
    PhaseLabel::LiftEnd,
];
const ROLES: [&str; 7] = [
    "entry",
    "penetration_end",
    "drag_end",
    "rotation_mid",
    "rotation_mid",
    "exit",
    "lift_end",
];

/// Analytic 3-link planar IK: reach `tip` with bucket absolute angle `phi3`.
/// Uses the elbow-down stick branch (θ2 ≤ 0), the usual excavator posture.
fn inverse_kinematics(model: &ExcavatorModel, tip: Vec2, phi3: f64) -> Option<(f64, f64, f64)> {
    let [l1, l2, l3] = model.link_lengths;
    let wrist = tip - l3 * unit_at(phi3);
    let r_sq = wrist.norm_squared();
    let cos_t2 = (r_sq - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
    if !(-1.0..=1.0).contains(&cos_t2) {
        return None;
    }
    let theta2 = -cos_t2.acos();
    let theta1 = wrist.y.atan2(wrist.x) - (l2 * theta2.sin()).atan2(l1 + l2 * theta2.cos());
    let theta3 = wrap_angle(phi3 - theta1 - theta2);
    Some((wrap_angle(theta1), wrap_angle(theta2), theta3))
}

/// Construct the heuristic seed trajectory for a dig task.
pub fn seed_trajectory(
    _spec: &ConstraintSpec,
    model: &ExcavatorModel,
    terrain: &TerrainProfile,
    task: &DigTask,
) -> Result<KeypointTrajectory, SeedError> {
    let range_ok = task.dig_x_start.is_finite()
        && task.dig_x_end.is_finite()
        && task.dig_x_start > task.dig_x_end;
    if !range_ok {
        return Err(SeedError::BadDigRange {
            start: task.dig_x_start,
            end: task.dig_x_end,
        });
    }
    let span = task.dig_x_start - task.dig_x_end;
    let depth = task.seed_depth;
    let surf = |x: f64| terrain.surface_height(x);

    let xa = task.dig_x_start;
    let xb = xa - 0.2 * span;
    let xc = task.dig_x_end;
    let xm1 = xc - 0.05 * span;
    let xm2 = xc - 0.10 * span;
    let xd = xc - 0.15 * span;
    let xl = xc - 0.20 * span;

    let tips = [
        Vec2::new(xa, surf(xa)),
        Vec2::new(xb, surf(xb) - depth),
        Vec2::new(xc, surf(xc) - depth),
        Vec2::new(xm1, surf(xm1) - 0.8 * depth),
        Vec2::new(xm2, surf(xm2) - 0.4 * depth),
        Vec2::new(xd, surf(xd)),
        Vec2::new(xl, surf(xl) + 0.8),
    ];

    // Entry heading: into the soil along the inward surface normal.
    let inward = -terrain.surface_normal(xa);
    let eta_entry = inward.y.atan2(inward.x);
    let tooth_angle = model
        .bucket
        .tooth_direction
        .y
        .atan2(model.bucket.tooth_direction.x);

    let mut keypoints = Vec::with_capacity(7);
    for (i, tip) in tips.iter().enumerate() {
        let heading = eta_entry + HEADING_OFFSETS[i].to_radians();
        let phi3 = heading - tooth_angle;
        let (t1, t2, t3) = inverse_kinematics(model, *tip, phi3).ok_or(SeedError::OutOfReach {
            keypoint: i,
            role: ROLES[i],
            x: tip.x,
            z: tip.y,
        })?;
        keypoints.push(JointVector::new(model.swing_angle, t1, t2, t3));
    }

    let trajectory = KeypointTrajectory::new(keypoints, vec![1.0; 6], LABELS.to_vec(), DEFAULT_DT)?;
    Ok(trajectory)
}
