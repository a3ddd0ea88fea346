//! Planar kinematics of the excavator arm.
//!
//! The excavation plane is the vertical x–z plane of the base frame `O`:
//! x points away from the machine, z points up, gravity acts along −z and
//! positive angles rotate counter-clockwise. Planar vectors are stored as
//! `Vector2<f64>` whose second component holds the world z coordinate.
//!
//! The arm has four revolute joints `q = [θ0, θ1, θ2, θ3]` (swing, boom,
//! stick, bucket). The swing angle θ0 is held fixed during a dig, so all
//! kinematics and dynamics act on the three articulated in-plane joints. At
//! the zero configuration every link extends along +x.

use nalgebra::{Matrix3, Rotation2, Vector2, Vector4};

use crate::error::ModelError;

/// Planar vector in the excavation plane: `(x, z)`.
pub type Vec2 = Vector2<f64>;
/// Joint-space vector ordered `[swing, boom, stick, bucket]`.
pub type JointVector = Vector4<f64>;

/// Number of articulated in-plane joints (boom, stick, bucket).
pub const ARTICULATED_JOINTS: usize = 3;

/// Normalize an angle to `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut a = angle % two_pi;
    if a <= -std::f64::consts::PI {
        a += two_pi;
    } else if a > std::f64::consts::PI {
        a -= two_pi;
    }
    a
}

/// Wrap-aware difference `a - b`, normalized to `(-pi, pi]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

/// Counter-clockwise perpendicular of a planar vector.
pub fn perp(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// Planar cross product `a × b` (scalar, CCW positive).
pub fn cross2(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Unit vector at the given CCW angle from +x.
pub fn unit_at(angle: f64) -> Vec2 {
    Vec2::new(angle.cos(), angle.sin())
}

/// Two-segment bucket shell used by the soil contact model.
///
/// The separation plane runs from the tip backward opposite the tooth
/// direction; the back plane continues from its far end, rotated by
/// `plane_angle` so the shell opens toward the bucket interior.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketGeometry {
    /// Bucket width perpendicular to the excavation plane (m).
    pub width: f64,
    /// Back-plane segment length (m).
    pub back_plane_length: f64,
    /// Separation-plane segment length (m).
    pub separation_plane_length: f64,
    /// Angle between the two segments (rad), in (0, pi).
    pub plane_angle: f64,
    /// Unit tooth direction expressed in the bucket frame B.
    pub tooth_direction: Vec2,
}

impl BucketGeometry {
    pub fn validate(&self) -> Result<(), ModelError> {
        check_positive("bucket.width", self.width)?;
        check_positive("bucket.back_plane_length", self.back_plane_length)?;
        check_positive(
            "bucket.separation_plane_length",
            self.separation_plane_length,
        )?;
        if !(self.plane_angle > 0.0 && self.plane_angle < std::f64::consts::PI) {
            return Err(ModelError::BadPlaneAngle(self.plane_angle));
        }
        let norm = self.tooth_direction.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
            return Err(ModelError::NotUnit {
                field: "bucket.tooth_direction",
                norm,
            });
        }
        Ok(())
    }
}

/// Geometric and inertial description of the arm, plus actuator limits.
///
/// Link index 0 is the boom, 1 the stick, 2 the bucket. Each link frame has
/// its origin at the link's proximal joint with +x toward the next joint at
/// the zero configuration. Joint limit arrays follow the `[swing, boom,
/// stick, bucket]` joint order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcavatorModel {
    /// Joint-to-joint link lengths (m).
    pub link_lengths: [f64; 3],
    /// Link masses (kg).
    pub link_masses: [f64; 3],
    /// Center-of-mass position of each link in its link frame (m).
    pub link_com_offsets: [Vec2; 3],
    /// Rotational inertia of each link about its COM (kg·m²).
    pub link_inertias: [f64; 3],
    /// Per-joint velocity limits (rad/s).
    pub joint_velocity_limits: [f64; 4],
    /// Per-joint torque limits (N·m).
    pub joint_torque_limits: [f64; 4],
    pub bucket: BucketGeometry,
    /// Fixed swing angle θ0 during the dig (rad).
    pub swing_angle: f64,
}

impl ExcavatorModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (i, &l) in self.link_lengths.iter().enumerate() {
            check_positive(
                ["link_lengths[0]", "link_lengths[1]", "link_lengths[2]"][i],
                l,
            )?;
        }
        for (i, &m) in self.link_masses.iter().enumerate() {
            check_positive(["link_masses[0]", "link_masses[1]", "link_masses[2]"][i], m)?;
        }
        for (i, &j) in self.link_inertias.iter().enumerate() {
            check_positive(
                ["link_inertias[0]", "link_inertias[1]", "link_inertias[2]"][i],
                j,
            )?;
        }
        for c in &self.link_com_offsets {
            if !c.x.is_finite() || !c.y.is_finite() {
                return Err(ModelError::NonFinite {
                    field: "link_com_offsets",
                });
            }
        }
        for &v in &self.joint_velocity_limits {
            check_positive("joint_velocity_limits", v)?;
        }
        for &t in &self.joint_torque_limits {
            check_positive("joint_torque_limits", t)?;
        }
        if !self.swing_angle.is_finite() {
            return Err(ModelError::NonFinite {
                field: "swing_angle",
            });
        }
        self.bucket.validate()
    }

    /// Maximum tip reach from the boom pivot.
    pub fn total_reach(&self) -> f64 {
        self.link_lengths.iter().sum()
    }
}

fn check_positive(field: &'static str, value: f64) -> Result<(), ModelError> {
    if !value.is_finite() {
        return Err(ModelError::NonFinite { field });
    }
    if value <= 0.0 {
        return Err(ModelError::NonPositive { field, value });
    }
    Ok(())
}

/// Pose of the bucket-tip frame B in the base frame O.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPose {
    /// Orientation of frame B, normalized to `(-pi, pi]`.
    pub rotation: f64,
    /// Bucket-tip position (m).
    pub position: Vec2,
}

/// Joint position, velocity and acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointState {
    pub q: JointVector,
    pub qd: JointVector,
    pub qdd: JointVector,
}

impl JointState {
    pub fn at_rest(q: JointVector) -> Self {
        Self {
            q,
            qd: JointVector::zeros(),
            qdd: JointVector::zeros(),
        }
    }
}

/// Velocity of the bucket-tip frame: CCW angular rate and tip linear
/// velocity, both expressed in base-frame axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarTwist {
    pub omega: f64,
    pub linear: Vec2,
}

/// Joint positions along the chain: `[boom pivot, stick joint, bucket joint,
/// bucket tip]`.
pub fn chain_positions(model: &ExcavatorModel, q: &JointVector) -> [Vec2; 4] {
    let mut pts = [Vec2::zeros(); 4];
    let mut phi = 0.0;
    for i in 0..3 {
        phi += q[i + 1];
        pts[i + 1] = pts[i] + model.link_lengths[i] * unit_at(phi);
    }
    pts
}

/// Bucket-tip pose from joint angles: `g_B = FK(q)`.
pub fn forward_kinematics(model: &ExcavatorModel, q: &JointVector) -> PlanarPose {
    let pts = chain_positions(model, q);
    PlanarPose {
        rotation: wrap_angle(q[1] + q[2] + q[3]),
        position: pts[3],
    }
}

/// Planar Jacobian mapping articulated joint rates `[θ̇1, θ̇2, θ̇3]` to the
/// bucket-tip twist `(ω, v_x, v_z)`. Column `i` is the twist produced by
/// unit rate of joint `i+1`: unit rotation about that joint's position.
pub fn spatial_jacobian(model: &ExcavatorModel, q: &JointVector) -> Matrix3<f64> {
    let pts = chain_positions(model, q);
    let tip = pts[3];
    let mut jac = Matrix3::zeros();
    for col in 0..3 {
        let lever = perp(tip - pts[col]);
        jac[(0, col)] = 1.0;
        jac[(1, col)] = lever.x;
        jac[(2, col)] = lever.y;
    }
    jac
}

/// Bucket-tip twist `V_B = J(q) q̇` for the articulated joints.
pub fn body_twist(model: &ExcavatorModel, q: &JointVector, qd: &JointVector) -> PlanarTwist {
    let jac = spatial_jacobian(model, q);
    let rates = nalgebra::Vector3::new(qd[1], qd[2], qd[3]);
    let twist = jac * rates;
    PlanarTwist {
        omega: twist[0],
        linear: Vec2::new(twist[1], twist[2]),
    }
}

/// Velocity of a bucket-fixed point at offset `r` from the tip (base-frame
/// axes): `v = v_B + ω ⟂ r`.
pub fn point_velocity(twist: &PlanarTwist, r: Vec2) -> Vec2 {
    twist.linear + twist.omega * perp(r)
}

/// Rotate a bucket-frame vector into the base frame at the given pose.
pub fn rotate_to_base(rotation: f64, v_b: Vec2) -> Vec2 {
    Rotation2::new(rotation) * v_b
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::test_fixtures::test_model;

    fn unit_links() -> ExcavatorModel {
        let mut m = test_model();
        m.link_lengths = [1.0, 1.0, 1.0];
        m
    }

    /// Independent FK oracle: chain of 3x3 homogeneous transforms.
    fn fk_oracle(model: &ExcavatorModel, q: &JointVector) -> (f64, Vec2) {
        let mut transform = nalgebra::Matrix3::<f64>::identity();
        for i in 0..3 {
            let c = q[i + 1].cos();
            let s = q[i + 1].sin();
            let rot = nalgebra::Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
            let shift = nalgebra::Matrix3::new(
                1.0,
                0.0,
                model.link_lengths[i],
                0.0,
                1.0,
                0.0,
                0.0,
                0.0,
                1.0,
            );
            transform = transform * rot * shift;
        }
        let rotation = transform[(1, 0)].atan2(transform[(0, 0)]);
        (rotation, Vec2::new(transform[(0, 2)], transform[(1, 2)]))
    }

    #[test]
    fn fk_zero_configuration_is_chain_sum() {
        let model = test_model();
        let pose = forward_kinematics(&model, &JointVector::zeros());
        let expected_x =
            ((0.0 + model.link_lengths[0]) + model.link_lengths[1]) + model.link_lengths[2];
        assert_eq!(pose.position.x, expected_x);
        assert_eq!(pose.position.y, 0.0);
        assert_eq!(pose.rotation, 0.0);
    }

    #[test]
    fn fk_rigid_rotation_of_whole_chain() {
        let model = unit_links();
        let q = JointVector::new(0.0, std::f64::consts::FRAC_PI_2, 0.0, 0.0);
        let pose = forward_kinematics(&model, &q);
        assert!((pose.position.x - 0.0).abs() < 1e-12);
        assert!((pose.position.y - 3.0).abs() < 1e-12);
        assert!((pose.rotation - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn fk_matches_transform_product_oracle() {
        let model = test_model();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let q = JointVector::new(
                0.0,
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            );
            let pose = forward_kinematics(&model, &q);
            let (rot, pos) = fk_oracle(&model, &q);
            assert!((pose.position - pos).norm() < 1e-9, "q = {q:?}");
            assert!(angle_diff(pose.rotation, rot).abs() < 1e-9);
        }
    }

    #[test]
    fn fk_rotation_additivity() {
        let model = test_model();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let q = JointVector::new(
                0.0,
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..1.5),
            );
            let base = forward_kinematics(&model, &JointVector::zeros());
            let pose = forward_kinematics(&model, &q);
            let expected = wrap_angle(q[1] + q[2] + q[3]);
            assert_eq!(angle_diff(pose.rotation, base.rotation), expected);
        }
    }

    /// Central finite-difference twist of the FK map.
    fn fd_twist(model: &ExcavatorModel, q: &JointVector, qd: &JointVector, h: f64) -> (f64, Vec2) {
        let qp = q + qd * h;
        let qm = q - qd * h;
        let pp = forward_kinematics(model, &qp);
        let pm = forward_kinematics(model, &qm);
        let omega = angle_diff(pp.rotation, pm.rotation) / (2.0 * h);
        let linear = (pp.position - pm.position) / (2.0 * h);
        (omega, linear)
    }

    #[test]
    fn jacobian_column_matches_fd_perturbation() {
        let model = test_model();
        let q = JointVector::zeros();
        let jac = spatial_jacobian(&model, &q);
        let eps = 1e-6;
        let qd = JointVector::new(0.0, 1.0, 0.0, 0.0);
        let (_, lin) = fd_twist(&model, &q, &qd, eps);
        assert!((lin.x - jac[(1, 0)]).abs() < 1e-6);
        assert!((lin.y - jac[(2, 0)]).abs() < 1e-6);
    }

    #[test]
    fn zero_rates_give_zero_twist() {
        let model = test_model();
        let q = JointVector::new(0.0, 0.4, -0.8, 0.3);
        let twist = body_twist(&model, &q, &JointVector::zeros());
        assert_eq!(twist.omega, 0.0);
        assert_eq!(twist.linear, Vec2::zeros());
    }

    #[test]
    fn jacobian_matches_fd_twist_randomized() {
        let model = test_model();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = 1e-6;
        for _ in 0..200 {
            let q = JointVector::new(
                0.0,
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            let qd = JointVector::new(
                0.0,
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let twist = body_twist(&model, &q, &qd);
            let (omega_fd, lin_fd) = fd_twist(&model, &q, &qd, h);
            let err =
                ((twist.omega - omega_fd).powi(2) + (twist.linear - lin_fd).norm_squared()).sqrt();
            assert!(err <= 1e-5 * (1.0 + qd.norm()), "err = {err}");
        }
    }

    #[test]
    fn point_velocity_pure_translation() {
        let twist = PlanarTwist {
            omega: 0.0,
            linear: Vec2::new(1.0, 0.0),
        };
        for r in [Vec2::zeros(), Vec2::new(0.3, -0.7), Vec2::new(-2.0, 5.0)] {
            assert_eq!(point_velocity(&twist, r), Vec2::new(1.0, 0.0));
        }
    }

    #[test]
    fn point_velocity_pure_rotation() {
        let twist = PlanarTwist {
            omega: 1.0,
            linear: Vec2::zeros(),
        };
        let r = Vec2::new(0.0, 1.0);
        let v = point_velocity(&twist, r);
        assert!((v.norm() - 1.0).abs() < 1e-15);
        assert!(v.dot(&r).abs() < 1e-15);
    }

    #[test]
    fn point_velocity_matches_transported_point_fd() {
        // Transport the point with the frame over a short time and compare
        // against the analytic velocity.
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..100 {
            let twist = PlanarTwist {
                omega: rng.random_range(-2.0..2.0),
                linear: Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
            };
            let r = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let h = 1e-7;
            // Pose at +h and -h: origin moves with v_B, frame rotates by omega*h.
            let transported = |t: f64| -> Vec2 {
                let origin = twist.linear * t;
                origin + Rotation2::new(twist.omega * t) * r
            };
            let fd = (transported(h) - transported(-h)) / (2.0 * h);
            assert!((point_velocity(&twist, r) - fd).norm() < 1e-6);
        }
    }

    #[test]
    fn point_velocity_is_linear() {
        let t1 = PlanarTwist {
            omega: 0.7,
            linear: Vec2::new(0.2, -0.4),
        };
        let t2 = PlanarTwist {
            omega: -1.3,
            linear: Vec2::new(-0.9, 0.1),
        };
        let (a, b) = (2.5, -0.75);
        let combined = PlanarTwist {
            omega: a * t1.omega + b * t2.omega,
            linear: a * t1.linear + b * t2.linear,
        };
        let r = Vec2::new(0.3, 0.9);
        let lhs = point_velocity(&combined, r);
        let rhs = a * point_velocity(&t1, r) + b * point_velocity(&t2, r);
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn wrap_angle_branch() {
        assert_eq!(wrap_angle(std::f64::consts::PI), std::f64::consts::PI);
        assert_eq!(wrap_angle(-std::f64::consts::PI), std::f64::consts::PI);
        assert!((wrap_angle(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!(wrap_angle(0.1) == 0.1);
    }

    #[test]
    fn model_validation_rejects_bad_values() {
        let mut m = test_model();
        m.link_masses[1] = 0.0;
        assert!(m.validate().is_err());
        let mut m = test_model();
        m.bucket.tooth_direction = Vec2::new(2.0, 0.0);
        assert!(m.validate().is_err());
        let mut m = test_model();
        m.bucket.plane_angle = 3.5;
        assert!(m.validate().is_err());
        assert!(test_model().validate().is_ok());
    }
}
