//! Recursive Newton–Euler inverse dynamics for the planar chain.
//!
//! Maps `(q, q̇, q̈)` plus the external bucket wrench to joint torques
//! satisfying `τ = M(q)q̈ + C(q,q̇)q̇ + V(q) − Jᵀ𝓡`, where `𝓡` is the wrench
//! the soil exerts on the bucket at the tip frame. A forward pass propagates
//! link velocities and accelerations, a backward pass accumulates joint
//! reaction forces. The swing joint is frozen in-plane, so its reported
//! torque is identically zero.

use crate::kinematics::{ExcavatorModel, JointState, JointVector, Vec2, cross2, perp, unit_at};
use nalgebra::Rotation2;

/// Joint torques ordered `[swing, boom, stick, bucket]` (N·m). The swing
/// component is always zero for in-plane motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointTorques {
    pub tau: JointVector,
}

impl JointTorques {
    pub fn zeros() -> Self {
        Self {
            tau: JointVector::zeros(),
        }
    }

    /// Squared norm over the articulated joints (swing excluded).
    pub fn articulated_norm_squared(&self) -> f64 {
        self.tau[1] * self.tau[1] + self.tau[2] * self.tau[2] + self.tau[3] * self.tau[3]
    }
}

/// External wrench applied to the bucket at the tip frame, expressed in
/// base-frame axes: planar force and out-of-plane moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExternalWrench {
    pub force: Vec2,
    pub moment: f64,
}

impl ExternalWrench {
    pub const ZERO: ExternalWrench = ExternalWrench {
        force: Vec2::new(0.0, 0.0),
        moment: 0.0,
    };
}

/// Inverse dynamics: torques required to realize `state` against gravity
/// and the external wrench. `gravity` is the (non-negative) magnitude of
/// the gravitational acceleration along −z.
pub fn inverse_dynamics(
    model: &ExcavatorModel,
    state: &JointState,
    wrench: &ExternalWrench,
    gravity: f64,
) -> JointTorques {
    let g_acc = Vec2::new(0.0, -gravity);

    // Forward pass: absolute angle/rate/acceleration per link, joint point
    // kinematics and COM kinematics.
    let mut phi = 0.0;
    let mut omega = 0.0;
    let mut alpha = 0.0;
    let mut joint_pos = Vec2::zeros();
    let mut joint_acc = Vec2::zeros();

    let mut link_omega = [0.0; 3];
    let mut link_alpha = [0.0; 3];
    let mut com_pos = [Vec2::zeros(); 3];
    let mut com_acc = [Vec2::zeros(); 3];
    let mut joints = [Vec2::zeros(); 4];

    for i in 0..3 {
        phi += state.q[i + 1];
        omega += state.qd[i + 1];
        alpha += state.qdd[i + 1];
        link_omega[i] = omega;
        link_alpha[i] = alpha;
        joints[i] = joint_pos;

        let r_com = Rotation2::new(phi) * model.link_com_offsets[i];
        com_pos[i] = joint_pos + r_com;
        com_acc[i] = joint_acc + alpha * perp(r_com) - omega * omega * r_com;

        let r_link = model.link_lengths[i] * unit_at(phi);
        joint_acc += alpha * perp(r_link) - omega * omega * r_link;
        joint_pos += r_link;
    }
    joints[3] = joint_pos; // bucket tip

    // Backward pass: f[i] is the force on link i from link i-1 at joint i,
    // n[i] the corresponding joint torque. Link i feels the reaction
    // (-f[i+1], -n[i+1]) at its distal joint; the soil wrench on the bucket
    // enters the recursion as the reaction of a virtual child at the tip.
    let mut tau = JointVector::zeros();
    let mut f_child = -wrench.force;
    let mut n_child = -wrench.moment;
    let mut child_joint = joints[3];

    for i in (0..3).rev() {
        let m = model.link_masses[i];
        let inertia = model.link_inertias[i];
        let f = m * com_acc[i] - m * g_acc + f_child;
        let n = inertia * link_alpha[i] + n_child - cross2(joints[i] - com_pos[i], f)
            + cross2(child_joint - com_pos[i], f_child);
        tau[i + 1] = n;
        f_child = f;
        n_child = n;
        child_joint = joints[i];
    }

    JointTorques { tau }
}

/// Gravity compensation torques: inverse dynamics at rest with no wrench.
pub fn gravity_torques(model: &ExcavatorModel, q: &JointVector, gravity: f64) -> JointTorques {
    inverse_dynamics(
        model,
        &JointState::at_rest(*q),
        &ExternalWrench::ZERO,
        gravity,
    )
}
