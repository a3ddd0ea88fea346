//! Minimum-torque, variable-time excavation trajectory optimization.
//!
//! The crate models a planar excavator arm (swing frozen, boom/stick/bucket
//! articulated), computes joint torques with a recursive Newton–Euler pass,
//! evaluates bucket–soil resistance with a two-plane hydrostatic contact
//! model, and optimizes labeled trajectory keypoints plus the time intervals
//! between them under excavation-task constraints using an ℓ1-exact-penalty
//! sequential-convexification solver.
//!
//! Scenario files drive the [`scenario`] module and the `digopt` CLI; the
//! remaining modules are usable as a library on their own.

pub mod constraints;
pub mod dynamics;
pub mod error;
pub mod kinematics;
pub mod scenario;
pub mod soil;
pub mod solver;
pub mod trajectory;

#[cfg(test)]
pub(crate) mod test_fixtures;

pub use dynamics::{ExternalWrench, JointTorques};
pub use kinematics::{ExcavatorModel, JointState, JointVector, PlanarPose, Vec2};
pub use soil::{SoilParams, SoilWrench, TerrainProfile};
pub use trajectory::{DenseTrajectory, KeypointTrajectory, PhaseLabel};
