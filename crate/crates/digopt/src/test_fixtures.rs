//! Shared fixtures for unit tests.

use crate::kinematics::{BucketGeometry, ExcavatorModel, Vec2};
use crate::soil::{SoilParams, TerrainProfile};

pub(crate) fn test_model() -> ExcavatorModel {
    ExcavatorModel {
        link_lengths: [5.0, 2.5, 1.0],
        link_masses: [1434.52, 656.189, 809.59],
        link_com_offsets: [
            Vec2::new(2.5, 0.0),
            Vec2::new(1.25, 0.0),
            Vec2::new(0.5, 0.0),
        ],
        link_inertias: [2988.6, 341.8, 67.5],
        joint_velocity_limits: [0.785; 4],
        joint_torque_limits: [950_000.0, 950_000.0, 425_000.0, 300_000.0],
        bucket: BucketGeometry {
            width: 1.0,
            back_plane_length: 1.0,
            separation_plane_length: 1.0,
            plane_angle: std::f64::consts::FRAC_PI_2,
            tooth_direction: Vec2::new(1.0, 0.0),
        },
        swing_angle: 0.0,
    }
}

pub(crate) fn flat_terrain() -> TerrainProfile {
    TerrainProfile::new(vec![(-2.0, 0.0), (12.0, 0.0)]).unwrap()
}

pub(crate) fn soft_soil() -> SoilParams {
    SoilParams {
        rho: 1000.0,
        k_p: 1.0,
        k_v: 300.0,
        k_s: 0.5,
        gravity: 9.81,
    }
}
