//! Bucket–soil interaction forces.
//!
//! The submerged part of the bucket shell (two line segments: separation
//! plane from the tip, back plane behind it) is discretized into area
//! elements. Each element below the terrain surface and moving toward its
//! soil-facing side feels a normal force driven by hydrostatic pressure
//! `P = ρ g h` plus a velocity term, and a sliding friction force. Element
//! forces are summed into a resultant wrench at the bucket-tip frame.
//!
//! The normal-force formula divides by the normal speed; it is regularized
//! with a small ε so a static bucket exerts no modeled resistance.

use serde::{Deserialize, Serialize};

use crate::dynamics::ExternalWrench;
use crate::error::ModelError;
use crate::kinematics::{self, ExcavatorModel, JointState, Vec2, cross2, perp};

/// Velocity regularization for the normal/friction force directions (m/s).
pub const VELOCITY_EPS: f64 = 1e-6;

/// Default number of area elements per bucket plane.
pub const DEFAULT_SOIL_ELEMENTS: usize = 40;

/// Soil density and resistance coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoilParams {
    /// Mass density ρ (kg/m³).
    pub rho: f64,
    /// Scale on the depth-related pressure (dimensionless).
    pub k_p: f64,
    /// Velocity coefficient (N·s/m³).
    pub k_v: f64,
    /// Friction coefficient (dimensionless).
    pub k_s: f64,
    /// Gravitational acceleration g (m/s²).
    pub gravity: f64,
}

impl SoilParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(ModelError::NonPositive {
                field: "soil.rho",
                value: self.rho,
            });
        }
        if !(self.gravity.is_finite() && self.gravity > 0.0) {
            return Err(ModelError::NonPositive {
                field: "soil.gravity",
                value: self.gravity,
            });
        }
        for (field, value) in [
            ("soil.k_p", self.k_p),
            ("soil.k_v", self.k_v),
            ("soil.k_s", self.k_s),
        ] {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { field });
            }
            if value < 0.0 {
                return Err(ModelError::NonPositive { field, value });
            }
        }
        Ok(())
    }
}

/// Piecewise-linear terrain surface z(x), flat-extrapolated outside the
/// sampled range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerrainProfile {
    samples: Vec<(f64, f64)>,
}

impl TerrainProfile {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self, ModelError> {
        if samples.len() < 2 {
            return Err(ModelError::TooFewTerrainSamples(samples.len()));
        }
        for (i, &(x, z)) in samples.iter().enumerate() {
            if !x.is_finite() || !z.is_finite() {
                return Err(ModelError::NonFinite { field: "terrain" });
            }
            if i > 0 && x <= samples[i - 1].0 {
                return Err(ModelError::TerrainNotIncreasing { index: i });
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// Index of the segment containing x (clamped to the end segments).
    fn segment_index(&self, x: f64) -> usize {
        let n = self.samples.len();
        if x <= self.samples[0].0 {
            return 0;
        }
        if x >= self.samples[n - 1].0 {
            return n - 2;
        }
        match self
            .samples
            .binary_search_by(|(sx, _)| sx.partial_cmp(&x).unwrap())
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        }
    }

    /// Surface height at x, clamped flat outside the sample range.
    pub fn surface_height(&self, x: f64) -> f64 {
        let n = self.samples.len();
        if x <= self.samples[0].0 {
            return self.samples[0].1;
        }
        if x >= self.samples[n - 1].0 {
            return self.samples[n - 1].1;
        }
        let i = self.segment_index(x);
        let (x0, z0) = self.samples[i];
        let (x1, z1) = self.samples[i + 1];
        z0 + (z1 - z0) * (x - x0) / (x1 - x0)
    }

    /// Depth of a point below the surface; negative above the surface.
    pub fn depth_below_surface(&self, p: Vec2) -> f64 {
        self.surface_height(p.x) - p.y
    }

    fn segment_normal(&self, i: usize) -> Vec2 {
        let (x0, z0) = self.samples[i];
        let (x1, z1) = self.samples[i + 1];
        perp(Vec2::new(x1 - x0, z1 - z0)).normalize()
    }

    /// Outward (upward) unit surface normal at x. At interior sample points
    /// the normal is the angle bisector of the adjacent segment normals.
    pub fn surface_normal(&self, x: f64) -> Vec2 {
        let n = self.samples.len();
        for i in 1..n - 1 {
            if x == self.samples[i].0 {
                return (self.segment_normal(i - 1) + self.segment_normal(i)).normalize();
            }
        }
        self.segment_normal(self.segment_index(x))
    }
}

/// Resultant soil force and moment at the bucket-tip frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoilWrench {
    pub force: Vec2,
    pub moment: f64,
}

impl SoilWrench {
    pub const ZERO: SoilWrench = SoilWrench {
        force: Vec2::new(0.0, 0.0),
        moment: 0.0,
    };
}

impl From<SoilWrench> for ExternalWrench {
    fn from(w: SoilWrench) -> Self {
        ExternalWrench {
            force: w.force,
            moment: w.moment,
        }
    }
}

/// Normal force on an area element: magnitude `(K_p·P + K_v·‖v_n‖)·S`,
/// direction `−v̂_n`, regularized so it vanishes with the normal speed.
pub fn element_normal_force(pressure: f64, v_n: Vec2, area: f64, soil: &SoilParams) -> Vec2 {
    let speed = v_n.norm();
    -(soil.k_p * pressure + soil.k_v * speed) * area / (speed + VELOCITY_EPS) * v_n
}

/// Sliding friction on an area element: magnitude `K_s·‖N‖`, direction
/// `−v̂_t`, regularized so it vanishes with the tangential speed.
pub fn element_friction_force(normal_force: Vec2, v_t: Vec2, soil: &SoilParams) -> Vec2 {
    let speed = v_t.norm();
    -soil.k_s * normal_force.norm() / (speed + VELOCITY_EPS) * v_t
}

/// One bucket shell segment in bucket-frame coordinates: start point,
/// unit direction, length and the unit face normal pointing away from the
/// soil-contact side.
struct BucketPlane {
    start: Vec2,
    dir: Vec2,
    length: f64,
    normal: Vec2,
}

/// The two shell segments in the bucket frame. The separation plane runs
/// from the tip opposite the tooth direction; the back plane continues from
/// its far end rotated clockwise by the plane angle, so that in a digging
/// configuration it rises toward the bucket opening. Soil contact sides:
/// below the separation plane, ahead of the back plane.
fn bucket_planes(model: &ExcavatorModel) -> [BucketPlane; 2] {
    let geo = &model.bucket;
    let tooth = geo.tooth_direction;
    let sep_dir = -tooth;
    let back_dir = nalgebra::Rotation2::new(-geo.plane_angle) * tooth;
    [
        BucketPlane {
            start: Vec2::zeros(),
            dir: sep_dir,
            length: geo.separation_plane_length,
            normal: perp(sep_dir),
        },
        BucketPlane {
            start: geo.separation_plane_length * sep_dir,
            dir: back_dir,
            length: geo.back_plane_length,
            normal: -perp(back_dir),
        },
    ]
}

/// Resultant soil wrench on the bucket for the given joint state.
///
/// Each plane is split into `n_elements` equal segments. An element
/// contributes where it is below the surface and moves toward the
/// soil-facing side of its plane; its velocity comes from the bucket body
/// twist `J(q)q̇` transported to the element. The contact gate `v·n̂ < 0`
/// is linear along a plane, so each element is clipped exactly to its
/// contributing sub-interval before the midpoint evaluation, keeping the
/// quadrature error free of the gate discontinuity.
pub fn bucket_soil_wrench(
    model: &ExcavatorModel,
    terrain: &TerrainProfile,
    state: &JointState,
    soil: &SoilParams,
    n_elements: usize,
) -> SoilWrench {
    bucket_soil_wrench_about(model, terrain, state, soil, n_elements, Vec2::zeros())
}

/// [`bucket_soil_wrench`] with the moment taken about the point offset by
/// `reference` from the bucket tip (base-frame axes).
pub fn bucket_soil_wrench_about(
    model: &ExcavatorModel,
    terrain: &TerrainProfile,
    state: &JointState,
    soil: &SoilParams,
    n_elements: usize,
    reference: Vec2,
) -> SoilWrench {
    assert!(n_elements >= 1, "n_elements must be at least 1");
    let pose = kinematics::forward_kinematics(model, &state.q);
    let twist = kinematics::body_twist(model, &state.q, &state.qd);
    let rot = nalgebra::Rotation2::new(pose.rotation);

    let mut force = Vec2::zeros();
    let mut moment = 0.0;

    for plane in bucket_planes(model) {
        let element_len = plane.length / n_elements as f64;
        let normal_world = rot * plane.normal;
        let start_world = rot * plane.start;
        let dir_world = rot * plane.dir;
        // Normal speed is linear in arc length: v(s)*n = gate_0 + gate_slope*s.
        let gate_0 =
            (twist.linear + twist.omega * kinematics::perp(start_world)).dot(&normal_world);
        let gate_slope = twist.omega * kinematics::perp(dir_world).dot(&normal_world);
        for k in 0..n_elements {
            let mut s_lo = k as f64 * element_len;
            let mut s_hi = s_lo + element_len;
            // Clip to the sub-interval moving into the soil side.
            if gate_slope == 0.0 {
                if gate_0 >= 0.0 {
                    continue;
                }
            } else {
                let s_root = -gate_0 / gate_slope;
                if gate_slope > 0.0 {
                    s_hi = s_hi.min(s_root);
                } else {
                    s_lo = s_lo.max(s_root);
                }
                if s_lo >= s_hi {
                    continue;
                }
            }
            let s = 0.5 * (s_lo + s_hi);
            let offset = start_world + s * dir_world;
            let point = pose.position + offset;
            let depth = terrain.depth_below_surface(point);
            if depth <= 0.0 {
                continue;
            }
            let area = (s_hi - s_lo) * model.bucket.width;
            let velocity = kinematics::point_velocity(&twist, offset);
            let vn_scalar = velocity.dot(&normal_world);
            if vn_scalar >= 0.0 {
                continue;
            }
            let v_n = vn_scalar * normal_world;
            let v_t = velocity - v_n;
            let pressure = soil.rho * soil.gravity * depth;
            let normal = element_normal_force(pressure, v_n, area, soil);
            let friction = element_friction_force(normal, v_t, soil);
            let resistance = normal + friction;
            force += resistance;
            moment += cross2(offset - reference, resistance);
        }
    }

    SoilWrench { force, moment }
}
