//! Scenario ingestion, result persistence and the experiment runner.
//!
//! A scenario is a TOML file with unit-suffixed keys describing the
//! excavator, soil, terrain, task, constraint overrides, solver settings
//! and the seed trajectory. The excavator section may be inlined or pulled
//! from a separate file via `excavator.file`, resolved relative to the
//! scenario. Every default the loader fills is recorded and written back
//! into the emitted summary.

mod results;

pub use results::{
    Manifest, ResultBundle, Summary, VerifyReport, emit_results, evaluate_only, run, verify_bundle,
};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::ConstraintSpec;
use crate::error::{EvalError, ModelError, SeedError, TrajectoryError};
use crate::kinematics::{BucketGeometry, ExcavatorModel, JointVector, Vec2};
use crate::soil::{DEFAULT_SOIL_ELEMENTS, SoilParams, TerrainProfile};
use crate::solver::{DigTask, SolverConfig};
use crate::trajectory::{DEFAULT_DT, KeypointTrajectory, PhaseLabel};

/// Supported scenario schema version.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid scenario: {field}: {message}")]
    Validation { field: String, message: String },
    #[error("seed construction failed: {0}")]
    Seed(#[from] SeedError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

impl ScenarioError {
    fn validation(field: &str, message: impl ToString) -> Self {
        ScenarioError::Validation {
            field: field.to_string(),
            message: message.to_string(),
        }
    }
}

impl From<ModelError> for ScenarioError {
    fn from(e: ModelError) -> Self {
        ScenarioError::Validation {
            field: "model".into(),
            message: e.to_string(),
        }
    }
}

/// Seed selection: heuristic generator or an explicit keypoint list.
#[derive(Debug, Clone, PartialEq)]
pub enum SeedSpec {
    Heuristic,
    Explicit(KeypointTrajectory),
}

/// A fully validated scenario.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub name: String,
    pub excavator: ExcavatorModel,
    pub soil: SoilParams,
    pub terrain: TerrainProfile,
    pub task: DigTask,
    pub constraints: ConstraintSpec,
    pub solver: SolverConfig,
    pub seed: SeedSpec,
    /// Interpolation step for the heuristic seed (s).
    pub dt: f64,
    /// Defaults the loader filled, `field = value` strings.
    pub applied_defaults: Vec<String>,
}

// ---------------------------------------------------------------------------
// Raw file schema

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    schema_version: u32,
    excavator: ExcavatorSection,
    soil: SoilSection,
    terrain: TerrainSection,
    task: TaskSection,
    #[serde(default)]
    constraints: ConstraintsSection,
    #[serde(default)]
    solver: SolverSection,
    #[serde(default)]
    seed: SeedSection,
}

#[derive(Debug, Serialize, Deserialize)]
struct ExcavatorSection {
    /// Path to a shared excavator file, relative to the scenario.
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    inline: Option<ExcavatorFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExcavatorFile {
    boom_length_m: f64,
    stick_length_m: f64,
    bucket_length_m: f64,
    boom_mass_kg: f64,
    stick_mass_kg: f64,
    bucket_mass_kg: f64,
    boom_com_xz_m: [f64; 2],
    stick_com_xz_m: [f64; 2],
    bucket_com_xz_m: [f64; 2],
    boom_inertia_kg_m2: f64,
    stick_inertia_kg_m2: f64,
    bucket_inertia_kg_m2: f64,
    joint_velocity_limits_rad_s: [f64; 4],
    joint_torque_limits_n_m: [f64; 4],
    #[serde(default)]
    #[serde(skip_serializing_if = "Option::is_none")]
    swing_angle_rad: Option<f64>,
    #[serde(default)]
    bucket: BucketSection,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BucketSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    width_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    back_plane_length_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    separation_plane_length_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    plane_angle_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tooth_direction: Option<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SoilSection {
    rho_kg_m3: f64,
    k_p: f64,
    k_v: f64,
    k_s: f64,
    gravity_m_s2: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TerrainSection {
    points_xz_m: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskSection {
    dig_x_start_m: f64,
    dig_x_end_m: f64,
    seed_depth_m: f64,
    volume_min_m3: Option<f64>,
    volume_max_m3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    depth_window_m: Option<[f64; 2]>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    entry_cone_half_angle_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lift_cone_half_angle_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rotation_sign: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pin_boundary_velocities: Option<bool>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    fd_step_angle_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fd_step_interval_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trust_region_init: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trust_region_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shrink_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grow_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    penalty_init: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    penalty_growth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    penalty_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    constraint_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cost_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_penalty_rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time_variable: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_soil_elements: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeedSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    keypoints_rad: Option<Vec<[f64; 4]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    intervals_s: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt_s: Option<f64>,
}

// ---------------------------------------------------------------------------
// Loading

fn read_to_string(path: &Path) -> Result<String, ScenarioError> {
    std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Load and validate a scenario file.
pub fn load_scenario(path: &Path) -> Result<ScenarioSpec, ScenarioError> {
    let text = read_to_string(path)?;
    let file: ScenarioFile = toml::from_str(&text).map_err(|e| ScenarioError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(ScenarioError::validation(
            "schema_version",
            format!(
                "unsupported version {} (expected {})",
                file.schema_version, SCHEMA_VERSION
            ),
        ));
    }
    let mut defaults = Vec::new();

    // Excavator: inline or referenced file.
    let excavator_raw: ExcavatorFile = match (&file.excavator.file, file.excavator.inline) {
        (Some(rel), None) => {
            let excavator_path = path.parent().unwrap_or_else(|| Path::new(".")).join(rel);
            let text = read_to_string(&excavator_path)?;
            toml::from_str(&text).map_err(|e| ScenarioError::Parse {
                path: excavator_path.clone(),
                message: e.to_string(),
            })?
        }
        (None, Some(inline)) => inline,
        (Some(_), Some(_)) => {
            return Err(ScenarioError::validation(
                "excavator",
                "give either `file` or inline fields, not both",
            ));
        }
        (None, None) => {
            return Err(ScenarioError::validation(
                "excavator",
                "missing excavator definition (`file` or inline fields)",
            ));
        }
    };
    let excavator = build_excavator(excavator_raw, &mut defaults)?;
    excavator.validate()?;

    let gravity = file.soil.gravity_m_s2.unwrap_or_else(|| {
        defaults.push("soil.gravity_m_s2 = 9.81".into());
        9.81
    });
    let soil = SoilParams {
        rho: file.soil.rho_kg_m3,
        k_p: file.soil.k_p,
        k_v: file.soil.k_v,
        k_s: file.soil.k_s,
        gravity,
    };
    soil.validate()?;

    let terrain = TerrainProfile::new(
        file.terrain
            .points_xz_m
            .iter()
            .map(|p| (p[0], p[1]))
            .collect(),
    )?;

    let task = DigTask {
        dig_x_start: file.task.dig_x_start_m,
        dig_x_end: file.task.dig_x_end_m,
        seed_depth: file.task.seed_depth_m,
    };
    let range_ok = task.dig_x_start.is_finite()
        && task.dig_x_end.is_finite()
        && task.dig_x_start > task.dig_x_end;
    if !range_ok {
        return Err(ScenarioError::validation(
            "task.dig_x_start_m",
            "must exceed task.dig_x_end_m (the bucket drags toward the machine)",
        ));
    }
    let depth_ok = task.seed_depth.is_finite() && task.seed_depth > 0.0;
    if !depth_ok {
        return Err(ScenarioError::validation(
            "task.seed_depth_m",
            "must be positive",
        ));
    }

    let mut constraints = ConstraintSpec::from_model(&excavator);
    let volume_min = file.task.volume_min_m3.unwrap_or_else(|| {
        defaults.push(format!("task.volume_min_m3 = {}", constraints.volume_min));
        constraints.volume_min
    });
    let volume_max = file.task.volume_max_m3.unwrap_or_else(|| {
        defaults.push(format!("task.volume_max_m3 = {}", constraints.volume_max));
        constraints.volume_max
    });
    if !(volume_min > 0.0 && volume_min <= volume_max) {
        return Err(ScenarioError::validation(
            "task.volume_min_m3",
            "need 0 < volume_min <= volume_max",
        ));
    }
    constraints.volume_min = volume_min;
    constraints.volume_max = volume_max;
    match file.task.depth_window_m {
        Some([z1, z2]) => {
            let window_ok = z1.is_finite() && z2.is_finite() && z1 < z2;
            if !window_ok {
                return Err(ScenarioError::validation(
                    "task.depth_window_m",
                    "need Z1 < Z2",
                ));
            }
            constraints.depth_window = (z1, z2);
        }
        None => defaults.push(format!(
            "task.depth_window_m = [{}, {}]",
            constraints.depth_window.0, constraints.depth_window.1
        )),
    }
    apply_constraints_overrides(&file.constraints, &mut constraints, &mut defaults)?;

    let solver = build_solver(&file.solver, &mut defaults)?;
    let dt = file.solver.dt_s.unwrap_or_else(|| {
        defaults.push(format!("solver.dt_s = {DEFAULT_DT}"));
        DEFAULT_DT
    });
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(ScenarioError::validation("solver.dt_s", "must be positive"));
    }

    let seed = build_seed(&file.seed, dt, &mut defaults)?;

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());

    Ok(ScenarioSpec {
        name,
        excavator,
        soil,
        terrain,
        task,
        constraints,
        solver,
        seed,
        dt,
        applied_defaults: defaults,
    })
}

fn build_excavator(
    raw: ExcavatorFile,
    defaults: &mut Vec<String>,
) -> Result<ExcavatorModel, ScenarioError> {
    let bucket = &raw.bucket;
    let width = bucket.width_m.unwrap_or_else(|| {
        defaults.push("excavator.bucket.width_m = 1.0".into());
        1.0
    });
    let back = bucket.back_plane_length_m.unwrap_or_else(|| {
        defaults.push("excavator.bucket.back_plane_length_m = 1.0".into());
        1.0
    });
    let sep = bucket.separation_plane_length_m.unwrap_or_else(|| {
        defaults.push("excavator.bucket.separation_plane_length_m = 1.0".into());
        1.0
    });
    let angle_deg = bucket.plane_angle_deg.unwrap_or_else(|| {
        defaults.push("excavator.bucket.plane_angle_deg = 90.0".into());
        90.0
    });
    let tooth = bucket.tooth_direction.unwrap_or_else(|| {
        defaults.push("excavator.bucket.tooth_direction = [1.0, 0.0]".into());
        [1.0, 0.0]
    });
    let swing = raw.swing_angle_rad.unwrap_or_else(|| {
        defaults.push("excavator.swing_angle_rad = 0.0".into());
        0.0
    });
    Ok(ExcavatorModel {
        link_lengths: [raw.boom_length_m, raw.stick_length_m, raw.bucket_length_m],
        link_masses: [raw.boom_mass_kg, raw.stick_mass_kg, raw.bucket_mass_kg],
        link_com_offsets: [
            Vec2::new(raw.boom_com_xz_m[0], raw.boom_com_xz_m[1]),
            Vec2::new(raw.stick_com_xz_m[0], raw.stick_com_xz_m[1]),
            Vec2::new(raw.bucket_com_xz_m[0], raw.bucket_com_xz_m[1]),
        ],
        link_inertias: [
            raw.boom_inertia_kg_m2,
            raw.stick_inertia_kg_m2,
            raw.bucket_inertia_kg_m2,
        ],
        joint_velocity_limits: raw.joint_velocity_limits_rad_s,
        joint_torque_limits: raw.joint_torque_limits_n_m,
        bucket: BucketGeometry {
            width,
            back_plane_length: back,
            separation_plane_length: sep,
            plane_angle: angle_deg.to_radians(),
            tooth_direction: Vec2::new(tooth[0], tooth[1]),
        },
        swing_angle: swing,
    })
}

fn apply_constraints_overrides(
    section: &ConstraintsSection,
    spec: &mut ConstraintSpec,
    defaults: &mut Vec<String>,
) -> Result<(), ScenarioError> {
    match section.entry_cone_half_angle_deg {
        Some(deg) => spec.entry_cone_half_angle = deg.to_radians(),
        None => defaults.push("constraints.entry_cone_half_angle_deg = 20.0".into()),
    }
    match section.lift_cone_half_angle_deg {
        Some(deg) => spec.lift_cone_half_angle = deg.to_radians(),
        None => defaults.push("constraints.lift_cone_half_angle_deg = 15.0".into()),
    }
    match section.rotation_sign {
        Some(s) => {
            if s != 1.0 && s != -1.0 {
                return Err(ScenarioError::validation(
                    "constraints.rotation_sign",
                    "must be 1.0 or -1.0",
                ));
            }
            spec.rotation_sign = s;
        }
        None => defaults.push("constraints.rotation_sign = 1.0".into()),
    }
    if let Some(pin) = section.pin_boundary_velocities {
        spec.pin_boundary_velocities = pin;
    } else {
        defaults.push("constraints.pin_boundary_velocities = false".into());
    }
    Ok(())
}

fn build_solver(
    section: &SolverSection,
    defaults: &mut Vec<String>,
) -> Result<SolverConfig, ScenarioError> {
    let base = SolverConfig::default();
    macro_rules! pick {
        ($section_field:ident, $config_field:ident, $name:literal) => {
            match section.$section_field {
                Some(v) => v,
                None => {
                    defaults.push(format!("solver.{} = {:?}", $name, base.$config_field));
                    base.$config_field
                }
            }
        };
        ($field:ident, $name:literal) => {
            pick!($field, $field, $name)
        };
    }
    let config = SolverConfig {
        fd_step_angle: pick!(fd_step_angle_rad, fd_step_angle, "fd_step_angle_rad"),
        fd_step_interval: pick!(fd_step_interval_s, fd_step_interval, "fd_step_interval_s"),
        trust_region_init: pick!(trust_region_init, "trust_region_init"),
        trust_region_min: pick!(trust_region_min, "trust_region_min"),
        shrink_factor: pick!(shrink_factor, "shrink_factor"),
        grow_factor: pick!(grow_factor, "grow_factor"),
        penalty_init: pick!(penalty_init, "penalty_init"),
        penalty_growth: pick!(penalty_growth, "penalty_growth"),
        penalty_max: pick!(penalty_max, "penalty_max"),
        constraint_tolerance: pick!(constraint_tolerance, "constraint_tolerance"),
        cost_tolerance: pick!(cost_tolerance, "cost_tolerance"),
        max_iterations: pick!(max_iterations, "max_iterations"),
        max_penalty_rounds: pick!(max_penalty_rounds, "max_penalty_rounds"),
        time_variable: pick!(time_variable, "time_variable"),
        n_soil_elements: match section.n_soil_elements {
            Some(v) => v,
            None => {
                defaults.push(format!("solver.n_soil_elements = {DEFAULT_SOIL_ELEMENTS}"));
                DEFAULT_SOIL_ELEMENTS
            }
        },
    };
    config
        .validate()
        .map_err(|m| ScenarioError::validation("solver", m))?;
    Ok(config)
}

fn build_seed(
    section: &SeedSection,
    dt: f64,
    defaults: &mut Vec<String>,
) -> Result<SeedSpec, ScenarioError> {
    let mode = section.mode.as_deref().unwrap_or_else(|| {
        defaults.push("seed.mode = \"heuristic\"".into());
        "heuristic"
    });
    match mode {
        "heuristic" => Ok(SeedSpec::Heuristic),
        "explicit" => {
            let keypoints = section
                .keypoints_rad
                .as_ref()
                .ok_or_else(|| {
                    ScenarioError::validation("seed.keypoints_rad", "required for explicit seed")
                })?
                .iter()
                .map(|k| JointVector::new(k[0], k[1], k[2], k[3]))
                .collect::<Vec<_>>();
            let intervals = section.intervals_s.clone().ok_or_else(|| {
                ScenarioError::validation("seed.intervals_s", "required for explicit seed")
            })?;
            let labels = section
                .labels
                .as_ref()
                .ok_or_else(|| {
                    ScenarioError::validation("seed.labels", "required for explicit seed")
                })?
                .iter()
                .map(|s| {
                    PhaseLabel::parse(s).ok_or_else(|| {
                        ScenarioError::validation("seed.labels", format!("unknown label {s:?}"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let dt = section.dt_s.unwrap_or(dt);
            let traj = KeypointTrajectory::new(keypoints, intervals, labels, dt)?;
            Ok(SeedSpec::Explicit(traj))
        }
        other => Err(ScenarioError::validation(
            "seed.mode",
            format!("unknown mode {other:?} (heuristic|explicit)"),
        )),
    }
}

/// Serialize a loaded scenario back to TOML with every field explicit
/// (inline excavator, no defaults left to fill). Loading the result
/// reproduces the same scenario.
pub fn to_toml_string(spec: &ScenarioSpec) -> String {
    let m = &spec.excavator;
    let file = ScenarioFile {
        schema_version: SCHEMA_VERSION,
        excavator: ExcavatorSection {
            file: None,
            inline: Some(ExcavatorFile {
                boom_length_m: m.link_lengths[0],
                stick_length_m: m.link_lengths[1],
                bucket_length_m: m.link_lengths[2],
                boom_mass_kg: m.link_masses[0],
                stick_mass_kg: m.link_masses[1],
                bucket_mass_kg: m.link_masses[2],
                boom_com_xz_m: [m.link_com_offsets[0].x, m.link_com_offsets[0].y],
                stick_com_xz_m: [m.link_com_offsets[1].x, m.link_com_offsets[1].y],
                bucket_com_xz_m: [m.link_com_offsets[2].x, m.link_com_offsets[2].y],
                boom_inertia_kg_m2: m.link_inertias[0],
                stick_inertia_kg_m2: m.link_inertias[1],
                bucket_inertia_kg_m2: m.link_inertias[2],
                joint_velocity_limits_rad_s: m.joint_velocity_limits,
                joint_torque_limits_n_m: m.joint_torque_limits,
                swing_angle_rad: Some(m.swing_angle),
                bucket: BucketSection {
                    width_m: Some(m.bucket.width),
                    back_plane_length_m: Some(m.bucket.back_plane_length),
                    separation_plane_length_m: Some(m.bucket.separation_plane_length),
                    plane_angle_deg: Some(m.bucket.plane_angle.to_degrees()),
                    tooth_direction: Some([m.bucket.tooth_direction.x, m.bucket.tooth_direction.y]),
                },
            }),
        },
        soil: SoilSection {
            rho_kg_m3: spec.soil.rho,
            k_p: spec.soil.k_p,
            k_v: spec.soil.k_v,
            k_s: spec.soil.k_s,
            gravity_m_s2: Some(spec.soil.gravity),
        },
        terrain: TerrainSection {
            points_xz_m: spec
                .terrain
                .samples()
                .iter()
                .map(|&(x, z)| [x, z])
                .collect(),
        },
        task: TaskSection {
            dig_x_start_m: spec.task.dig_x_start,
            dig_x_end_m: spec.task.dig_x_end,
            seed_depth_m: spec.task.seed_depth,
            volume_min_m3: Some(spec.constraints.volume_min),
            volume_max_m3: Some(spec.constraints.volume_max),
            depth_window_m: Some([
                spec.constraints.depth_window.0,
                spec.constraints.depth_window.1,
            ]),
        },
        constraints: ConstraintsSection {
            entry_cone_half_angle_deg: Some(spec.constraints.entry_cone_half_angle.to_degrees()),
            lift_cone_half_angle_deg: Some(spec.constraints.lift_cone_half_angle.to_degrees()),
            rotation_sign: Some(spec.constraints.rotation_sign),
            pin_boundary_velocities: Some(spec.constraints.pin_boundary_velocities),
        },
        solver: SolverSection {
            fd_step_angle_rad: Some(spec.solver.fd_step_angle),
            fd_step_interval_s: Some(spec.solver.fd_step_interval),
            trust_region_init: Some(spec.solver.trust_region_init),
            trust_region_min: Some(spec.solver.trust_region_min),
            shrink_factor: Some(spec.solver.shrink_factor),
            grow_factor: Some(spec.solver.grow_factor),
            penalty_init: Some(spec.solver.penalty_init),
            penalty_growth: Some(spec.solver.penalty_growth),
            penalty_max: Some(spec.solver.penalty_max),
            constraint_tolerance: Some(spec.solver.constraint_tolerance),
            cost_tolerance: Some(spec.solver.cost_tolerance),
            max_iterations: Some(spec.solver.max_iterations),
            max_penalty_rounds: Some(spec.solver.max_penalty_rounds),
            time_variable: Some(spec.solver.time_variable),
            dt_s: Some(spec.dt),
            n_soil_elements: Some(spec.solver.n_soil_elements),
        },
        seed: match &spec.seed {
            SeedSpec::Heuristic => SeedSection {
                mode: Some("heuristic".into()),
                ..SeedSection::default()
            },
            SeedSpec::Explicit(t) => SeedSection {
                mode: Some("explicit".into()),
                keypoints_rad: Some(
                    t.keypoints()
                        .iter()
                        .map(|k| [k[0], k[1], k[2], k[3]])
                        .collect(),
                ),
                intervals_s: Some(t.intervals().to_vec()),
                labels: Some(
                    t.phase_labels()
                        .iter()
                        .map(|l| l.as_str().to_string())
                        .collect(),
                ),
                dt_s: Some(t.dt()),
            },
        },
    };
    toml::to_string_pretty(&file).expect("scenario serialization cannot fail")
}
