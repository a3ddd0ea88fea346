//! Result bundles: running a scenario, writing the output files, and
//! re-verifying stored results against the scenario.
//!
//! A run emits exactly four files into the output directory:
//! `trajectory.csv` (dense states, torques, soil wrench, tip positions),
//! `iterations.csv` (per-iteration solver trace with per-family constraint
//! residuals), `summary.toml` (full-precision optimized keypoints, costs,
//! status, applied defaults) and `tip_path.csv`. Numeric CSV columns carry
//! nine significant digits; the summary keeps full precision so results can
//! be re-verified exactly. All writes go through a temp-file rename.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::constraints::{self, ConstraintFamily, ConstraintReport, ResidualKind};
use crate::kinematics::{JointVector, PlanarPose};
use crate::solver::{
    self, IterationRecord, OptimizationReport, ResidualLayout, SolverStatus, TrajectoryProblem,
};
use crate::trajectory::{self, DenseTrajectory, KeypointTrajectory, PhaseLabel, WaypointDynamics};

use super::{ScenarioError, ScenarioSpec, SeedSpec};

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct ResultBundle {
    pub scenario_name: String,
    pub trajectory: KeypointTrajectory,
    pub dense: DenseTrajectory,
    pub dynamics: WaypointDynamics,
    pub tip_path: Vec<PlanarPose>,
    pub report: OptimizationReport,
    /// Constraint report of the final trajectory (relaxed evaluation, so it
    /// exists even for degenerate stalls).
    pub final_constraints: ConstraintReport,
    pub final_volume: f64,
    pub final_cost: f64,
    pub applied_defaults: Vec<String>,
}

impl ResultBundle {
    /// Re-evaluate the stored trajectory and compare against the stored
    /// per-waypoint torques.
    pub fn internally_consistent(&self, spec: &ScenarioSpec) -> bool {
        let redo = trajectory::waypoint_dynamics(
            &self.dense,
            &spec.excavator,
            &spec.terrain,
            &spec.soil,
            spec.solver.n_soil_elements,
        );
        redo.torques
            .iter()
            .zip(&self.dynamics.torques)
            .all(|(a, b)| (a.tau - b.tau).norm() <= 1e-9 * (1.0 + b.tau.norm()))
    }
}

/// Build the seed trajectory of a scenario. Heuristic seeds are rebuilt at
/// the scenario's interpolation step when it differs from the default.
pub fn build_seed(spec: &ScenarioSpec) -> Result<KeypointTrajectory, ScenarioError> {
    match &spec.seed {
        SeedSpec::Explicit(t) => Ok(t.clone()),
        SeedSpec::Heuristic => {
            let seed = solver::seed_trajectory(
                &spec.constraints,
                &spec.excavator,
                &spec.terrain,
                &spec.task,
            )?;
            if seed.dt() == spec.dt {
                Ok(seed)
            } else {
                Ok(KeypointTrajectory::new(
                    seed.keypoints().to_vec(),
                    seed.intervals().to_vec(),
                    seed.phase_labels().to_vec(),
                    spec.dt,
                )?)
            }
        }
    }
}

fn bundle_from_trajectory(
    spec: &ScenarioSpec,
    trajectory: KeypointTrajectory,
    report: OptimizationReport,
) -> Result<ResultBundle, ScenarioError> {
    let dense = trajectory::interpolate(&trajectory)?;
    let dynamics = trajectory::waypoint_dynamics(
        &dense,
        &spec.excavator,
        &spec.terrain,
        &spec.soil,
        spec.solver.n_soil_elements,
    );
    let tip_path = trajectory::tip_path(&dense, &spec.excavator);
    let final_constraints = constraints::evaluate_relaxed(
        &trajectory,
        &spec.constraints,
        &spec.excavator,
        &spec.terrain,
        &spec.soil,
        spec.solver.n_soil_elements,
    )
    .map_err(crate::error::EvalError::from)?;
    let final_volume = constraints::swept_volume_relaxed(&trajectory, &spec.excavator)
        .map_err(crate::error::EvalError::from)?;
    let final_cost = report.final_cost();
    Ok(ResultBundle {
        scenario_name: spec.name.clone(),
        trajectory,
        dense,
        dynamics,
        tip_path,
        report,
        final_constraints,
        final_volume,
        final_cost,
        applied_defaults: spec.applied_defaults.clone(),
    })
}

/// Seed and optimize a scenario; write the bundle when `out_dir` is given.
pub fn run(spec: &ScenarioSpec, out_dir: Option<&Path>) -> Result<ResultBundle, ScenarioError> {
    let seed = build_seed(spec)?;
    let report = solver::optimize(
        &seed,
        &spec.constraints,
        &spec.excavator,
        &spec.terrain,
        &spec.soil,
        &spec.solver,
    )?;
    let bundle = bundle_from_trajectory(spec, report.final_trajectory.clone(), report)?;
    if let Some(dir) = out_dir {
        emit_results(&bundle, dir).map_err(|source| ScenarioError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    Ok(bundle)
}

/// Evaluate a scenario's seed without optimizing: the bundle carries a
/// single-record history describing the seed itself.
pub fn evaluate_only(
    spec: &ScenarioSpec,
    out_dir: Option<&Path>,
    heuristic_only: bool,
) -> Result<ResultBundle, ScenarioError> {
    let start = Instant::now();
    let seed = if heuristic_only {
        solver::seed_trajectory(
            &spec.constraints,
            &spec.excavator,
            &spec.terrain,
            &spec.task,
        )?
    } else {
        build_seed(spec)?
    };
    let problem = TrajectoryProblem::new(
        &spec.excavator,
        &spec.terrain,
        &spec.soil,
        &spec.constraints,
        seed.clone(),
        &spec.solver,
    );
    let layout = problem.residual_layout()?;
    let x = problem.pack(&seed);
    let eval = solver::OptimizationProblem::evaluate(&problem, &x)?;
    let cost = eval.cost / problem.cost_scale;
    let record = IterationRecord {
        iteration: 0,
        penalty: spec.solver.penalty_init,
        cost,
        merit: eval.merit(spec.solver.penalty_init),
        max_violation: eval.max_violation(),
        trust_radius: spec.solver.trust_region_init,
        accepted: false,
        inequalities: eval.inequalities.clone(),
        equalities: eval.equalities.clone(),
    };
    let status = if eval.max_violation() <= spec.solver.constraint_tolerance {
        SolverStatus::Converged
    } else {
        SolverStatus::MaxIterations
    };
    let report = OptimizationReport {
        history: vec![record],
        final_trajectory: seed.clone(),
        status,
        wall_clock: start.elapsed(),
        layout,
    };
    let bundle = bundle_from_trajectory(spec, seed, report)?;
    if let Some(dir) = out_dir {
        emit_results(&bundle, dir).map_err(|source| ScenarioError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    Ok(bundle)
}

// ---------------------------------------------------------------------------
// Emission

/// Names and sizes of the emitted files.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub files: Vec<(PathBuf, u64)>,
}

fn atomic_write(path: &Path, contents: &str) -> std::io::Result<u64> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(contents.len() as u64)
}

/// Nine-significant-digit scientific notation for CSV columns.
fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

fn trajectory_csv(bundle: &ResultBundle) -> String {
    let mut out = String::new();
    out.push_str(
        "t_s,q0_rad,q1_rad,q2_rad,q3_rad,qd0_rad_s,qd1_rad_s,qd2_rad_s,qd3_rad_s,\
         tau0_n_m,tau1_n_m,tau2_n_m,tau3_n_m,fx_n,fz_n,my_n_m,tip_x_m,tip_z_m\n",
    );
    for i in 0..bundle.dense.len() {
        let q = bundle.dense.positions[i];
        let qd = bundle.dense.velocities[i];
        let tau = bundle.dynamics.torques[i].tau;
        let w = bundle.dynamics.wrenches[i];
        let tip = bundle.tip_path[i].position;
        let row = [
            bundle.dense.timestamps[i],
            q[0],
            q[1],
            q[2],
            q[3],
            qd[0],
            qd[1],
            qd[2],
            qd[3],
            tau[0],
            tau[1],
            tau[2],
            tau[3],
            w.force.x,
            w.force.y,
            w.moment,
            tip.x,
            tip.y,
        ];
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&sig9(v));
            first = false;
        }
        out.push('\n');
    }
    out
}

/// Family-wise maximum residuals of one iteration record.
fn family_maxima(
    record: &IterationRecord,
    layout: &ResidualLayout,
) -> Vec<(ConstraintFamily, f64)> {
    let mut out: Vec<(ConstraintFamily, f64)> = Vec::new();
    for family in ConstraintFamily::ALL {
        let mut max: Option<f64> = None;
        for (value, fam) in record.inequalities.iter().zip(&layout.inequality_families) {
            if *fam == family {
                max = Some(max.map_or(*value, |m: f64| m.max(*value)));
            }
        }
        if family == ConstraintFamily::BoundaryVelocity {
            for value in &record.equalities {
                max = Some(max.map_or(value.abs(), |m: f64| m.max(value.abs())));
            }
        }
        if let Some(m) = max {
            out.push((family, m));
        }
    }
    out
}

fn iterations_csv(bundle: &ResultBundle) -> String {
    let layout = &bundle.report.layout;
    let families: Vec<ConstraintFamily> = family_maxima(&bundle.report.history[0], layout)
        .into_iter()
        .map(|(f, _)| f)
        .collect();
    let mut out = String::from("iteration,penalty,cost,merit,max_violation,trust_radius,accepted");
    for f in &families {
        out.push(',');
        out.push_str(f.trace_name());
    }
    out.push('\n');
    for rec in &bundle.report.history {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            rec.iteration,
            sig9(rec.penalty),
            sig9(rec.cost),
            sig9(rec.merit),
            sig9(rec.max_violation),
            sig9(rec.trust_radius),
            rec.accepted as u8
        );
        for (_, value) in family_maxima(rec, layout) {
            out.push(',');
            out.push_str(&sig9(value));
        }
        out.push('\n');
    }
    out
}

fn tip_path_csv(bundle: &ResultBundle) -> String {
    let mut out = String::from("t_s,tip_x_m,tip_z_m,heading_rad\n");
    for (i, pose) in bundle.tip_path.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            sig9(bundle.dense.timestamps[i]),
            sig9(pose.position.x),
            sig9(pose.position.y),
            sig9(pose.rotation)
        );
    }
    out
}

/// Serialized summary; numbers are kept at full round-trip precision.
#[derive(Debug, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub scenario: String,
    pub status: String,
    pub final_cost: f64,
    pub final_volume_m3: f64,
    pub final_max_violation: f64,
    pub total_duration_s: f64,
    pub wall_clock_s: f64,
    pub iterations: usize,
    pub dt_s: f64,
    pub labels: Vec<String>,
    pub keypoints_rad: Vec<[f64; 4]>,
    pub intervals_s: Vec<f64>,
    pub applied_defaults: Vec<String>,
    pub final_residuals: Vec<ResidualEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub name: String,
    pub value: f64,
    pub kind: String,
}

fn summary_toml(bundle: &ResultBundle) -> Result<String, std::io::Error> {
    let traj = &bundle.trajectory;
    let summary = Summary {
        schema_version: super::SCHEMA_VERSION,
        scenario: bundle.scenario_name.clone(),
        status: bundle.report.status.as_str().to_string(),
        final_cost: bundle.final_cost,
        final_volume_m3: bundle.final_volume,
        final_max_violation: bundle.report.final_max_violation(),
        total_duration_s: traj.total_duration(),
        wall_clock_s: bundle.report.wall_clock.as_secs_f64(),
        iterations: bundle.report.history.len(),
        dt_s: traj.dt(),
        labels: traj
            .phase_labels()
            .iter()
            .map(|l| l.as_str().to_string())
            .collect(),
        keypoints_rad: traj
            .keypoints()
            .iter()
            .map(|k| [k[0], k[1], k[2], k[3]])
            .collect(),
        intervals_s: traj.intervals().to_vec(),
        applied_defaults: bundle.applied_defaults.clone(),
        final_residuals: bundle
            .final_constraints
            .entries
            .iter()
            .map(|e| ResidualEntry {
                name: e.name.clone(),
                value: e.value,
                kind: match e.kind {
                    ResidualKind::Inequality => "inequality".into(),
                    ResidualKind::Equality => "equality".into(),
                },
            })
            .collect(),
    };
    toml::to_string_pretty(&summary).map_err(std::io::Error::other)
}

/// Write the four result files; returns the manifest.
pub fn emit_results(bundle: &ResultBundle, out_dir: &Path) -> std::io::Result<Manifest> {
    assert!(
        !bundle.report.history.is_empty(),
        "result bundle must carry a non-empty history"
    );
    std::fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    for (name, contents) in [
        ("trajectory.csv", trajectory_csv(bundle)),
        ("iterations.csv", iterations_csv(bundle)),
        ("summary.toml", summary_toml(bundle)?),
        ("tip_path.csv", tip_path_csv(bundle)),
    ] {
        let path = out_dir.join(name);
        let size = atomic_write(&path, &contents)?;
        files.push((path, size));
    }
    Ok(Manifest { files })
}

// ---------------------------------------------------------------------------
// Verification

/// Outcome of re-verifying a stored result against its scenario.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub cost_stored: f64,
    pub cost_recomputed: f64,
    pub max_residual_mismatch: f64,
    pub torque_columns_roundtrip: bool,
    pub ok: bool,
}

/// Re-evaluate the optimized trajectory stored in `out_dir/summary.toml`
/// against the scenario: the cost must reproduce within 1e-9 relative, every
/// stored residual within 1e-9 absolute, and the trajectory CSV torque
/// columns must round-trip through parse/re-format unchanged.
pub fn verify_bundle(spec: &ScenarioSpec, out_dir: &Path) -> Result<VerifyReport, ScenarioError> {
    let summary_path = out_dir.join("summary.toml");
    let text = std::fs::read_to_string(&summary_path).map_err(|source| ScenarioError::Io {
        path: summary_path.clone(),
        source,
    })?;
    let summary: Summary = toml::from_str(&text).map_err(|e| ScenarioError::Parse {
        path: summary_path.clone(),
        message: e.to_string(),
    })?;

    let keypoints: Vec<JointVector> = summary
        .keypoints_rad
        .iter()
        .map(|k| JointVector::new(k[0], k[1], k[2], k[3]))
        .collect();
    let labels: Vec<PhaseLabel> = summary
        .labels
        .iter()
        .map(|s| {
            PhaseLabel::parse(s).ok_or_else(|| {
                ScenarioError::validation("summary.labels", format!("unknown label {s:?}"))
            })
        })
        .collect::<Result<_, _>>()?;
    let traj =
        KeypointTrajectory::new(keypoints, summary.intervals_s.clone(), labels, summary.dt_s)?;

    let cost_recomputed = trajectory::torque_cost_n(
        &traj,
        &spec.excavator,
        &spec.terrain,
        &spec.soil,
        spec.solver.n_soil_elements,
    )?;
    let report = constraints::evaluate_all(
        &traj,
        &spec.constraints,
        &spec.excavator,
        &spec.terrain,
        &spec.soil,
        spec.solver.n_soil_elements,
    )
    .map_err(crate::error::EvalError::from)?;

    let mut max_mismatch = 0.0_f64;
    for stored in &summary.final_residuals {
        let recomputed = report
            .get(&stored.name)
            .map(|e| e.value)
            .unwrap_or(f64::NAN);
        max_mismatch = max_mismatch.max((recomputed - stored.value).abs());
    }

    // Torque-column round trip of the trajectory CSV: parse each value and
    // re-format; the emitted text must be reproduced byte for byte.
    let csv_path = out_dir.join("trajectory.csv");
    let csv = std::fs::read_to_string(&csv_path).map_err(|source| ScenarioError::Io {
        path: csv_path.clone(),
        source,
    })?;
    let mut roundtrip = true;
    for line in csv.lines().skip(1) {
        for field in line.split(',').skip(9).take(4) {
            let value: f64 = match field.parse() {
                Ok(v) => v,
                Err(_) => {
                    roundtrip = false;
                    continue;
                }
            };
            if sig9(value) != field {
                roundtrip = false;
            }
        }
    }

    let cost_ok =
        (cost_recomputed - summary.final_cost).abs() <= 1e-9 * (1.0 + summary.final_cost.abs());
    let ok = cost_ok && max_mismatch <= 1e-9 && roundtrip;
    Ok(VerifyReport {
        cost_stored: summary.final_cost,
        cost_recomputed,
        max_residual_mismatch: max_mismatch,
        torque_columns_roundtrip: roundtrip,
        ok,
    })
}
