//! ℓ1-exact-penalty sequential convexification over keypoints and time
//! intervals.
//!
//! The stacked variable vector holds the articulated angles of every
//! keypoint followed by the segment time intervals (when time is variable).
//! Each iteration linearizes cost and constraint residuals by central
//! finite differences, minimizes the linearized ℓ1 merit inside a box trust
//! region (a linear program, see [`subproblem`]), and accepts or rejects the
//! step by the true-merit improvement ratio. When the iterates converge at
//! the current penalty but constraint violations remain, the penalty is
//! escalated and the loop continues.

mod seed;
pub mod subproblem;

pub use seed::{DigTask, seed_trajectory};

use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use crate::constraints::{self, ConstraintSpec, ResidualKind};
use crate::error::EvalError;
use crate::kinematics::{ExcavatorModel, JointVector};
use crate::soil::{SoilParams, TerrainProfile};
use crate::trajectory::{self, KeypointTrajectory, MIN_INTERVAL};
use subproblem::L1Subproblem;

/// Solver configuration. Finite-difference steps are per variable class:
/// radians for keypoint angles, seconds for time intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub fd_step_angle: f64,
    pub fd_step_interval: f64,
    pub trust_region_init: f64,
    pub trust_region_min: f64,
    pub shrink_factor: f64,
    pub grow_factor: f64,
    pub penalty_init: f64,
    pub penalty_growth: f64,
    pub penalty_max: f64,
    pub constraint_tolerance: f64,
    pub cost_tolerance: f64,
    /// Subproblem solves per penalty round.
    pub max_iterations: usize,
    pub max_penalty_rounds: usize,
    /// Optimize the time intervals; when false they stay at the seed values.
    pub time_variable: bool,
    /// Soil discretization used inside cost and constraint evaluations.
    pub n_soil_elements: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            fd_step_angle: 1e-4,
            fd_step_interval: 1e-3,
            trust_region_init: 0.2,
            trust_region_min: 1e-4,
            shrink_factor: 0.5,
            grow_factor: 1.5,
            penalty_init: 10.0,
            penalty_growth: 10.0,
            penalty_max: 1e8,
            constraint_tolerance: 1e-4,
            cost_tolerance: 1e-6,
            max_iterations: 80,
            max_penalty_rounds: 8,
            time_variable: true,
            n_soil_elements: crate::soil::DEFAULT_SOIL_ELEMENTS,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("fd_step_angle", self.fd_step_angle),
            ("fd_step_interval", self.fd_step_interval),
            ("trust_region_init", self.trust_region_init),
            ("trust_region_min", self.trust_region_min),
            ("penalty_init", self.penalty_init),
            ("penalty_growth", self.penalty_growth),
            ("penalty_max", self.penalty_max),
            ("constraint_tolerance", self.constraint_tolerance),
            ("cost_tolerance", self.cost_tolerance),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("solver.{name} must be positive, got {v}"));
            }
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0) {
            return Err("solver.shrink_factor must lie in (0, 1)".into());
        }
        if self.grow_factor <= 1.0 {
            return Err("solver.grow_factor must exceed 1".into());
        }
        if self.max_iterations == 0 || self.max_penalty_rounds == 0 {
            return Err("solver iteration budgets must be nonzero".into());
        }
        if self.n_soil_elements == 0 {
            return Err("solver.n_soil_elements must be nonzero".into());
        }
        Ok(())
    }
}

/// Terminal solver state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Converged,
    MaxIterations,
    InfeasibleStall,
}

impl SolverStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverStatus::Converged => "converged",
            SolverStatus::MaxIterations => "max_iterations",
            SolverStatus::InfeasibleStall => "infeasible_stall",
        }
    }
}

/// One row of the iterate history, recorded after every subproblem solve.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub penalty: f64,
    pub cost: f64,
    pub merit: f64,
    pub max_violation: f64,
    pub trust_radius: f64,
    pub accepted: bool,
    /// Inequality residuals of the current iterate (solver ordering).
    pub inequalities: Vec<f64>,
    /// Equality residuals of the current iterate.
    pub equalities: Vec<f64>,
}

/// Cost and constraint residuals at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub cost: f64,
    pub inequalities: Vec<f64>,
    pub equalities: Vec<f64>,
}

impl Evaluation {
    pub fn max_violation(&self) -> f64 {
        let ineq = self
            .inequalities
            .iter()
            .fold(0.0_f64, |acc, g| acc.max(g.max(0.0)));
        self.equalities.iter().fold(ineq, |acc, h| acc.max(h.abs()))
    }

    pub fn merit(&self, penalty: f64) -> f64 {
        let mut value = self.cost;
        for g in &self.inequalities {
            value += penalty * g.max(0.0);
        }
        for h in &self.equalities {
            value += penalty * h.abs();
        }
        value
    }
}

/// A problem the sequential-convexification loop can operate on.
pub trait OptimizationProblem {
    fn dim(&self) -> usize;
    /// Central finite-difference step of a variable.
    fn fd_step(&self, var: usize) -> f64;
    /// Hard lower bound kept by the trust-region box (defaults to none).
    fn lower_bound(&self, _var: usize) -> f64 {
        f64::NEG_INFINITY
    }
    fn evaluate(&self, x: &[f64]) -> Result<Evaluation, EvalError>;
}

/// Central-difference jacobian of a vector-valued function, column by
/// column with per-variable steps. Evaluation failures are reported with
/// the offending variable index.
pub fn finite_difference_jacobian<F>(
    mut f: F,
    x: &[f64],
    steps: &[f64],
) -> Result<DMatrix<f64>, EvalError>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>, EvalError>,
{
    assert_eq!(x.len(), steps.len());
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(x.len());
    let mut rows = 0;
    for k in 0..x.len() {
        let h = steps[k];
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += h;
        xm[k] -= h;
        let fp = f(&xp).map_err(|e| EvalError::AtVariable {
            variable: k,
            source: Box::new(e),
        })?;
        let fm = f(&xm).map_err(|e| EvalError::AtVariable {
            variable: k,
            source: Box::new(e),
        })?;
        rows = fp.len();
        columns.push(
            fp.iter()
                .zip(&fm)
                .map(|(p, m)| (p - m) / (2.0 * h))
                .collect(),
        );
    }
    Ok(DMatrix::from_fn(rows, x.len(), |i, j| columns[j][i]))
}

/// Outcome of the generic minimization loop.
#[derive(Debug, Clone)]
pub struct ScoOutcome {
    pub x: Vec<f64>,
    pub history: Vec<IterationRecord>,
    pub status: SolverStatus,
    pub final_evaluation: Evaluation,
}

/// Run the ℓ1 penalty loop on a generic problem. Deterministic for
/// identical inputs and configuration.
pub fn minimize(
    problem: &impl OptimizationProblem,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<ScoOutcome, EvalError> {
    let n = problem.dim();
    assert_eq!(x0.len(), n);
    let mut x = x0.to_vec();
    let mut eval = problem.evaluate(&x)?;
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut penalty = config.penalty_init;
    let mut iteration = 0usize;
    let steps: Vec<f64> = (0..n).map(|k| problem.fd_step(k)).collect();

    let mut status = SolverStatus::MaxIterations;
    'rounds: for _round in 0..config.max_penalty_rounds {
        let mut trust = config.trust_region_init;
        let mut linearization: Option<(Vec<f64>, DMatrix<f64>, DMatrix<f64>)> = None;

        let mut solves = 0usize;
        while solves < config.max_iterations {
            if linearization.is_none() {
                let stacked = |y: &[f64]| -> Result<Vec<f64>, EvalError> {
                    let e = problem.evaluate(y)?;
                    let mut out = Vec::with_capacity(1 + e.inequalities.len() + e.equalities.len());
                    out.push(e.cost);
                    out.extend_from_slice(&e.inequalities);
                    out.extend_from_slice(&e.equalities);
                    Ok(out)
                };
                let jac = finite_difference_jacobian(stacked, &x, &steps)?;
                let m_in = eval.inequalities.len();
                let m_eq = eval.equalities.len();
                let grad: Vec<f64> = (0..n).map(|k| jac[(0, k)]).collect();
                let jac_in = DMatrix::from_fn(m_in, n, |i, j| jac[(1 + i, j)]);
                let jac_eq = DMatrix::from_fn(m_eq, n, |i, j| jac[(1 + m_in + i, j)]);
                linearization = Some((grad, jac_in, jac_eq));
            }
            let (grad, jac_in, jac_eq) = linearization.as_ref().unwrap();

            let lower: Vec<f64> = (0..n)
                .map(|k| (-trust).max(problem.lower_bound(k) - x[k]).min(0.0))
                .collect();
            let upper: Vec<f64> = vec![trust; n];
            let sub = L1Subproblem {
                cost_grad: grad,
                ineq_values: &eval.inequalities,
                ineq_jac: jac_in,
                eq_values: &eval.equalities,
                eq_jac: jac_eq,
                penalty,
                lower: &lower,
                upper: &upper,
            };
            let d = sub.solve();
            let current_merit = eval.merit(penalty);
            let model_merit = eval.cost + sub.model_merit(&d);
            let predicted = current_merit - model_merit;
            if predicted < config.cost_tolerance {
                // The convex model cannot improve at this penalty level.
                break;
            }

            let x_trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + di).collect();
            let eval_trial = problem.evaluate(&x_trial)?;
            let actual = current_merit - eval_trial.merit(penalty);
            let ratio = actual / predicted;

            let accepted = ratio >= 0.25;
            if accepted {
                x = x_trial;
                eval = eval_trial;
                linearization = None;
                if ratio > 0.75 {
                    trust *= config.grow_factor;
                }
            } else {
                trust *= config.shrink_factor;
            }

            iteration += 1;
            solves += 1;
            history.push(IterationRecord {
                iteration,
                penalty,
                cost: eval.cost,
                merit: eval.merit(penalty),
                max_violation: eval.max_violation(),
                trust_radius: trust,
                accepted,
                inequalities: eval.inequalities.clone(),
                equalities: eval.equalities.clone(),
            });

            if !accepted && trust < config.trust_region_min {
                break;
            }
        }

        if eval.max_violation() <= config.constraint_tolerance {
            status = SolverStatus::Converged;
            break 'rounds;
        }
        penalty *= config.penalty_growth;
        if penalty > config.penalty_max {
            status = SolverStatus::InfeasibleStall;
            break 'rounds;
        }
    }

    if history.is_empty() {
        // Record the starting point so the history is never empty.
        history.push(IterationRecord {
            iteration: 0,
            penalty,
            cost: eval.cost,
            merit: eval.merit(penalty),
            max_violation: eval.max_violation(),
            trust_radius: config.trust_region_init,
            accepted: false,
            inequalities: eval.inequalities.clone(),
            equalities: eval.equalities.clone(),
        });
    }
    if status == SolverStatus::MaxIterations && eval.max_violation() <= config.constraint_tolerance
    {
        status = SolverStatus::Converged;
    }

    Ok(ScoOutcome {
        x,
        history,
        status,
        final_evaluation: eval,
    })
}

/// Names of the inequality residuals in solver order, paired with their
/// constraint family. Fixed for a given trajectory structure.
#[derive(Debug, Clone)]
pub struct ResidualLayout {
    pub inequality_names: Vec<String>,
    pub inequality_families: Vec<crate::constraints::ConstraintFamily>,
    pub equality_names: Vec<String>,
}

/// The excavation trajectory optimization problem over `(keypoints, T)`.
pub struct TrajectoryProblem<'a> {
    pub model: &'a ExcavatorModel,
    pub terrain: &'a TerrainProfile,
    pub soil: &'a SoilParams,
    pub cspec: &'a ConstraintSpec,
    pub template: KeypointTrajectory,
    pub config: &'a SolverConfig,
    /// Objective scale: the cost handed to the solver is
    /// `cost_scale · Σ‖τ‖²` so penalty weights and torque costs share a
    /// workable range. Reported costs are divided back.
    pub cost_scale: f64,
}

impl<'a> TrajectoryProblem<'a> {
    pub fn new(
        model: &'a ExcavatorModel,
        terrain: &'a TerrainProfile,
        soil: &'a SoilParams,
        cspec: &'a ConstraintSpec,
        template: KeypointTrajectory,
        config: &'a SolverConfig,
    ) -> Self {
        let limits = &model.joint_torque_limits;
        let tau_ref_sq = (limits[1].powi(2) + limits[2].powi(2) + limits[3].powi(2)) / 3.0;
        Self {
            model,
            terrain,
            soil,
            cspec,
            template,
            config,
            cost_scale: 1.0 / tau_ref_sq,
        }
    }

    fn keypoint_count(&self) -> usize {
        self.template.keypoints().len()
    }

    pub fn pack(&self, traj: &KeypointTrajectory) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dim());
        for k in traj.keypoints() {
            x.push(k[1]);
            x.push(k[2]);
            x.push(k[3]);
        }
        if self.config.time_variable {
            x.extend_from_slice(traj.intervals());
        }
        x
    }

    /// Rebuild the trajectory of a variable vector. Interval values are
    /// taken as-is so finite-difference probes below the bound stay
    /// informative; the trust-region box keeps actual iterates above it.
    pub fn unpack(&self, x: &[f64]) -> KeypointTrajectory {
        let n_kp = self.keypoint_count();
        let swing = self.template.keypoints()[0][0];
        let mut keypoints = Vec::with_capacity(n_kp);
        for i in 0..n_kp {
            keypoints.push(JointVector::new(
                swing,
                x[3 * i],
                x[3 * i + 1],
                x[3 * i + 2],
            ));
        }
        let intervals: Vec<f64> = if self.config.time_variable {
            x[3 * n_kp..].to_vec()
        } else {
            self.template.intervals().to_vec()
        };
        KeypointTrajectory::from_parts_unchecked(
            keypoints,
            intervals,
            self.template.phase_labels().to_vec(),
            self.template.dt(),
        )
    }

    /// [`Self::unpack`] with intervals clamped to the structural minimum,
    /// for the final reported trajectory (iterates can sit a rounding
    /// error below the bound).
    pub fn unpack_final(&self, x: &[f64]) -> KeypointTrajectory {
        let traj = self.unpack(x);
        KeypointTrajectory::from_parts_unchecked(
            traj.keypoints().to_vec(),
            traj.intervals()
                .iter()
                .map(|t| t.max(MIN_INTERVAL))
                .collect(),
            traj.phase_labels().to_vec(),
            traj.dt(),
        )
    }

    /// Residual names/families in the exact order `evaluate` emits them.
    pub fn residual_layout(&self) -> Result<ResidualLayout, EvalError> {
        let report = constraints::evaluate_relaxed(
            &self.template,
            self.cspec,
            self.model,
            self.terrain,
            self.soil,
            self.config.n_soil_elements,
        )?;
        let mut layout = ResidualLayout {
            inequality_names: Vec::new(),
            inequality_families: Vec::new(),
            equality_names: Vec::new(),
        };
        for e in &report.entries {
            match e.kind {
                ResidualKind::Inequality => {
                    layout.inequality_names.push(e.name.clone());
                    layout.inequality_families.push(e.family);
                }
                ResidualKind::Equality => layout.equality_names.push(e.name.clone()),
            }
        }
        Ok(layout)
    }
}

impl OptimizationProblem for TrajectoryProblem<'_> {
    fn dim(&self) -> usize {
        let base = 3 * self.keypoint_count();
        if self.config.time_variable {
            base + self.template.intervals().len()
        } else {
            base
        }
    }

    fn fd_step(&self, var: usize) -> f64 {
        if var < 3 * self.keypoint_count() {
            self.config.fd_step_angle
        } else {
            self.config.fd_step_interval
        }
    }

    fn lower_bound(&self, var: usize) -> f64 {
        if var < 3 * self.keypoint_count() {
            f64::NEG_INFINITY
        } else {
            MIN_INTERVAL
        }
    }

    fn evaluate(&self, x: &[f64]) -> Result<Evaluation, EvalError> {
        let traj = self.unpack(x);
        let cost = trajectory::torque_cost_n(
            &traj,
            self.model,
            self.terrain,
            self.soil,
            self.config.n_soil_elements,
        )?;
        let report = constraints::evaluate_relaxed(
            &traj,
            self.cspec,
            self.model,
            self.terrain,
            self.soil,
            self.config.n_soil_elements,
        )?;
        let mut inequalities = Vec::with_capacity(report.entries.len());
        let mut equalities = Vec::new();
        for e in &report.entries {
            match e.kind {
                ResidualKind::Inequality => inequalities.push(e.value),
                ResidualKind::Equality => equalities.push(e.value),
            }
        }
        Ok(Evaluation {
            cost: cost * self.cost_scale,
            inequalities,
            equalities,
        })
    }
}

/// Result of one optimization session.
#[derive(Debug, Clone)]
pub struct OptimizationReport {
    /// Per-iteration history; costs are reported in raw `Σ‖τ‖²` units.
    pub history: Vec<IterationRecord>,
    pub final_trajectory: KeypointTrajectory,
    pub status: SolverStatus,
    pub wall_clock: Duration,
    /// Names/families for interpreting the per-record residual vectors.
    pub layout: ResidualLayout,
}

impl OptimizationReport {
    pub fn final_cost(&self) -> f64 {
        self.history.last().map(|r| r.cost).unwrap_or(f64::NAN)
    }

    pub fn final_max_violation(&self) -> f64 {
        self.history
            .last()
            .map(|r| r.max_violation)
            .unwrap_or(f64::NAN)
    }
}

/// Optimize a seed trajectory under the given scenario pieces.
pub fn optimize(
    initial: &KeypointTrajectory,
    cspec: &ConstraintSpec,
    model: &ExcavatorModel,
    terrain: &TerrainProfile,
    soil: &SoilParams,
    config: &SolverConfig,
) -> Result<OptimizationReport, EvalError> {
    let start = Instant::now();
    let problem = TrajectoryProblem::new(model, terrain, soil, cspec, initial.clone(), config);
    let layout = problem.residual_layout()?;
    let x0 = problem.pack(initial);
    let outcome = minimize(&problem, &x0, config)?;
    let final_trajectory = problem.unpack_final(&outcome.x);

    // Certify convergence against the strict evaluator; degrade the status
    // if the relaxed and strict views disagree.
    let mut status = outcome.status;
    if status == SolverStatus::Converged {
        let strict = constraints::evaluate_all(
            &final_trajectory,
            cspec,
            model,
            terrain,
            soil,
            config.n_soil_elements,
        );
        match strict {
            Ok(report) if report.max_violation() <= config.constraint_tolerance => {}
            _ => status = SolverStatus::MaxIterations,
        }
    }

    let mut history = outcome.history;
    for record in &mut history {
        record.cost /= problem.cost_scale;
    }

    Ok(OptimizationReport {
        history,
        final_trajectory,
        status,
        wall_clock: start.elapsed(),
        layout,
    })
}
