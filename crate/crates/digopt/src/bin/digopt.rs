// digopt - scenario-driven excavation trajectory optimizer.
//
// Subcommands:
//   run       seed, optimize and write the result bundle
//   verify    re-evaluate a stored result bundle against its scenario
//   seed-only build and write the heuristic seed without optimizing
//   eval      evaluate the scenario's seed trajectory without optimizing

use std::path::PathBuf;
use std::process::ExitCode;

use digopt::scenario::{self, ScenarioError, ScenarioSpec};
use digopt::solver::SolverStatus;

const USAGE: &str = "\
digopt - minimum-torque excavation trajectory optimizer

USAGE:
  digopt run       --scenario <FILE> --out <DIR> [--fixed-time] [--max-iters N] [--trace]
  digopt verify    --scenario <FILE> --out <DIR>
  digopt seed-only --scenario <FILE> --out <DIR>
  digopt eval      --scenario <FILE> [--out <DIR>]

OPTIONS:
  --scenario <FILE>  scenario TOML file (see scenarios/ for examples)
  --out <DIR>        output directory for the result bundle
  --fixed-time       freeze the keypoint time intervals at their seed values
  --max-iters <N>    override solver.max_iterations
  --trace            print the per-iteration trace after the run
  --help             show this help

EXIT CODES:
  0  success (run: solver converged)
  1  unexpected error
  2  bad usage
  3  scenario load/validation error
  4  seed construction failure
  5  solver did not converge (budget exhausted or infeasible stall)
  6  I/O error
  7  verification mismatch
";

struct Args {
    command: String,
    scenario: Option<PathBuf>,
    out: Option<PathBuf>,
    fixed_time: bool,
    max_iters: Option<usize>,
    trace: bool,
}

fn parse_args(argv: &[String]) -> Result<Args, String> {
    if argv.is_empty() {
        return Err("missing subcommand".into());
    }
    let mut args = Args {
        command: argv[0].clone(),
        scenario: None,
        out: None,
        fixed_time: false,
        max_iters: None,
        trace: false,
    };
    let mut i = 1;
    while i < argv.len() {
        match argv[i].as_str() {
            "--scenario" => {
                i += 1;
                args.scenario = Some(PathBuf::from(
                    argv.get(i).ok_or("--scenario needs a value")?,
                ));
            }
            "--out" => {
                i += 1;
                args.out = Some(PathBuf::from(argv.get(i).ok_or("--out needs a value")?));
            }
            "--fixed-time" => args.fixed_time = true,
            "--trace" => args.trace = true,
            "--max-iters" => {
                i += 1;
                let raw = argv.get(i).ok_or("--max-iters needs a value")?;
                args.max_iters = Some(raw.parse().map_err(|_| "--max-iters must be an integer")?);
            }
            other => return Err(format!("unknown argument {other:?}")),
        }
        i += 1;
    }
    Ok(args)
}

fn error_code(err: &ScenarioError) -> u8 {
    match err {
        ScenarioError::Io { .. } => 6,
        ScenarioError::Parse { .. } | ScenarioError::Validation { .. } => 3,
        ScenarioError::Seed(_) => 4,
        ScenarioError::Eval(_) | ScenarioError::Trajectory(_) => 1,
    }
}

fn load(args: &Args) -> Result<ScenarioSpec, u8> {
    let path = args.scenario.as_ref().ok_or_else(|| {
        eprintln!("error: --scenario is required");
        2u8
    })?;
    let mut spec = scenario::load_scenario(path).map_err(|e| {
        eprintln!("error: {e}");
        error_code(&e)
    })?;
    if args.fixed_time {
        spec.solver.time_variable = false;
    }
    if let Some(n) = args.max_iters {
        spec.solver.max_iterations = n;
    }
    Ok(spec)
}

fn print_trace(bundle: &digopt::scenario::ResultBundle) {
    println!("iteration penalty cost merit max_violation trust_radius accepted");
    for rec in &bundle.report.history {
        println!(
            "{:9} {:7.1} {:14.6e} {:14.6e} {:12.4e} {:10.3e} {}",
            rec.iteration,
            rec.penalty,
            rec.cost,
            rec.merit,
            rec.max_violation,
            rec.trust_radius,
            rec.accepted as u8
        );
    }
}

fn cmd_run(args: &Args) -> u8 {
    let spec = match load(args) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let Some(out) = args.out.as_ref() else {
        eprintln!("error: run requires --out");
        return 2;
    };
    match scenario::run(&spec, Some(out)) {
        Ok(bundle) => {
            if args.trace {
                print_trace(&bundle);
            }
            println!(
                "{}: {} in {} iterations, cost {:.6e}, volume {:.4} m3, duration {:.2} s, max violation {:.3e}",
                spec.name,
                bundle.report.status.as_str(),
                bundle.report.history.len(),
                bundle.final_cost,
                bundle.final_volume,
                bundle.trajectory.total_duration(),
                bundle.report.final_max_violation(),
            );
            println!("results written to {}", out.display());
            if bundle.report.status == SolverStatus::Converged {
                0
            } else {
                5
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}

fn cmd_verify(args: &Args) -> u8 {
    let spec = match load(args) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let Some(out) = args.out.as_ref() else {
        eprintln!("error: verify requires --out");
        return 2;
    };
    match scenario::verify_bundle(&spec, out) {
        Ok(report) => {
            println!(
                "cost stored {:.9e} recomputed {:.9e}; max residual mismatch {:.3e}; torque columns round-trip: {}",
                report.cost_stored,
                report.cost_recomputed,
                report.max_residual_mismatch,
                report.torque_columns_roundtrip
            );
            if report.ok {
                println!("verification PASSED");
                0
            } else {
                println!("verification FAILED");
                7
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}

fn cmd_eval(args: &Args, heuristic_only: bool) -> u8 {
    let spec = match load(args) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if heuristic_only && args.out.is_none() {
        eprintln!("error: seed-only requires --out");
        return 2;
    }
    match scenario::evaluate_only(&spec, args.out.as_deref(), heuristic_only) {
        Ok(bundle) => {
            let rec = &bundle.report.history[0];
            println!(
                "{}: cost {:.6e}, volume {:.4} m3, duration {:.2} s, max violation {:.3e}",
                spec.name,
                rec.cost,
                bundle.final_volume,
                bundle.trajectory.total_duration(),
                rec.max_violation
            );
            for e in &bundle.final_constraints.entries {
                if e.violation() > spec.solver.constraint_tolerance {
                    println!("  violated: {} = {:.6e}", e.name, e.value);
                }
            }
            if let Some(out) = args.out.as_ref() {
                println!("results written to {}", out.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    if argv.iter().any(|a| a == "--help" || a == "-h") || argv.is_empty() {
        print!("{USAGE}");
        return ExitCode::from(if argv.is_empty() { 2 } else { 0 });
    }
    let args = match parse_args(&argv) {
        Ok(a) => a,
        Err(message) => {
            eprintln!("error: {message}");
            eprint!("{USAGE}");
            return ExitCode::from(2);
        }
    };
    let code = match args.command.as_str() {
        "run" => cmd_run(&args),
        "verify" => cmd_verify(&args),
        "seed-only" => cmd_eval(&args, true),
        "eval" => cmd_eval(&args, false),
        other => {
            eprintln!("error: unknown subcommand {other:?}");
            eprint!("{USAGE}");
            2
        }
    };
    ExitCode::from(code)
}
