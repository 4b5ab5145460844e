//! Command-line driver for the semi-discrete transport solver.
//!
//! Subcommands:
//! - `continue`: integrate the dual-price ODE from the strip start to the
//!   isotropic cost (or sweep the whole weight range), writing the
//!   trajectory, area errors, correlation points, and SVG snapshots;
//! - `exact`: solve one metric weight by damped Newton and write the same
//!   file set plus a solve report;
//! - `correlation`: exact and continuation correlation curves on a weight
//!   grid, for overlay plots.
//!
//! Exit codes: 0 success, 1 correlation-curve shape violation, 2 bad
//! configuration or input, 3 trajectory left the safe area band, 4 linear
//! solve failure, 5 the exact solver did not converge.

mod config;
mod output;
mod svg;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use sdot_core::continuation::correlation_point;
use sdot_core::{
    build, initial_prices, oracle, run_with, solve_fixed_eps, strip_deviation, Error, Frame,
    Metric, RunOptions, RunStatus, Sample, ScheduleKind, Trajectory,
};

use config::{resolve, Problem, ProblemConfig};

#[derive(Debug)]
pub struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn new(code: i32, message: String) -> Self {
        Self { code, message }
    }

    pub fn config(message: String) -> Self {
        Self::new(2, message)
    }

    pub fn io(message: String) -> Self {
        Self::new(2, message)
    }

    pub fn from_config_error(e: Error) -> Self {
        Self::new(2, e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "sdot",
    about = "Semi-discrete optimal transport under weighted quadratic costs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the dual-price ODE across the weight schedule
    Continue(RunArgs),
    /// Solve one fixed weight exactly (damped Newton on the dual)
    Exact(RunArgs),
    /// Emit exact and continuation correlation curves on a weight grid
    Correlation(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON problem configuration (flags below override its fields)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Euler steps per integration leg
    #[arg(long)]
    steps: Option<usize>,
    /// Metric weight for `exact`
    #[arg(long)]
    eps: Option<f64>,
    /// Weight schedule: "standard" (0 to 1) or "full_sweep" (both orders)
    #[arg(long)]
    schedule: Option<String>,
    /// Number of SVG snapshots along the trajectory
    #[arg(long)]
    snapshots: Option<usize>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Re-solve exactly every k steps to damp drift
    #[arg(long, value_name = "k")]
    project_every: Option<usize>,
    /// Seed for generated atoms
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn problem(&self) -> Result<Problem, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ProblemConfig::load(path)?,
            None => ProblemConfig::default(),
        };
        if self.steps.is_some() {
            cfg.steps = self.steps;
        }
        if self.eps.is_some() {
            cfg.eps = self.eps;
        }
        if self.schedule.is_some() {
            cfg.schedule = self.schedule.clone();
        }
        if self.snapshots.is_some() {
            cfg.snapshots = self.snapshots;
        }
        if self.project_every.is_some() {
            cfg.project_every = self.project_every;
        }
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        resolve(&cfg)
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Continue(args) => cmd_continue(&args),
        Command::Exact(args) => cmd_exact(&args),
        Command::Correlation(args) => cmd_correlation(&args),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}

fn cmd_continue(args: &RunArgs) -> Result<(), CliError> {
    let problem = args.problem()?;
    let out = &args.out;
    output::ensure_dir(out)?;

    let options = RunOptions {
        project_every: problem.project_every,
    };
    let trajectory = run_with(&problem.atoms, &problem.omega, problem.schedule, &options)
        .map_err(CliError::from_config_error)?;

    flush_trajectory(out, &problem, &trajectory)?;

    match trajectory.status {
        RunStatus::Completed => Ok(()),
        RunStatus::ExitedSafeRegion { step, eps } => Err(CliError::new(
            3,
            format!("trajectory exited the safe area band at step {step} (eps = {eps}); partial outputs written to {}", out.display()),
        )),
        RunStatus::LinearSolveFailed { step, eps, residual } => Err(CliError::new(
            4,
            format!("conjugate gradient stalled at step {step} (eps = {eps}, residual {residual:.2e}); partial outputs written to {}", out.display()),
        )),
    }
}

fn flush_trajectory(
    out: &Path,
    problem: &Problem,
    trajectory: &Trajectory,
) -> Result<(), CliError> {
    let n = problem.atoms.len();
    output::write_trajectory_csv(out, &trajectory.samples, n)?;
    if let Some(last) = trajectory.final_sample() {
        output::write_errors_csv(out, &last.areas, problem.omega.area())?;
    }
    let rows: Vec<(f64, Frame, (f64, f64))> = trajectory
        .samples
        .iter()
        .map(|s| (s.eps, s.frame, s.correlation))
        .collect();
    output::write_correlation_csv(out, "correlation.csv", &rows)?;
    let schedule_name = match problem.schedule.kind {
        ScheduleKind::Standard => "standard",
        ScheduleKind::FullSweep => "full_sweep",
    };
    output::write_run_json(
        out,
        trajectory,
        &problem.atoms,
        problem.schedule.steps,
        schedule_name,
        problem.seed,
    )?;
    write_snapshots(out, problem, &trajectory.samples)?;
    Ok(())
}

/// Picks `snapshots` evenly spaced samples (endpoints included) and
/// renders each one.
fn write_snapshots(out: &Path, problem: &Problem, samples: &[Sample]) -> Result<(), CliError> {
    if problem.snapshots == 0 || samples.is_empty() {
        return Ok(());
    }
    let dir = out.join("snapshots");
    output::ensure_dir(&dir)?;
    let k = problem.snapshots.min(samples.len());
    let mut indices: Vec<usize> = if k == 1 {
        vec![samples.len() - 1]
    } else {
        (0..k).map(|j| j * (samples.len() - 1) / (k - 1)).collect()
    };
    indices.dedup();
    for idx in indices {
        let s = &samples[idx];
        let (omega, atoms) = match s.frame {
            Frame::Original => (problem.omega.clone(), problem.atoms.clone()),
            Frame::Reflected => {
                let omega = sdot_core::continuation::reflect_polygon(&problem.omega)
                    .map_err(CliError::from_config_error)?;
                let pts = problem
                    .atoms
                    .points()
                    .iter()
                    .map(|p| sdot_core::Point::new(p.x2, p.x1))
                    .collect();
                let atoms = sdot_core::Atoms::with_gap(pts, &omega, problem.atoms.gap_min())
                    .map_err(CliError::from_config_error)?;
                (omega, atoms)
            }
        };
        let complex = build(&atoms, Metric::new(s.eps), &s.prices, &omega);
        let name = match s.frame {
            Frame::Original => format!("eps_{:.4}.svg", s.eps),
            Frame::Reflected => {
                let ratio = s.weight_ratio();
                if ratio.is_infinite() {
                    "ratio_inf.svg".to_string()
                } else {
                    format!("ratio_{ratio:.4}.svg")
                }
            }
        };
        svg::write_snapshot(&dir.join(name), &complex, &atoms, &omega)?;
    }
    Ok(())
}

fn cmd_exact(args: &RunArgs) -> Result<(), CliError> {
    let problem = args.problem()?;
    let out = &args.out;
    output::ensure_dir(out)?;
    let eps = problem.eps;
    if eps.is_nan() || eps < 0.0 {
        return Err(CliError::config(format!("eps must be >= 0, got {eps}")));
    }

    let p0 = initial_prices(&problem.atoms, &problem.omega).map_err(CliError::from_config_error)?;
    let tol = oracle::default_tolerance(&problem.omega);
    let report = match solve_fixed_eps(&problem.atoms, &problem.omega, eps, &p0, tol) {
        Ok(r) => r,
        Err(Error::NoConvergence {
            iterations,
            grad_norm,
        }) => {
            return Err(CliError::new(
                5,
                format!("exact solve did not converge after {iterations} iterations (residual {grad_norm:.2e})"),
            ))
        }
        Err(other) => return Err(CliError::from_config_error(other)),
    };

    let metric = Metric::new(eps);
    let complex = build(&problem.atoms, metric, &report.prices, &problem.omega);
    let m = sdot_core::hessian(&complex, metric, &problem.atoms)
        .map_err(CliError::from_config_error)?;
    let sample = Sample {
        eps,
        frame: Frame::Original,
        prices: report.prices.clone(),
        areas: complex.areas.clone(),
        correlation: correlation_point(&complex, &problem.atoms),
        min_eig: m.min_eigenvalue(),
    };
    output::write_trajectory_csv(out, std::slice::from_ref(&sample), problem.atoms.len())?;
    output::write_errors_csv(out, &complex.areas, problem.omega.area())?;
    output::write_correlation_csv(
        out,
        "correlation.csv",
        &[(eps, Frame::Original, sample.correlation)],
    )?;
    let deviation = strip_deviation(&problem.atoms, &problem.omega, &complex);
    output::write_exact_report(out, eps, &report, deviation)?;

    let dir = out.join("snapshots");
    output::ensure_dir(&dir)?;
    svg::write_snapshot(
        &dir.join(format!("eps_{eps:.4}.svg")),
        &complex,
        &problem.atoms,
        &problem.omega,
    )?;
    Ok(())
}

fn cmd_correlation(args: &RunArgs) -> Result<(), CliError> {
    let problem = args.problem()?;
    let out = &args.out;
    output::ensure_dir(out)?;

    let p0 = initial_prices(&problem.atoms, &problem.omega).map_err(CliError::from_config_error)?;
    let tol = oracle::default_tolerance(&problem.omega);
    let grid = problem.grid;
    let mut exact_rows = Vec::with_capacity(grid + 1);
    for j in 0..=grid {
        let eps = j as f64 / grid as f64;
        let report = match solve_fixed_eps(&problem.atoms, &problem.omega, eps, &p0, tol) {
            Ok(r) => r,
            Err(Error::NoConvergence {
                iterations,
                grad_norm,
            }) => {
                return Err(CliError::new(
                    5,
                    format!("exact solve at eps = {eps} did not converge after {iterations} iterations (residual {grad_norm:.2e})"),
                ))
            }
            Err(other) => return Err(CliError::from_config_error(other)),
        };
        let complex = build(
            &problem.atoms,
            Metric::new(eps),
            &report.prices,
            &problem.omega,
        );
        exact_rows.push((
            eps,
            Frame::Original,
            correlation_point(&complex, &problem.atoms),
        ));
    }
    output::write_correlation_csv(out, "correlation_exact.csv", &exact_rows)?;

    let schedule = sdot_core::Schedule::standard(problem.schedule.steps);
    let trajectory = run_with(
        &problem.atoms,
        &problem.omega,
        schedule,
        &RunOptions {
            project_every: problem.project_every,
        },
    )
    .map_err(CliError::from_config_error)?;
    let cont_rows: Vec<(f64, Frame, (f64, f64))> = trajectory
        .samples
        .iter()
        .map(|s| (s.eps, s.frame, s.correlation))
        .collect();
    output::write_correlation_csv(out, "correlation_continuation.csv", &cont_rows)?;

    // The exact curve must be concave decreasing wherever it moves.
    // Segments where the point is stationary (symmetric problems) carry no
    // slope information and are skipped.
    const STATIONARY: f64 = 1e-9;
    let mut prev_slope = f64::INFINITY;
    for w in exact_rows.windows(2) {
        let dz1 = w[1].2 .0 - w[0].2 .0;
        let dz2 = w[1].2 .1 - w[0].2 .1;
        if dz1.abs() <= STATIONARY && dz2.abs() <= STATIONARY {
            continue;
        }
        if dz1 <= 0.0 {
            return Err(CliError::new(
                1,
                format!(
                    "correlation curve not increasing in z1 near eps = {}",
                    w[0].0
                ),
            ));
        }
        let slope = dz2 / dz1;
        if slope >= 1e-6 || slope > prev_slope + 1e-6 {
            return Err(CliError::new(
                1,
                format!(
                    "correlation curve not concave decreasing near eps = {}",
                    w[0].0
                ),
            ));
        }
        prev_slope = slope;
    }

    if !trajectory.status.is_completed() {
        return Err(CliError::new(
            3,
            format!("continuation overlay incomplete: {:?}", trajectory.status),
        ));
    }
    Ok(())
}
