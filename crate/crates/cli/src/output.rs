//! CSV and JSON emission. Floats carry 17 significant digits so every file
//! re-parses to the in-memory values bit for bit.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use sdot_core::{Atoms, Frame, Sample, SolveReport, Trajectory};

use crate::CliError;

/// 17 significant digits: enough to round-trip any finite f64 exactly.
pub fn format_f64(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

fn frame_name(frame: Frame) -> &'static str {
    match frame {
        Frame::Original => "original",
        Frame::Reflected => "reflected",
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut f = fs::File::create(path)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

/// `trajectory.csv`: one row per recorded sample with prices, areas and
/// the conditioning diagnostic.
pub fn write_trajectory_csv(dir: &Path, samples: &[Sample], n: usize) -> Result<(), CliError> {
    let mut out = String::from("eps,frame,ratio");
    for i in 1..=n {
        out.push_str(&format!(",p{i}"));
    }
    for i in 1..=n {
        out.push_str(&format!(",area{i}"));
    }
    out.push_str(",min_eig\n");
    for s in samples {
        out.push_str(&format_f64(s.eps));
        out.push(',');
        out.push_str(frame_name(s.frame));
        out.push(',');
        out.push_str(&format_f64(s.weight_ratio()));
        for v in s.prices.values() {
            out.push(',');
            out.push_str(&format_f64(*v));
        }
        for a in &s.areas {
            out.push(',');
            out.push_str(&format_f64(*a));
        }
        out.push(',');
        out.push_str(&format_f64(s.min_eig));
        out.push('\n');
    }
    write_file(&dir.join("trajectory.csv"), &out)
}

/// `errors.csv`: relative cell-area errors at the final recorded state,
/// as percentages with two decimals.
pub fn write_errors_csv(dir: &Path, areas: &[f64], omega_area: f64) -> Result<(), CliError> {
    let share = omega_area / areas.len() as f64;
    let mut out = String::from("atom,relative_error_pct\n");
    for (i, &a) in areas.iter().enumerate() {
        let mut pct = 100.0 * (a - share) / share;
        if pct.abs() < 0.005 {
            pct = 0.0;
        }
        out.push_str(&format!("{},{pct:.2}%\n", i + 1));
    }
    write_file(&dir.join("errors.csv"), &out)
}

/// `correlation.csv`: the correlation point of every sample.
pub fn write_correlation_csv(
    dir: &Path,
    name: &str,
    rows: &[(f64, Frame, (f64, f64))],
) -> Result<(), CliError> {
    let mut out = String::from("eps,frame,ratio,z1,z2\n");
    for (eps, frame, z) in rows {
        let ratio = match frame {
            Frame::Original => *eps,
            Frame::Reflected => 1.0 / eps,
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            format_f64(*eps),
            frame_name(*frame),
            format_f64(ratio),
            format_f64(z.0),
            format_f64(z.1)
        ));
    }
    write_file(&dir.join(name), &out)
}

/// `run.json`: terminal status of a continuation run.
pub fn write_run_json(
    dir: &Path,
    trajectory: &Trajectory,
    atoms: &Atoms,
    steps: usize,
    schedule: &str,
    seed: u64,
) -> Result<(), CliError> {
    use sdot_core::RunStatus;
    let (status, failed_step, failed_eps, residual) = match trajectory.status {
        RunStatus::Completed => ("completed", None, None, None),
        RunStatus::ExitedSafeRegion { step, eps } => {
            ("exited_safe_region", Some(step), Some(eps), None)
        }
        RunStatus::LinearSolveFailed {
            step,
            eps,
            residual,
        } => ("linear_solve_failed", Some(step), Some(eps), Some(residual)),
    };
    let json = serde_json::json!({
        "status": status,
        "failed_step": failed_step,
        "failed_eps": failed_eps,
        "cg_residual": residual,
        "steps": steps,
        "schedule": schedule,
        "seed": seed,
        "n_atoms": atoms.len(),
        "samples": trajectory.samples.len(),
        "atoms": atoms.points().iter().map(|p| [p.x1, p.x2]).collect::<Vec<_>>(),
    });
    write_file(&dir.join("run.json"), &format!("{:#}\n", json))
}

/// `report.json`: outcome of a fixed-eps exact solve.
pub fn write_exact_report(
    dir: &Path,
    eps: f64,
    report: &SolveReport,
    strip_deviation: f64,
) -> Result<(), CliError> {
    let json = serde_json::json!({
        "eps": eps,
        "iterations": report.iterations,
        "grad_norm": report.grad_norm,
        "strip_deviation": strip_deviation,
        "areas": report.areas,
        "prices": report.prices.values(),
    });
    write_file(&dir.join("report.json"), &format!("{:#}\n", json))
}
