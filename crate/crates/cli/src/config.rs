//! Problem configuration: JSON file, flag overrides, atom generation.

use std::path::Path;

use rand::{Rng as _, SeedableRng as _};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use sdot_core::{Atoms, ConvexPolygon, Point, Schedule, ScheduleKind};

use crate::CliError;

/// On-disk configuration. Every field is optional; command-line flags
/// override file values, and anything left unset falls back to the
/// defaults (unit square, five generated atoms, 500 steps).
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Domain vertices, counterclockwise. Default: unit square.
    pub omega: Option<Vec<[f64; 2]>>,
    /// Explicit atoms. When omitted, `n_atoms` are drawn uniformly in the
    /// domain (seeded, re-drawn until the gap invariants hold).
    pub atoms: Option<Vec<[f64; 2]>>,
    pub n_atoms: Option<usize>,
    pub steps: Option<usize>,
    /// `"standard"` or `"full_sweep"`.
    pub schedule: Option<String>,
    pub seed: Option<u64>,
    /// Number of SVG snapshots along the trajectory.
    pub snapshots: Option<usize>,
    /// Metric weight for the `exact` command.
    pub eps: Option<f64>,
    /// Re-solve exactly every this many steps (drift damping).
    pub project_every: Option<usize>,
    /// Grid size (number of intervals) of the `correlation` command.
    pub grid: Option<usize>,
}

impl ProblemConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("cannot parse {}: {e}", path.display())))
    }
}

/// Fully validated problem ready to run.
pub struct Problem {
    pub omega: ConvexPolygon,
    pub atoms: Atoms,
    pub schedule: Schedule,
    pub seed: u64,
    pub snapshots: usize,
    pub eps: f64,
    pub project_every: Option<usize>,
    pub grid: usize,
}

pub fn resolve(config: &ProblemConfig) -> Result<Problem, CliError> {
    let omega = match &config.omega {
        Some(verts) => {
            let pts = verts.iter().map(|v| Point::new(v[0], v[1])).collect();
            ConvexPolygon::new(pts).map_err(CliError::from_config_error)?
        }
        None => sdot_core::unit_square(),
    };

    let kind = match config.schedule.as_deref() {
        None | Some("standard") => ScheduleKind::Standard,
        Some("full_sweep") => ScheduleKind::FullSweep,
        Some(other) => {
            return Err(CliError::config(format!(
                "unknown schedule {other:?} (expected \"standard\" or \"full_sweep\")"
            )))
        }
    };
    let steps = config.steps.unwrap_or(500);
    if steps == 0 {
        return Err(CliError::config("steps must be at least 1".into()));
    }

    let seed = config.seed.unwrap_or(0);
    let atoms = match &config.atoms {
        Some(list) => {
            let pts: Vec<Point> = list.iter().map(|v| Point::new(v[0], v[1])).collect();
            let atoms = Atoms::new(pts, &omega).map_err(CliError::from_config_error)?;
            if kind == ScheduleKind::FullSweep {
                atoms
                    .check_abscissa_gaps()
                    .map_err(CliError::from_config_error)?;
            }
            atoms
        }
        None => generate_atoms(
            &omega,
            config.n_atoms.unwrap_or(5),
            seed,
            kind == ScheduleKind::FullSweep,
        )?,
    };

    Ok(Problem {
        omega,
        atoms,
        schedule: Schedule { kind, steps },
        seed,
        snapshots: config.snapshots.unwrap_or(5),
        eps: config.eps.unwrap_or(1.0),
        project_every: config.project_every.filter(|&k| k > 0),
        grid: config.grid.unwrap_or(20).max(2),
    })
}

/// Draws atoms uniformly in the domain, rejecting whole draws until the
/// ordinate gaps (and, for a full sweep, the abscissa gaps) pass.
fn generate_atoms(
    omega: &ConvexPolygon,
    n: usize,
    seed: u64,
    need_abscissa_gaps: bool,
) -> Result<Atoms, CliError> {
    if n == 0 {
        return Err(CliError::config("n_atoms must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lo1, mut hi1, mut lo2, mut hi2) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for v in omega.vertices() {
        lo1 = lo1.min(v.x1);
        hi1 = hi1.max(v.x1);
        lo2 = lo2.min(v.x2);
        hi2 = hi2.max(v.x2);
    }
    for _ in 0..10_000 {
        let pts: Vec<Point> = (0..n)
            .map(|_| loop {
                let p = Point::new(rng.gen_range(lo1..hi1), rng.gen_range(lo2..hi2));
                if omega.contains(p) {
                    break p;
                }
            })
            .collect();
        if let Ok(atoms) = Atoms::new(pts, omega) {
            if !need_abscissa_gaps || atoms.check_abscissa_gaps().is_ok() {
                return Ok(atoms);
            }
        }
    }
    Err(CliError::config(format!(
        "failed to draw {n} atoms satisfying the gap invariants"
    )))
}
