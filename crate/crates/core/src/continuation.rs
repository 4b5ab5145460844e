//! Continuation of the dual prices in `eps` by an explicit Euler scheme.
//!
//! Differentiating the optimality condition of the dual problem in `eps`
//! gives a linear ODE for the prices: at each state the negated reduced
//! Hessian `M` (positive definite inside the safe band) is applied against
//! the mixed derivative, `M z = ∂_eps ∇_p Φ`, and the prices move by
//! `h·z`. The scheme starts from the strip-inducing prices at `eps = 0`
//! and reaches the isotropic-cost solution at `eps = 1` with global error
//! `O(h)`.
//!
//! A full weight sweep additionally integrates the coordinate-reflected
//! problem (optimal cells depend only on the weight ratio, so the
//! reflected leg covers ratios above one while keeping `eps ∈ [0, 1]`
//! numerics) and stitches the two halves.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cells::{build, Atoms, Metric};
use crate::dual::{hessian, mixed_derivative, Prices, ReducedMatrix};
use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, Point};
use crate::knothe::initial_prices;

/// Relative residual target of the conjugate-gradient solve.
pub const CG_REL_TOL: f64 = 1e-12;

/// Which weight range a run covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleKind {
    /// `eps: 0 → 1`, horizontal-strip start to isotropic cost.
    Standard,
    /// Both coordinate orders: weight ratios from 0 to infinity.
    FullSweep,
}

/// Integration plan: schedule kind and number of Euler steps per leg.
#[derive(Clone, Copy, Debug)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub steps: usize,
}

impl Schedule {
    pub fn standard(steps: usize) -> Self {
        assert!(steps >= 1);
        Self {
            kind: ScheduleKind::Standard,
            steps,
        }
    }

    pub fn full_sweep(steps: usize) -> Self {
        assert!(steps >= 1);
        Self {
            kind: ScheduleKind::FullSweep,
            steps,
        }
    }
}

/// Coordinate frame a sample lives in. Reflected samples come from the
/// swapped-coordinate problem of a full sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Original,
    Reflected,
}

/// One recorded continuation state with its diagnostics.
#[derive(Clone, Debug)]
pub struct Sample {
    pub eps: f64,
    pub frame: Frame,
    pub prices: Prices,
    pub areas: Vec<f64>,
    /// `(Σ_i y_i¹ ∫_{C_i} x₁, Σ_i y_i² ∫_{C_i} x₂)`: the correlation
    /// point of the transport plan, in the sample's frame.
    pub correlation: (f64, f64),
    /// Smallest eigenvalue of the reduced matrix at this state.
    pub min_eig: f64,
}

impl Sample {
    /// First-to-second coordinate weight ratio represented by this sample:
    /// `eps` in the original frame, `1/eps` in the reflected one.
    pub fn weight_ratio(&self) -> f64 {
        match self.frame {
            Frame::Original => self.eps,
            Frame::Reflected => 1.0 / self.eps,
        }
    }
}

/// Terminal state of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RunStatus {
    Completed,
    /// The pre-step state failed the open-band area check. `step` counts
    /// within the failing leg; no sample is recorded at or after it.
    ExitedSafeRegion {
        step: usize,
        eps: f64,
    },
    /// Conjugate gradient missed its residual target, signalling a
    /// near-singular matrix (imminent band exit).
    LinearSolveFailed {
        step: usize,
        eps: f64,
        residual: f64,
    },
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }
}

/// Recorded evolution of the prices plus per-step diagnostics. Every
/// stored sample passed the safe-band check.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub status: RunStatus,
}

impl Trajectory {
    pub fn final_sample(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

/// Optional behaviors of [`run_with`].
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Replace the prices with an exact fixed-eps solve every this many
    /// steps, damping Euler drift. Off by default.
    pub project_every: Option<usize>,
}

/// Conjugate gradient for the reduced system `M z = rhs`.
///
/// Terminates when the relative residual drops below [`CG_REL_TOL`]; in
/// exact arithmetic that happens within `dim` iterations. If the first
/// sweep stalls, restarts once from a jittered iterate; gives up with
/// [`Error::LinearSolveFailure`] after three sweeps' worth of iterations.
pub fn cg_solve(m: &ReducedMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = m.dim();
    assert_eq!(rhs.len(), n, "rhs length must match matrix dimension");
    if n == 0 {
        return Ok(Vec::new());
    }
    let rhs_norm = norm(rhs);
    if rhs_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }

    let mut x = vec![0.0; n];
    let budget = 3 * n;
    let mut used = 0;
    match cg_sweep(m, rhs, &mut x, n.min(budget), rhs_norm) {
        CgOutcome::Converged => return Ok(x),
        CgOutcome::Stalled(iters) => used += iters,
    }

    // restart once from a jittered iterate to break a stalled Krylov space
    let mut rng = ChaCha8Rng::seed_from_u64(0x5d07c6);
    let scale = 1e-8 * (1.0 + x.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    for v in x.iter_mut() {
        *v += scale * (rng.gen::<f64>() - 0.5);
    }
    match cg_sweep(m, rhs, &mut x, budget - used, rhs_norm) {
        CgOutcome::Converged => Ok(x),
        CgOutcome::Stalled(iters) => {
            let residual = residual_rel(m, rhs, &x, rhs_norm);
            Err(Error::LinearSolveFailure {
                iterations: used + iters,
                residual,
                target: CG_REL_TOL,
            })
        }
    }
}

enum CgOutcome {
    Converged,
    Stalled(usize),
}

fn cg_sweep(
    m: &ReducedMatrix,
    rhs: &[f64],
    x: &mut [f64],
    max_iters: usize,
    rhs_norm: f64,
) -> CgOutcome {
    let n = rhs.len();
    let mut mx = vec![0.0; n];
    m.mul_vec(x, &mut mx);
    let mut r: Vec<f64> = rhs.iter().zip(&mx).map(|(b, a)| b - a).collect();
    if norm(&r) <= CG_REL_TOL * rhs_norm {
        return CgOutcome::Converged;
    }
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut mp = vec![0.0; n];
    for it in 0..max_iters {
        m.mul_vec(&p, &mut mp);
        let pmp = dot(&p, &mp);
        if pmp <= 0.0 {
            // not positive definite along this direction; bail out
            return CgOutcome::Stalled(it + 1);
        }
        let alpha = rr / pmp;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * mp[k];
        }
        let rr_new = dot(&r, &r);
        if !rr_new.is_finite() {
            // overflow along a near-null direction
            return CgOutcome::Stalled(it + 1);
        }
        if rr_new.sqrt() <= CG_REL_TOL * rhs_norm {
            return CgOutcome::Converged;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
    }
    CgOutcome::Stalled(max_iters)
}

fn residual_rel(m: &ReducedMatrix, rhs: &[f64], x: &[f64], rhs_norm: f64) -> f64 {
    let mut mx = vec![0.0; rhs.len()];
    m.mul_vec(x, &mut mx);
    let r: Vec<f64> = rhs.iter().zip(&mx).map(|(b, a)| b - a).collect();
    let rel = norm(&r) / rhs_norm;
    if rel.is_nan() {
        f64::INFINITY
    } else {
        rel
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// One explicit Euler step: requires the current state inside the safe
/// band, solves `M z = ∂_eps ∇_p Φ` by conjugate gradient, and advances
/// the prices by `h·z` (the pinned first price stays zero).
pub fn euler_step(
    prices: &Prices,
    eps: f64,
    h: f64,
    atoms: &Atoms,
    omega: &ConvexPolygon,
) -> Result<(Prices, f64)> {
    let metric = Metric::new(eps);
    let complex = build(atoms, metric, prices, omega);
    if !complex.in_safe_region() {
        return Err(Error::ExitedSafeRegion { eps });
    }
    let m = hessian(&complex, metric, atoms)?;
    let delta = mixed_derivative(&complex, metric, atoms);
    let z = cg_solve(&m, &delta)?;
    let mut reduced = prices.reduced().to_vec();
    for (p, dz) in reduced.iter_mut().zip(&z) {
        *p += h * dz;
    }
    Ok((Prices::from_reduced(&reduced), eps + h))
}

/// Integrates the schedule from the strip initialization. See [`run_with`].
pub fn run(atoms: &Atoms, omega: &ConvexPolygon, schedule: Schedule) -> Result<Trajectory> {
    run_with(atoms, omega, schedule, &RunOptions::default())
}

/// Integrates the dual-price ODE across the schedule, recording one sample
/// per accepted state (n+1 samples for a completed leg of n steps).
///
/// Guard failures and linear-solve failures terminate the run but still
/// return the trajectory accumulated so far, with the failure recorded in
/// `status`. Hard errors are reserved for invalid inputs (for a full
/// sweep, atoms must also have pairwise distinct abscissas).
pub fn run_with(
    atoms: &Atoms,
    omega: &ConvexPolygon,
    schedule: Schedule,
    options: &RunOptions,
) -> Result<Trajectory> {
    match schedule.kind {
        ScheduleKind::Standard => {
            let (samples, status) =
                integrate_leg(atoms, omega, schedule.steps, Frame::Original, options)?;
            Ok(Trajectory { samples, status })
        }
        ScheduleKind::FullSweep => {
            atoms.check_abscissa_gaps()?;
            let (mut samples, status_a) =
                integrate_leg(atoms, omega, schedule.steps, Frame::Original, options)?;
            if !status_a.is_completed() {
                return Ok(Trajectory {
                    samples,
                    status: status_a,
                });
            }
            let reflected_omega = reflect_polygon(omega)?;
            let reflected_atoms =
                Atoms::with_gap(atoms.reflected(), &reflected_omega, atoms.gap_min())?;
            let (leg_b, status_b) = integrate_leg(
                &reflected_atoms,
                &reflected_omega,
                schedule.steps,
                Frame::Reflected,
                options,
            )?;
            // stitch by increasing weight ratio; the reflected eps = 1
            // sample duplicates the junction and is dropped when present
            let skip_last = status_b.is_completed() as usize;
            samples.extend(leg_b.into_iter().rev().skip(skip_last));
            Ok(Trajectory {
                samples,
                status: status_b,
            })
        }
    }
}

fn integrate_leg(
    atoms: &Atoms,
    omega: &ConvexPolygon,
    steps: usize,
    frame: Frame,
    options: &RunOptions,
) -> Result<(Vec<Sample>, RunStatus)> {
    let h = 1.0 / steps as f64;
    let mut prices = initial_prices(atoms, omega)?;
    let mut samples = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let eps = k as f64 / steps as f64;
        let metric = Metric::new(eps);
        let complex = build(atoms, metric, &prices, omega);
        if !complex.in_safe_region() {
            return Ok((samples, RunStatus::ExitedSafeRegion { step: k, eps }));
        }
        let m = hessian(&complex, metric, atoms)?;
        samples.push(Sample {
            eps,
            frame,
            prices: prices.clone(),
            areas: complex.areas.clone(),
            correlation: correlation_point(&complex, atoms),
            min_eig: m.min_eigenvalue(),
        });
        if k == steps {
            break;
        }
        let delta = mixed_derivative(&complex, metric, atoms);
        let z = match cg_solve(&m, &delta) {
            Ok(z) => z,
            Err(Error::LinearSolveFailure { residual, .. }) => {
                return Ok((
                    samples,
                    RunStatus::LinearSolveFailed {
                        step: k,
                        eps,
                        residual,
                    },
                ));
            }
            Err(other) => return Err(other),
        };
        let mut reduced = prices.reduced().to_vec();
        for (p, dz) in reduced.iter_mut().zip(&z) {
            *p += h * dz;
        }
        prices = Prices::from_reduced(&reduced);
        if let Some(every) = options.project_every {
            if every > 0 && (k + 1) % every == 0 && k + 1 < steps {
                let eps_next = (k + 1) as f64 / steps as f64;
                let report = crate::oracle::solve_fixed_eps(
                    atoms,
                    omega,
                    eps_next,
                    &prices,
                    crate::oracle::default_tolerance(omega),
                )?;
                prices = report.prices;
            }
        }
    }
    Ok((samples, RunStatus::Completed))
}

/// Correlation point `(Σ y¹ ∫ x₁, Σ y² ∫ x₂)` of a tesselation.
pub fn correlation_point(complex: &crate::cells::CellComplex, atoms: &Atoms) -> (f64, f64) {
    let mut z1 = 0.0;
    let mut z2 = 0.0;
    for (cell, y) in complex.cells.iter().zip(atoms.points()) {
        let (m1, m2) = cell.first_moments();
        z1 += y.x1 * m1;
        z2 += y.x2 * m2;
    }
    (z1, z2)
}

/// Domain with swapped coordinates (re-oriented counterclockwise).
pub fn reflect_polygon(omega: &ConvexPolygon) -> Result<ConvexPolygon> {
    let mut verts: Vec<Point> = omega
        .vertices()
        .iter()
        .map(|p| Point::new(p.x2, p.x1))
        .collect();
    verts.reverse();
    ConvexPolygon::new(verts)
}
