//! Fixed-eps dual maximizer, independent of the continuation path.
//!
//! Maximizes the concave dual over the reduced prices by damped Newton
//! ascent: the negated reduced Hessian is already available in closed form
//! and is positive definite inside the safe band, so the Newton step is an
//! ascent direction; backtracking keeps every accepted iterate improving
//! (in dual value or in residual norm) and every cell nonempty. Optimality
//! is declared when the sup-norm of the mass residual drops below
//! tolerance, i.e. every cell carries its share of the domain.

use crate::cells::{build, Atoms, Metric};
use crate::dual::{hessian, phi_of_complex, Prices};
use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;
use crate::knothe::{initial_prices, strip_partition};

const MAX_ITER: usize = 1000;
const ARMIJO: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;

/// Default stopping tolerance on the mass residual: `1e-10 · |Ω|`.
pub fn default_tolerance(omega: &ConvexPolygon) -> f64 {
    1e-10 * omega.area()
}

/// Outcome of a fixed-eps solve.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub prices: Prices,
    /// Number of accepted Newton iterations.
    pub iterations: usize,
    /// Final sup-norm of the reduced mass residual.
    pub grad_norm: f64,
    pub areas: Vec<f64>,
    /// Dual value at each accepted iterate (nondecreasing), ending at the
    /// solution.
    pub phi_trace: Vec<f64>,
}

/// Solves `∇Φ_eps = 0` on the reduced prices by damped Newton ascent.
///
/// The residual driven to zero is `|Ω|/N − |C_i|` for `i ≥ 2`; together
/// with the partition identity this makes every cell area `|Ω|/N`.
pub fn solve_fixed_eps(
    atoms: &Atoms,
    omega: &ConvexPolygon,
    eps: f64,
    p_init: &Prices,
    tol: f64,
) -> Result<SolveReport> {
    assert!(tol > 0.0);
    assert_eq!(p_init.len(), atoms.len());
    let metric = Metric::new(eps);
    let n = atoms.len();
    let target = omega.area() / n as f64;

    let mut prices = p_init.clone();
    let mut complex = build(atoms, metric, &prices, omega);
    let mut phi_here = phi_of_complex(&complex, metric, atoms);
    let mut phi_trace = vec![phi_here];

    for iteration in 0..=MAX_ITER {
        let residual: Vec<f64> = complex.areas[1..].iter().map(|&a| target - a).collect();
        let grad_norm = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if grad_norm <= tol {
            return Ok(SolveReport {
                prices,
                iterations: iteration,
                grad_norm,
                areas: complex.areas,
                phi_trace,
            });
        }
        if iteration == MAX_ITER {
            break;
        }

        let direction = newton_direction(&complex, metric, atoms, &residual)?;
        let slope: f64 = residual.iter().zip(&direction).map(|(g, d)| g * d).sum();

        // Backtrack until the dual improves and no cell collapses. Near the
        // optimum the dual increase drops below f64 resolution while the
        // Newton contraction is still strong, so a step that shrinks the
        // residual is also accepted.
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut reduced = prices.reduced().to_vec();
            for (p, d) in reduced.iter_mut().zip(&direction) {
                *p += t * d;
            }
            let candidate = Prices::from_reduced(&reduced);
            let cand_complex = build(atoms, metric, &candidate, omega);
            let cand_phi = phi_of_complex(&cand_complex, metric, atoms);
            let nonempty = cand_complex.areas.iter().all(|&a| a > 0.0);
            let armijo_ok = cand_phi >= phi_here + ARMIJO * t * slope;
            let cand_norm = cand_complex.areas[1..]
                .iter()
                .fold(0.0f64, |m, a| m.max((target - a).abs()));
            if nonempty && (armijo_ok || cand_norm <= 0.9 * grad_norm) {
                accepted = Some((candidate, cand_complex, cand_phi));
                break;
            }
            t *= BACKTRACK;
        }
        let Some((next_prices, next_complex, next_phi)) = accepted else {
            return Err(Error::NoConvergence {
                iterations: iteration,
                grad_norm,
            });
        };
        prices = next_prices;
        complex = next_complex;
        phi_here = next_phi;
        phi_trace.push(phi_here);
    }

    let grad_norm = complex.areas[1..]
        .iter()
        .fold(0.0f64, |m, a| m.max((target - a).abs()));
    Err(Error::NoConvergence {
        iterations: MAX_ITER,
        grad_norm,
    })
}

/// Newton direction `M⁻¹ g` via Cholesky; falls back to the raw residual
/// (a gradient-ascent direction) when the matrix is not positive definite,
/// which happens only outside the safe band.
fn newton_direction(
    complex: &crate::cells::CellComplex,
    metric: Metric,
    atoms: &Atoms,
    residual: &[f64],
) -> Result<Vec<f64>> {
    let m = hessian(complex, metric, atoms)?;
    if m.dim() == 0 {
        return Ok(Vec::new());
    }
    match m.as_matrix().clone().cholesky() {
        Some(chol) => {
            let sol = chol.solve(&nalgebra::DVector::from_column_slice(residual));
            Ok(sol.iter().copied().collect())
        }
        None => Ok(residual.to_vec()),
    }
}

/// Normalized symmetric-difference area between the cells of a
/// tesselation and the equal-area Knothe strips: `Σ_i |C_i Δ S_i| / |Ω|`.
pub fn strip_deviation(
    atoms: &Atoms,
    omega: &ConvexPolygon,
    complex: &crate::cells::CellComplex,
) -> f64 {
    let partition = strip_partition(atoms, omega);
    let mut strip_of_atom = vec![ConvexPolygon::empty(); atoms.len()];
    for (slot, &atom) in partition.order.iter().enumerate() {
        strip_of_atom[atom] = partition.strip(omega, slot);
    }
    let mut deviation = 0.0;
    for (i, cell) in complex.cells.iter().enumerate() {
        let strip = &strip_of_atom[i];
        let overlap = intersect_with_strip(cell, strip);
        deviation += cell.area() + strip.area() - 2.0 * overlap;
    }
    deviation / omega.area()
}

/// For each `eps`, solves the fixed-eps problem from the strip prices and
/// measures how far the optimal cells are from the Knothe strips. The
/// deviations shrink as `eps → 0`.
pub fn knothe_limit_check(
    atoms: &Atoms,
    omega: &ConvexPolygon,
    eps_list: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let p0 = initial_prices(atoms, omega)?;
    let tol = default_tolerance(omega);
    let mut out = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let report = solve_fixed_eps(atoms, omega, eps, &p0, tol)?;
        let complex = build(atoms, Metric::new(eps), &report.prices, omega);
        out.push((eps, strip_deviation(atoms, omega, &complex)));
    }
    Ok(out)
}

/// Area of `cell ∩ strip`, clipping the cell against the strip's two
/// horizontal boundaries (strips are full-width, so those suffice).
fn intersect_with_strip(cell: &ConvexPolygon, strip: &ConvexPolygon) -> f64 {
    use crate::geometry::{EdgeLabel, HalfPlane, Point};
    if cell.is_empty() || strip.is_empty() {
        return 0.0;
    }
    let (mut lo, mut hi) = (f64::MAX, f64::MIN);
    for v in strip.vertices() {
        lo = lo.min(v.x2);
        hi = hi.max(v.x2);
    }
    cell.clip(
        &HalfPlane::new(Point::new(0.0, -1.0), -lo),
        EdgeLabel::Cut(usize::MAX),
    )
    .clip(
        &HalfPlane::new(Point::new(0.0, 1.0), hi),
        EdgeLabel::Cut(usize::MAX),
    )
    .area()
}
