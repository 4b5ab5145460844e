//! Shared fixtures and independent finite-difference oracles for the
//! integration suites.
#![allow(dead_code)] // each test binary uses its own subset

use rand::{Rng as _, SeedableRng as _};
use rand_chacha::ChaCha8Rng;
use sdot_core::cells::build_raw;
use sdot_core::dual::phi_raw;
use sdot_core::*;

/// Seed of the canonical five-atom fixture used by the acceptance runs.
pub const ACCEPTANCE_SEED: u64 = 7;

/// Rejection-samples `n` atoms uniformly in the domain (with a small
/// margin from the boundary) until the ordinate-gap invariant holds.
pub fn sample_atoms(omega: &ConvexPolygon, n: usize, seed: u64) -> Atoms {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lo1, mut hi1, mut lo2, mut hi2) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for v in omega.vertices() {
        lo1 = lo1.min(v.x1);
        hi1 = hi1.max(v.x1);
        lo2 = lo2.min(v.x2);
        hi2 = hi2.max(v.x2);
    }
    let margin = 0.02 * omega.diameter();
    loop {
        let pts: Vec<Point> = (0..n)
            .map(|_| loop {
                let p = Point::new(
                    rng.gen_range(lo1 + margin..hi1 - margin),
                    rng.gen_range(lo2 + margin..hi2 - margin),
                );
                if omega.contains(p) {
                    break p;
                }
            })
            .collect();
        if let Ok(atoms) = Atoms::new(pts, omega) {
            return atoms;
        }
    }
}

/// The canonical acceptance fixture: five seeded atoms on the unit square.
pub fn acceptance_fixture() -> (ConvexPolygon, Atoms) {
    let omega = unit_square();
    let atoms = sample_atoms(&omega, 5, ACCEPTANCE_SEED);
    (omega, atoms)
}

/// A random state inside the safe band: atoms, a perturbed price vector,
/// and a metric.
pub fn safe_random_state(omega: &ConvexPolygon, n: usize, seed: u64) -> (Atoms, Vec<f64>, Metric) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let atoms = sample_atoms(omega, n, rng.gen());
        let eps = rng.gen_range(0.1..1.0);
        let mut values = initial_prices(&atoms, omega).unwrap().values().to_vec();
        for v in values.iter_mut().skip(1) {
            *v += rng.gen_range(-0.02..0.02);
        }
        let complex = build_raw(&atoms, Metric::new(eps), &values, omega);
        if complex.in_safe_region() {
            return (atoms, values, Metric::new(eps));
        }
    }
}

/// Central finite difference of the dual value in price coordinate `i`.
pub fn fd_grad_component(
    atoms: &Atoms,
    omega: &ConvexPolygon,
    metric: Metric,
    values: &[f64],
    i: usize,
    step: f64,
) -> f64 {
    let mut hi = values.to_vec();
    let mut lo = values.to_vec();
    hi[i] += step;
    lo[i] -= step;
    (phi_raw(&hi, metric, atoms, omega) - phi_raw(&lo, metric, atoms, omega)) / (2.0 * step)
}

/// Central finite difference of all cell areas in price coordinate `j`.
pub fn fd_areas_in_price(
    atoms: &Atoms,
    omega: &ConvexPolygon,
    metric: Metric,
    values: &[f64],
    j: usize,
    step: f64,
) -> Vec<f64> {
    let mut hi = values.to_vec();
    let mut lo = values.to_vec();
    hi[j] += step;
    lo[j] -= step;
    let chi = build_raw(atoms, metric, &hi, omega);
    let clo = build_raw(atoms, metric, &lo, omega);
    chi.areas
        .iter()
        .zip(&clo.areas)
        .map(|(a, b)| (a - b) / (2.0 * step))
        .collect()
}

/// Finite difference of all cell areas in `eps` (central away from zero,
/// forward at zero where the metric does not extend below).
pub fn fd_areas_in_eps(
    atoms: &Atoms,
    omega: &ConvexPolygon,
    eps: f64,
    values: &[f64],
    step: f64,
) -> Vec<f64> {
    let (e_hi, e_lo) = if eps < step {
        (eps + step, eps)
    } else {
        (eps + step, eps - step)
    };
    let chi = build_raw(atoms, Metric::new(e_hi), values, omega);
    let clo = build_raw(atoms, Metric::new(e_lo), values, omega);
    chi.areas
        .iter()
        .zip(&clo.areas)
        .map(|(a, b)| (a - b) / (e_hi - e_lo))
        .collect()
}

/// Largest relative deviation of the areas from the equal share `|Ω|/N`.
pub fn max_rel_area_error(areas: &[f64], omega_area: f64) -> f64 {
    let target = omega_area / areas.len() as f64;
    areas
        .iter()
        .fold(0.0f64, |m, &a| m.max((a - target).abs() / target))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}
