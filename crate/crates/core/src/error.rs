//! Error types shared across the solver.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Polygon input failed validation (orientation, convexity, degeneracy).
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    /// Atom set violates the distinct-coordinate gap needed by the solver.
    #[error(
        "degenerate atoms: coordinate {axis} of atoms {i} and {j} differ by {gap:.3e}, below the minimum gap {gap_min:.3e}"
    )]
    DegenerateAtoms {
        /// 1 for the abscissa, 2 for the ordinate.
        axis: u8,
        i: usize,
        j: usize,
        gap: f64,
        gap_min: f64,
    },

    /// An atom lies outside the source domain.
    #[error("atom {index} at ({x1}, {x2}) lies outside the domain")]
    AtomOutsideDomain { index: usize, x1: f64, x2: f64 },

    /// Two atoms coincide under the anisotropic metric (defensive; cannot
    /// happen once the atom gap invariant holds).
    #[error("singular partition: atoms {i} and {j} coincide under the metric")]
    SingularPartition { i: usize, j: usize },

    /// Conjugate gradient failed to reach the residual target.
    #[error(
        "linear solve failure: relative residual {residual:.3e} after {iterations} iterations (target {target:.1e})"
    )]
    LinearSolveFailure {
        iterations: usize,
        residual: f64,
        target: f64,
    },

    /// A continuation state left the safety region where the price ODE is
    /// well posed (some cell area escaped the (|Ω|/2N, 2|Ω|/N) band).
    #[error("state exited the safe area band at eps = {eps}")]
    ExitedSafeRegion { eps: f64 },

    /// The fixed-eps dual maximizer failed to meet tolerance.
    #[error("no convergence after {iterations} iterations (gradient norm {grad_norm:.3e})")]
    NoConvergence { iterations: usize, grad_norm: f64 },

    /// Configuration or input problem reported with context.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
