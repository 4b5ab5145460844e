//! Semi-discrete optimal transport between the uniform measure on a convex
//! polygon and a finite atom set, under the weighted quadratic costs
//! `c_eps(x, y) = eps (x₁−y₁)² + (x₂−y₂)²`.
//!
//! The crate computes the whole family of optimal transport maps for
//! `eps ∈ [0, 1]`: at `eps = 0` the optimal cells are the horizontal
//! strips of the monotone rearrangement, at `eps = 1` they are the usual
//! power cells of the quadratic cost. In between, the dual prices obey an
//! ODE obtained by differentiating the optimality condition, which
//! [`continuation`] integrates by an explicit Euler scheme with
//! conjugate-gradient linear solves (global error `O(h)`), starting from
//! the strip prices supplied by [`knothe`]. A fixed-eps damped-Newton
//! maximizer in [`oracle`] provides exact solutions for validation.
//!
//! Modules:
//! - [`geometry`]: convex polygon clipping, areas and moments;
//! - [`cells`]: the Laguerre tesselation, facets and adjacency;
//! - [`dual`]: the dual functional, its gradient, reduced Hessian and
//!   mixed derivative;
//! - [`knothe`]: strip partitions, initial prices, and the closed-form
//!   Gaussian transport family;
//! - [`continuation`]: the Euler/CG integrator and trajectory recording;
//! - [`oracle`]: the independent fixed-eps solver and the strip-deviation
//!   measurements.

pub mod cells;
pub mod continuation;
pub mod dual;
pub mod error;
pub mod geometry;
pub mod knothe;
pub mod oracle;

pub use cells::{build, Atoms, CellComplex, Facet, Metric};
pub use continuation::{
    run, run_with, Frame, RunOptions, RunStatus, Sample, Schedule, ScheduleKind, Trajectory,
};
pub use dual::{grad, hessian, mixed_derivative, phi, Prices, ReducedMatrix};
pub use error::{Error, Result};
pub use geometry::{unit_square, ConvexPolygon, HalfPlane, Point};
pub use knothe::{
    gaussian_transport, gaussian_transport_limit, initial_prices, knothe_assignment, strip_heights,
    GaussianSpec, StripPartition,
};
pub use oracle::{knothe_limit_check, solve_fixed_eps, strip_deviation, SolveReport};
