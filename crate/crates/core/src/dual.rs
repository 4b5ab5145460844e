//! The dual functional of the semi-discrete transport problem and its
//! derivatives.
//!
//! `phi(p, eps) = (1/N) Σ p_i + ∫_Ω min_i (c_eps(x, y_i) − p_i) dx` is
//! concave in `p`; its gradient is `1/N − |C_i|` and its second derivatives
//! have closed forms in terms of facet lengths and endpoints. The solver
//! works with the reduced system on indices `2..N` (the first price is
//! pinned to zero), whose negated Hessian is positive definite inside the
//! safe area band.
//!
//! The integral in `phi` is evaluated exactly: the integrand is quadratic
//! on each cell, so polygon areas and first/second moments suffice. No
//! quadrature error enters the finite-difference validations.

use nalgebra::DMatrix;

use crate::cells::{Atoms, CellComplex, Metric};
use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;

/// Dual price vector with the normalization `values[0] == 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Prices {
    values: Vec<f64>,
}

impl Prices {
    /// Wraps a full-length vector; the first entry must be exactly zero.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("empty price vector".into()));
        }
        if values[0] != 0.0 {
            return Err(Error::InvalidInput(format!(
                "price normalization requires p[0] == 0, got {}",
                values[0]
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite price".into()));
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    /// Shifts an arbitrary vector so the first entry becomes zero.
    pub fn normalizing(mut values: Vec<f64>) -> Self {
        let shift = values[0];
        for v in &mut values {
            *v -= shift;
        }
        values[0] = 0.0;
        Self { values }
    }

    /// Rebuilds the full vector from the reduced coordinates `p_2..p_N`.
    pub fn from_reduced(reduced: &[f64]) -> Self {
        let mut values = Vec::with_capacity(reduced.len() + 1);
        values.push(0.0);
        values.extend_from_slice(reduced);
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The unpinned coordinates `p_2..p_N`.
    pub fn reduced(&self) -> &[f64] {
        &self.values[1..]
    }
}

/// The negated reduced Hessian `M = −(D²_pp Φ)` on indices `2..N`,
/// symmetric with nonpositive off-diagonal entries; positive definite when
/// assembled from a tesselation inside the safe band.
#[derive(Clone, Debug)]
pub struct ReducedMatrix {
    m: DMatrix<f64>,
}

impl ReducedMatrix {
    /// Wraps a dense symmetric matrix (used by tests and small fixtures).
    pub fn from_dense(m: DMatrix<f64>) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// Entry by reduced index (0 ↔ atom 2).
    pub fn entry(&self, r: usize, c: usize) -> f64 {
        self.m[(r, c)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn determinant(&self) -> f64 {
        self.m.clone().determinant()
    }

    /// `out = M v`.
    pub fn mul_vec(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        for (r, out_r) in out.iter_mut().enumerate() {
            *out_r = self.m.row(r).iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    /// Smallest eigenvalue via the symmetric eigendecomposition. Positive
    /// inside the safe band; reported per step as a conditioning
    /// diagnostic. Infinite for the empty matrix (single-atom problems).
    pub fn min_eigenvalue(&self) -> f64 {
        if self.dim() == 0 {
            return f64::INFINITY;
        }
        self.m
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Exact dual value for normalized prices.
pub fn phi(prices: &Prices, metric: Metric, atoms: &Atoms, omega: &ConvexPolygon) -> f64 {
    phi_raw(prices.values(), metric, atoms, omega)
}

/// Exact dual value for an arbitrary price vector. Under a uniform shift
/// `p + t·1` the value moves by `t(1 − |Ω|)`, so it is shift-invariant on
/// unit-area domains.
pub fn phi_raw(prices: &[f64], metric: Metric, atoms: &Atoms, omega: &ConvexPolygon) -> f64 {
    let complex = crate::cells::build_raw(atoms, metric, prices, omega);
    phi_of_complex(&complex, metric, atoms)
}

/// Dual value from an already-built tesselation.
pub fn phi_of_complex(complex: &CellComplex, metric: Metric, atoms: &Atoms) -> f64 {
    let n = atoms.len() as f64;
    let mut value = complex.price_values.iter().sum::<f64>() / n;
    for (i, cell) in complex.cells.iter().enumerate() {
        let y = atoms.points()[i];
        let area = complex.areas[i];
        let (m1, m2) = cell.first_moments();
        let (ixx, _, iyy) = cell.second_moments();
        let cost_integral = metric.eps * (ixx - 2.0 * y.x1 * m1 + y.x1 * y.x1 * area)
            + (iyy - 2.0 * y.x2 * m2 + y.x2 * y.x2 * area);
        value += cost_integral - complex.price_values[i] * area;
    }
    value
}

/// Full-length gradient of the dual: component `i` is `1/N − |C_i|`.
/// Components sum to `1 − |Ω|`.
pub fn grad(complex: &CellComplex) -> Vec<f64> {
    let n = complex.len() as f64;
    complex.areas.iter().map(|&a| 1.0 / n - a).collect()
}

/// Assembles the reduced matrix `M` from facet data:
/// off-diagonal `M_ij = −l_ij / (2|A_eps(y_j − y_i)|)` and diagonal rows
/// summing all incident facet terms, including the one toward atom 1
/// (which has no column of its own and therefore strictly dominates those
/// rows).
pub fn hessian(complex: &CellComplex, metric: Metric, atoms: &Atoms) -> Result<ReducedMatrix> {
    let n = complex.len();
    let dim = n.saturating_sub(1);
    let mut m = DMatrix::zeros(dim, dim);
    for f in &complex.facets {
        let delta = atoms.points()[f.j] - atoms.points()[f.i];
        let anorm = metric.anorm(delta);
        if anorm == 0.0 {
            return Err(Error::SingularPartition { i: f.i, j: f.j });
        }
        let w = f.length / (2.0 * anorm);
        if f.i >= 1 {
            m[(f.i - 1, f.i - 1)] += w;
        }
        if f.j >= 1 {
            m[(f.j - 1, f.j - 1)] += w;
        }
        if f.i >= 1 && f.j >= 1 {
            m[(f.i - 1, f.j - 1)] -= w;
            m[(f.j - 1, f.i - 1)] -= w;
        }
    }
    Ok(ReducedMatrix { m })
}

/// Rate of change of each cell area with respect to `eps`, full length.
/// Only abscissas enter the numerator because `dA_eps/d eps = diag(1, 0)`.
/// The components sum to zero: the cells tile the domain at every `eps`.
pub fn cell_area_eps_derivatives(complex: &CellComplex, metric: Metric, atoms: &Atoms) -> Vec<f64> {
    let mut deriv = vec![0.0; complex.len()];
    for f in &complex.facets {
        let yi = atoms.points()[f.i];
        let yj = atoms.points()[f.j];
        let anorm = metric.anorm(yj - yi);
        let (a, b) = f.endpoints;
        // l · B(y_j−y_i)·(y_j + y_i − a − b) / (2|A_eps(y_j−y_i)|),
        // antisymmetric under i ↔ j
        let numer = (yj.x1 - yi.x1) * (yj.x1 + yi.x1 - a.x1 - b.x1);
        let term = f.length * numer / (2.0 * anorm);
        deriv[f.i] += term;
        deriv[f.j] -= term;
    }
    deriv
}

/// Mixed derivative `∂_eps ∇_p Φ` on the reduced indices: component for
/// atom `i ≥ 2` equals `−∂|C_i|/∂eps`. This is the right-hand side of the
/// linear system solved at each continuation step.
pub fn mixed_derivative(complex: &CellComplex, metric: Metric, atoms: &Atoms) -> Vec<f64> {
    cell_area_eps_derivatives(complex, metric, atoms)
        .into_iter()
        .skip(1)
        .map(|d| -d)
        .collect()
}
