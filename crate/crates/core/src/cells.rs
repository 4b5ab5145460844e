//! Anisotropic Laguerre tesselation of a convex polygon.
//!
//! For atoms `y_i` with prices `p_i` and the diagonal metric
//! `A_eps = diag(eps, 1)`, cell `i` is the set of points of the domain
//! where `|x − y_i|²_A − p_i` attains the minimum over all atoms. Cells are
//! intersections of the domain with half-planes whose boundary lines are
//! the pairwise cost bisectors, so each one is built by iterated clipping
//! (O(N) half-planes per cell; N stays small here, correctness of facet
//! endpoints is what matters downstream).

use crate::dual::Prices;
use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, EdgeLabel, HalfPlane, Point};

/// Facets shorter than this fraction of the domain diameter are treated as
/// non-adjacent contacts; the derivative formulas are continuous in the
/// facet length, so dropping them loses nothing.
pub const FACET_REL_TOL: f64 = 1e-10;

/// Default minimum gap between distinct atom ordinates, as a fraction of
/// the domain diameter.
pub const DEFAULT_GAP_REL: f64 = 1e-6;

/// The weighted quadratic metric `A_eps = diag(eps, 1)`.
///
/// Its eps-derivative is `B = diag(1, 0)`, which shows up in the mixed
/// derivative formulas as "first coordinates only".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metric {
    pub eps: f64,
}

impl Metric {
    pub fn new(eps: f64) -> Self {
        assert!(eps >= 0.0 && eps.is_finite(), "eps must be finite and >= 0");
        Self { eps }
    }

    /// `A_eps v = (eps·v₁, v₂)`.
    pub fn apply(&self, v: Point) -> Point {
        Point::new(self.eps * v.x1, v.x2)
    }

    /// `|A_eps v|`.
    pub fn anorm(&self, v: Point) -> f64 {
        self.apply(v).norm()
    }

    /// Transport cost `c_eps(x, y) = eps (x₁−y₁)² + (x₂−y₂)²`.
    pub fn cost(&self, x: Point, y: Point) -> f64 {
        let d = x - y;
        self.eps * d.x1 * d.x1 + d.x2 * d.x2
    }
}

/// The target atoms `y_1 … y_N`, each carrying mass `1/N`.
///
/// Validated on construction: every atom inside the domain (boundary
/// allowed), and pairwise ordinate gaps at least `gap_min` so that the
/// bisector normals stay bounded away from zero for every `eps ≥ 0`.
#[derive(Clone, Debug)]
pub struct Atoms {
    points: Vec<Point>,
    gap_min: f64,
}

impl Atoms {
    /// Validates atoms against the domain with the default ordinate gap
    /// `1e-6 · diam(Ω)`.
    pub fn new(points: Vec<Point>, omega: &ConvexPolygon) -> Result<Self> {
        Self::with_gap(points, omega, DEFAULT_GAP_REL * omega.diameter())
    }

    pub fn with_gap(points: Vec<Point>, omega: &ConvexPolygon, gap_min: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("need at least one atom".into()));
        }
        if !gap_min.is_finite() || gap_min <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "minimum ordinate gap must be positive and finite, got {gap_min}"
            )));
        }
        for (k, p) in points.iter().enumerate() {
            if !p.is_finite() || !omega.contains(*p) {
                return Err(Error::AtomOutsideDomain {
                    index: k,
                    x1: p.x1,
                    x2: p.x2,
                });
            }
        }
        check_axis_gaps(&points, 2, gap_min)?;
        Ok(Self { points, gap_min })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn gap_min(&self) -> f64 {
        self.gap_min
    }

    /// Checks the abscissa gaps too (required before reflecting the problem
    /// in a full weight sweep, where the coordinates swap roles).
    pub fn check_abscissa_gaps(&self) -> Result<()> {
        check_axis_gaps(&self.points, 1, self.gap_min)
    }

    /// Atoms with swapped coordinates, for the reflected problem.
    pub(crate) fn reflected(&self) -> Vec<Point> {
        self.points.iter().map(|p| Point::new(p.x2, p.x1)).collect()
    }
}

fn check_axis_gaps(points: &[Point], axis: u8, gap_min: f64) -> Result<()> {
    let coord = |p: &Point| if axis == 1 { p.x1 } else { p.x2 };
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let gap = (coord(&points[i]) - coord(&points[j])).abs();
            if gap < gap_min {
                return Err(Error::DegenerateAtoms {
                    axis,
                    i,
                    j,
                    gap,
                    gap_min,
                });
            }
        }
    }
    Ok(())
}

/// Common boundary segment between two cells: its incident atom indices,
/// length, and its two extremal points.
#[derive(Clone, Copy, Debug)]
pub struct Facet {
    pub i: usize,
    pub j: usize,
    pub length: f64,
    pub endpoints: (Point, Point),
}

/// The full tesselation at one `(prices, eps)` state: cells aligned with
/// the atom indices, their areas, and the facet/adjacency structure.
#[derive(Clone, Debug)]
pub struct CellComplex {
    pub cells: Vec<ConvexPolygon>,
    pub areas: Vec<f64>,
    pub facets: Vec<Facet>,
    /// `neighbors[i]` lists `(j, facet index)` for every facet incident to
    /// cell `i`; symmetric by construction.
    pub neighbors: Vec<Vec<(usize, usize)>>,
    pub eps: f64,
    pub price_values: Vec<f64>,
    pub omega_area: f64,
}

impl CellComplex {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// True iff every cell area lies strictly inside the open band
    /// `(|Ω|/2N, 2|Ω|/N)`, the region where the reduced Hessian is
    /// invertible and the price ODE well posed.
    pub fn in_safe_region(&self) -> bool {
        let n = self.len() as f64;
        let lo = self.omega_area / (2.0 * n);
        let hi = 2.0 * self.omega_area / n;
        self.areas.iter().all(|&a| a > lo && a < hi)
    }

    /// Facet between cells `i` and `j`, if they share positive-length
    /// boundary.
    pub fn facet_between(&self, i: usize, j: usize) -> Option<&Facet> {
        self.neighbors[i]
            .iter()
            .find(|(k, _)| *k == j)
            .map(|(_, f)| &self.facets[*f])
    }
}

/// Cost bisector between atoms `i` and `j`, oriented so that cell `i`'s
/// side satisfies the inequality: `2A_eps(y_j−y_i)·x ≤ A_eps y_j·y_j −
/// A_eps y_i·y_i − p_j + p_i`. The normal is nonzero for every eps because
/// the atom ordinates are distinct.
pub fn bisector(i: usize, j: usize, atoms: &Atoms, metric: Metric, prices: &[f64]) -> HalfPlane {
    debug_assert_ne!(i, j);
    let yi = atoms.points()[i];
    let yj = atoms.points()[j];
    let normal = metric.apply(yj - yi) * 2.0;
    let offset = metric.apply(yj).dot(yj) - metric.apply(yi).dot(yi) - prices[j] + prices[i];
    HalfPlane::new(normal, offset)
}

/// Builds the tesselation for normalized prices.
pub fn build(atoms: &Atoms, metric: Metric, prices: &Prices, omega: &ConvexPolygon) -> CellComplex {
    build_raw(atoms, metric, prices.values(), omega)
}

/// Builds the tesselation for an arbitrary price vector (no normalization
/// requirement); cells depend on price differences only, so this is the
/// work-horse behind shift-invariance checks and finite differencing.
pub fn build_raw(
    atoms: &Atoms,
    metric: Metric,
    prices: &[f64],
    omega: &ConvexPolygon,
) -> CellComplex {
    let n = atoms.len();
    assert_eq!(prices.len(), n, "one price per atom");
    let facet_tol = FACET_REL_TOL * omega.diameter();

    let mut cells = Vec::with_capacity(n);
    for i in 0..n {
        let mut cell = omega.clone();
        for j in 0..n {
            if j == i {
                continue;
            }
            cell = cell.clip(&bisector(i, j, atoms, metric, prices), EdgeLabel::Cut(j));
            if cell.is_empty() {
                break;
            }
        }
        cells.push(cell);
    }
    let areas: Vec<f64> = cells.iter().map(|c| c.area()).collect();

    // Facet extraction: every cell edge labeled with a neighbor index is a
    // candidate; pairs are stored once (first seen from the lower index).
    let mut facets: Vec<Facet> = Vec::new();
    let mut pair_seen = std::collections::HashMap::new();
    for (i, cell) in cells.iter().enumerate() {
        let verts = cell.vertices();
        for (k, label) in cell.edge_labels().iter().enumerate() {
            let EdgeLabel::Cut(j) = *label else { continue };
            let a = verts[k];
            let b = verts[(k + 1) % verts.len()];
            let length = a.distance(b);
            if length <= facet_tol {
                continue;
            }
            let key = (i.min(j), i.max(j));
            if pair_seen.contains_key(&key) {
                continue;
            }
            pair_seen.insert(key, facets.len());
            facets.push(Facet {
                i: key.0,
                j: key.1,
                length,
                endpoints: (a, b),
            });
        }
    }

    let mut neighbors = vec![Vec::new(); n];
    for (idx, f) in facets.iter().enumerate() {
        neighbors[f.i].push((f.j, idx));
        neighbors[f.j].push((f.i, idx));
    }

    CellComplex {
        cells,
        areas,
        facets,
        neighbors,
        eps: metric.eps,
        price_values: prices.to_vec(),
        omega_area: omega.area(),
    }
}
