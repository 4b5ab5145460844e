//! Convex polygon primitives in the plane: half-plane clipping, areas and
//! polynomial moments, with edge provenance tracking.
//!
//! Everything here is tolerance-based double precision. A point is "on" a
//! line `n·x = c` when `|n·x − c| ≤ ON_LINE_REL_TOL · (1 + |c|)`, and
//! vertices closer than `MERGE_REL_TOL · diameter` are merged. Both
//! tolerances are scaled so the predicates are unit-free.
//!
//! Empty and degenerate (fewer than three vertices, zero area) polygons are
//! legal values, not errors: a cell clipped to nothing is meaningful state
//! for the callers in [`crate::cells`].

use crate::error::{Error, Result};

/// Relative tolerance for the on-line predicate `|n·x − c| ≤ tol·(1+|c|)`.
pub const ON_LINE_REL_TOL: f64 = 1e-12;

/// Vertices closer than this fraction of the polygon diameter are merged.
pub const MERGE_REL_TOL: f64 = 1e-10;

/// A point (or free vector) in the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x1: f64,
    pub x2: f64,
}

impl Point {
    pub fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }

    pub fn norm(self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x1 + rhs.x1, self.x2 + rhs.x2)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x1 - rhs.x1, self.x2 - rhs.x2)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x1 * s, self.x2 * s)
    }
}

/// Closed half-plane `{x : n·x ≤ c}`. The normal need not be unit length;
/// the on-line tolerance scales consistently with `(n, c)`.
#[derive(Clone, Copy, Debug)]
pub struct HalfPlane {
    pub normal: Point,
    pub offset: f64,
}

impl HalfPlane {
    pub fn new(normal: Point, offset: f64) -> Self {
        debug_assert!(normal.norm() > 0.0, "half-plane normal must be nonzero");
        Self { normal, offset }
    }

    /// Signed slack `n·x − c`: negative inside, positive outside.
    pub fn slack(&self, p: Point) -> f64 {
        self.normal.dot(p) - self.offset
    }

    /// Tolerance below which a point counts as lying on the boundary line.
    pub fn on_tol(&self) -> f64 {
        ON_LINE_REL_TOL * (1.0 + self.offset.abs())
    }

    pub fn contains(&self, p: Point) -> bool {
        self.slack(p) <= self.on_tol()
    }

    /// The complementary half-plane `{x : n·x ≥ c}` as `(−n)·x ≤ −c`.
    pub fn complement(&self) -> HalfPlane {
        HalfPlane {
            normal: self.normal * -1.0,
            offset: -self.offset,
        }
    }
}

/// Provenance of a polygon edge: either an edge of the original hull
/// (by index) or a cut introduced by a clip (by caller-chosen id).
///
/// Cells use the cut id to record which bisector produced each edge, which
/// is what makes facet endpoints recoverable from the clipped polygons.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeLabel {
    Hull(usize),
    Cut(usize),
}

/// A convex polygon with counterclockwise vertices and per-edge labels.
///
/// `labels[k]` describes the edge from `verts[k]` to `verts[(k+1) % n]`.
/// Constructed strictly via [`ConvexPolygon::new`] (validating convexity)
/// or produced by [`ConvexPolygon::clip`], which preserves the invariants
/// structurally. May be empty or degenerate after clipping.
#[derive(Clone, Debug)]
pub struct ConvexPolygon {
    verts: Vec<Point>,
    labels: Vec<EdgeLabel>,
}

impl ConvexPolygon {
    /// Validates and builds a polygon from counterclockwise vertices.
    ///
    /// Rejects: fewer than 3 vertices, non-finite coordinates, clockwise or
    /// self-intersecting input, three consecutive vertices collinear within
    /// tolerance, and consecutive duplicates.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need at least 3 vertices, got {n}"
            )));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPolygon("non-finite vertex".into()));
        }
        let diam = bbox_diameter(&vertices);
        if diam <= 0.0 {
            return Err(Error::InvalidPolygon("all vertices coincide".into()));
        }
        let dist_tol = MERGE_REL_TOL * diam;
        for k in 0..n {
            let a = vertices[k];
            let b = vertices[(k + 1) % n];
            if a.distance(b) <= dist_tol {
                return Err(Error::InvalidPolygon(format!(
                    "consecutive vertices {k} and {} coincide within tolerance",
                    (k + 1) % n
                )));
            }
        }
        // Strict convexity: every turn is a left turn with margin scaled by
        // the incident edge lengths (collinear triples rejected).
        for k in 0..n {
            let a = vertices[k];
            let b = vertices[(k + 1) % n];
            let c = vertices[(k + 2) % n];
            let cross = cross_product(b - a, c - b);
            let scale = (b - a).norm() * (c - b).norm();
            if cross <= ON_LINE_REL_TOL * scale {
                return Err(Error::InvalidPolygon(format!(
                    "vertices must be counterclockwise and strictly convex (turn at index {})",
                    (k + 1) % n
                )));
            }
        }
        let labels = (0..n).map(EdgeLabel::Hull).collect();
        Ok(Self {
            verts: vertices,
            labels,
        })
    }

    /// Unchecked constructor for internal producers (clipping), which keep
    /// the orientation/convexity invariants by construction.
    pub(crate) fn from_raw(verts: Vec<Point>, labels: Vec<EdgeLabel>) -> Self {
        debug_assert_eq!(verts.len(), labels.len());
        Self { verts, labels }
    }

    pub fn empty() -> Self {
        Self {
            verts: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.verts
    }

    pub fn edge_labels(&self) -> &[EdgeLabel] {
        &self.labels
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    /// Diagonal of the axis-aligned bounding box; the diameter proxy used
    /// to scale merge tolerances (within √2 of the true diameter).
    pub fn diameter(&self) -> f64 {
        bbox_diameter(&self.verts)
    }

    /// Shoelace area; zero for degenerate polygons.
    pub fn area(&self) -> f64 {
        if self.verts.len() < 3 {
            return 0.0;
        }
        let mut twice = 0.0;
        for k in 0..self.verts.len() {
            let a = self.verts[k];
            let b = self.verts[(k + 1) % self.verts.len()];
            twice += cross_product(a, b);
        }
        0.5 * twice
    }

    /// `(∫ x₁ dx, ∫ x₂ dx)` over the polygon, by the Green's-theorem
    /// boundary formula.
    pub fn first_moments(&self) -> (f64, f64) {
        if self.verts.len() < 3 {
            return (0.0, 0.0);
        }
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for k in 0..self.verts.len() {
            let a = self.verts[k];
            let b = self.verts[(k + 1) % self.verts.len()];
            let w = cross_product(a, b);
            m1 += (a.x1 + b.x1) * w;
            m2 += (a.x2 + b.x2) * w;
        }
        (m1 / 6.0, m2 / 6.0)
    }

    /// `(∫ x₁² dx, ∫ x₁x₂ dx, ∫ x₂² dx)` by the triangulated boundary
    /// formula. Exact for polygons, up to rounding.
    pub fn second_moments(&self) -> (f64, f64, f64) {
        if self.verts.len() < 3 {
            return (0.0, 0.0, 0.0);
        }
        let mut ixx = 0.0;
        let mut ixy = 0.0;
        let mut iyy = 0.0;
        for k in 0..self.verts.len() {
            let a = self.verts[k];
            let b = self.verts[(k + 1) % self.verts.len()];
            let w = cross_product(a, b);
            ixx += (a.x1 * a.x1 + a.x1 * b.x1 + b.x1 * b.x1) * w;
            iyy += (a.x2 * a.x2 + a.x2 * b.x2 + b.x2 * b.x2) * w;
            ixy += (a.x1 * (2.0 * a.x2 + b.x2) + b.x1 * (a.x2 + 2.0 * b.x2)) * w;
        }
        (ixx / 12.0, ixy / 24.0, iyy / 12.0)
    }

    pub fn contains(&self, p: Point) -> bool {
        if self.verts.len() < 3 {
            return false;
        }
        let tol = ON_LINE_REL_TOL * (1.0 + self.diameter());
        for k in 0..self.verts.len() {
            let a = self.verts[k];
            let b = self.verts[(k + 1) % self.verts.len()];
            if cross_product(b - a, p - a) < -tol * (b - a).norm() {
                return false;
            }
        }
        true
    }

    /// Intersects with a half-plane. New edges lying on the cut line carry
    /// `cut`; surviving edges keep their labels. Result may be empty or
    /// degenerate. Vertices closer than the merge tolerance are collapsed.
    pub fn clip(&self, h: &HalfPlane, cut: EdgeLabel) -> ConvexPolygon {
        let n = self.verts.len();
        if n == 0 {
            return ConvexPolygon::empty();
        }
        let tol = h.on_tol();
        let slack: Vec<f64> = self.verts.iter().map(|&v| h.slack(v)).collect();
        let inside: Vec<bool> = slack.iter().map(|&s| s <= tol).collect();

        if inside.iter().all(|&b| b) {
            return self.clone();
        }
        if inside.iter().all(|&b| !b) {
            return ConvexPolygon::empty();
        }

        let mut out_verts: Vec<Point> = Vec::with_capacity(n + 2);
        let mut out_labels: Vec<EdgeLabel> = Vec::with_capacity(n + 2);
        for k in 0..n {
            let a = self.verts[k];
            let b = self.verts[(k + 1) % n];
            let (sa, sb) = (slack[k], slack[(k + 1) % n]);
            let (a_in, b_in) = (inside[k], inside[(k + 1) % n]);
            if a_in {
                out_verts.push(a);
                out_labels.push(self.labels[k]);
                if !b_in {
                    // Leaving: boundary continues along the cut line.
                    out_verts.push(crossing(a, b, sa, sb));
                    out_labels.push(cut);
                }
            } else if b_in {
                // Entering: crossing point, then onward along edge k.
                out_verts.push(crossing(a, b, sa, sb));
                out_labels.push(self.labels[k]);
            }
        }
        merge_close_vertices(
            &mut out_verts,
            &mut out_labels,
            MERGE_REL_TOL * self.diameter(),
        );
        ConvexPolygon::from_raw(out_verts, out_labels)
    }
}

/// Interpolated crossing of segment `a→b` with the line where the signed
/// slack changes sign; `t` clamped to the segment.
fn crossing(a: Point, b: Point, sa: f64, sb: f64) -> Point {
    let denom = sa - sb;
    let t = if denom.abs() > 0.0 {
        (sa / denom).clamp(0.0, 1.0)
    } else {
        0.5
    };
    a + (b - a) * t
}

/// Drops vertices whose successor (cyclically) lies within `tol`; the
/// surviving vertex keeps its own outgoing edge label, so collapsing a
/// zero-length cut edge removes its label with it.
fn merge_close_vertices(verts: &mut Vec<Point>, labels: &mut Vec<EdgeLabel>, tol: f64) {
    loop {
        let n = verts.len();
        if n < 2 {
            return;
        }
        let mut removed = false;
        for k in 0..n {
            let next = (k + 1) % n;
            if verts[k].distance(verts[next]) <= tol {
                verts.remove(k);
                labels.remove(k);
                removed = true;
                break;
            }
        }
        if !removed {
            return;
        }
    }
}

fn bbox_diameter(verts: &[Point]) -> f64 {
    if verts.is_empty() {
        return 0.0;
    }
    let (mut lo1, mut hi1, mut lo2, mut hi2) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for v in verts {
        lo1 = lo1.min(v.x1);
        hi1 = hi1.max(v.x1);
        lo2 = lo2.min(v.x2);
        hi2 = hi2.max(v.x2);
    }
    (hi1 - lo1).hypot(hi2 - lo2)
}

/// 2-D cross product `a.x1·b.x2 − a.x2·b.x1`.
pub fn cross_product(a: Point, b: Point) -> f64 {
    a.x1 * b.x2 - a.x2 * b.x1
}

/// Axis-aligned unit square `[0,1]²`, the default domain.
pub fn unit_square() -> ConvexPolygon {
    ConvexPolygon::new(vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(0.0, 1.0),
    ])
    .expect("unit square is valid")
}
