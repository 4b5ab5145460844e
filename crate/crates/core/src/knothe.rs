//! Machinery at `eps = 0`: equal-area horizontal strips, the initial price
//! vector they induce, the monotone strip-to-atom assignment, and the
//! closed-form Gaussian transport family used as an analytic cross-check.
//!
//! At `eps = 0` the cost ignores abscissas, so optimal cells are the
//! horizontal strips of area `|Ω|/N` taken bottom-up in increasing atom
//! ordinate, which is the semi-discrete Knothe map. The prices producing
//! those strips chain through consecutive sorted atoms: on each strip
//! boundary the two incident atoms must tie in price-shifted cost.

use nalgebra::Matrix2;

use crate::cells::Atoms;
use crate::dual::Prices;
use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, EdgeLabel, HalfPlane, Point};

/// Equal-area horizontal strip decomposition: the `N−1` interior boundary
/// heights and the ordinate-ascending atom order.
#[derive(Clone, Debug)]
pub struct StripPartition {
    /// Strictly increasing interior boundary heights.
    pub heights: Vec<f64>,
    /// `order[k]` is the atom owning the `k`-th strip from the bottom.
    pub order: Vec<usize>,
}

impl StripPartition {
    /// Strip polygon for slot `k` (between boundaries `k−1` and `k`).
    pub fn strip(&self, omega: &ConvexPolygon, k: usize) -> ConvexPolygon {
        let mut s = omega.clone();
        if k > 0 {
            let below = HalfPlane::new(Point::new(0.0, -1.0), -self.heights[k - 1]);
            s = s.clip(&below, EdgeLabel::Cut(usize::MAX));
        }
        if k < self.heights.len() {
            let above = HalfPlane::new(Point::new(0.0, 1.0), self.heights[k]);
            s = s.clip(&above, EdgeLabel::Cut(usize::MAX));
        }
        s
    }
}

/// Heights `h_1 < … < h_{N−1}` with `area(Ω ∩ {x₂ ≤ h_k}) = k·|Ω|/N`,
/// found by bisection: the cumulative area is continuous and strictly
/// increasing across the vertical extent of the domain.
pub fn strip_heights(omega: &ConvexPolygon, n: usize) -> Vec<f64> {
    assert!(n >= 1);
    let total = omega.area();
    let (mut lo_all, mut hi_all) = (f64::MAX, f64::MIN);
    for v in omega.vertices() {
        lo_all = lo_all.min(v.x2);
        hi_all = hi_all.max(v.x2);
    }
    let area_below = |h: f64| {
        omega
            .clip(
                &HalfPlane::new(Point::new(0.0, 1.0), h),
                EdgeLabel::Cut(usize::MAX),
            )
            .area()
    };
    let mut heights = Vec::with_capacity(n - 1);
    for k in 1..n {
        let target = k as f64 * total / n as f64;
        let (mut lo, mut hi) = (lo_all, hi_all);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if area_below(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h = 0.5 * (lo + hi);
        debug_assert!((area_below(h) - target).abs() <= 1e-12 * total.max(1.0));
        heights.push(h);
    }
    heights
}

/// Ordinate-ascending atom order: slot `k` of the strip decomposition maps
/// to the atom with the `k`-th smallest ordinate.
pub fn knothe_assignment(atoms: &Atoms) -> Vec<usize> {
    let mut order: Vec<usize> = (0..atoms.len()).collect();
    order.sort_by(|&a, &b| {
        atoms.points()[a]
            .x2
            .partial_cmp(&atoms.points()[b].x2)
            .expect("finite ordinates")
    });
    order
}

/// Strip decomposition aligned with the atoms.
pub fn strip_partition(atoms: &Atoms, omega: &ConvexPolygon) -> StripPartition {
    StripPartition {
        heights: strip_heights(omega, atoms.len()),
        order: knothe_assignment(atoms),
    }
}

/// Prices making every `eps = 0` cell an equal-area strip.
///
/// At `eps = 0` only consecutive strips touch, so tying the cost on each
/// boundary height between its two incident (sorted) atoms determines the
/// vector up to a constant; the whole vector is then shifted so the first
/// atom in input order carries price zero.
pub fn initial_prices(atoms: &Atoms, omega: &ConvexPolygon) -> Result<Prices> {
    // revalidate defensively: the chain below divides nothing, but a
    // violated gap invariant would corrupt the strip order silently
    if atoms.len() >= 2 {
        let order = knothe_assignment(atoms);
        for w in order.windows(2) {
            let gap = atoms.points()[w[1]].x2 - atoms.points()[w[0]].x2;
            if gap < atoms.gap_min() {
                return Err(Error::DegenerateAtoms {
                    axis: 2,
                    i: w[0].min(w[1]),
                    j: w[0].max(w[1]),
                    gap,
                    gap_min: atoms.gap_min(),
                });
            }
        }
    }
    let partition = strip_partition(atoms, omega);
    let mut values = vec![0.0; atoms.len()];
    for k in 0..atoms.len().saturating_sub(1) {
        let h = partition.heights[k];
        let lower = partition.order[k];
        let upper = partition.order[k + 1];
        let d_lower = h - atoms.points()[lower].x2;
        let d_upper = h - atoms.points()[upper].x2;
        // indifference on the boundary: (h − y_lower)² − p_lower = (h − y_upper)² − p_upper
        values[upper] = values[lower] + d_upper * d_upper - d_lower * d_lower;
    }
    Ok(Prices::normalizing(values))
}

/// Target covariance of the planar Gaussian example.
#[derive(Clone, Copy, Debug)]
pub struct GaussianSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl GaussianSpec {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && c > 0.0 && a * c - b * b > 0.0) {
            return Err(Error::InvalidInput(format!(
                "covariance [[{a}, {b}], [{b}, {c}]] is not positive definite"
            )));
        }
        Ok(Self { a, b, c })
    }

    pub fn covariance(&self) -> Matrix2<f64> {
        Matrix2::new(self.a, self.b, self.b, self.c)
    }
}

/// The linear optimal map pushing the standard Gaussian to the target one
/// under the weighted cost, in closed form:
///
/// ```text
/// T_eps = (a eps² + c + 2 eps s)^{-1/2} · [ a eps + s    b        ]
///                                         [ b eps        c + eps s]
/// ```
///
/// with `s = √(ac − b²)`. At `eps = 1` this is symmetric positive definite
/// (a gradient of a convex function); as `eps → 0` it tends to the
/// lower-triangular monotone rearrangement.
pub fn gaussian_transport(spec: GaussianSpec, eps: f64) -> Matrix2<f64> {
    assert!(eps >= 0.0);
    let (a, b, c) = (spec.a, spec.b, spec.c);
    let s = (a * c - b * b).sqrt();
    let scale = (a * eps * eps + c + 2.0 * eps * s).sqrt().recip();
    Matrix2::new(a * eps + s, b, b * eps, c + eps * s) * scale
}

/// The `eps → 0` limit of [`gaussian_transport`]: lower-triangular with
/// positive diagonal.
pub fn gaussian_transport_limit(spec: GaussianSpec) -> Matrix2<f64> {
    let (a, b, c) = (spec.a, spec.b, spec.c);
    Matrix2::new((a - b * b / c).sqrt(), b / c.sqrt(), 0.0, c.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::{build, Metric};
    use crate::geometry::unit_square;

    #[test]
    fn unit_square_quartiles() {
        let h = strip_heights(&unit_square(), 4);
        assert_eq!(h.len(), 3);
        for (got, want) in h.iter().zip([0.25, 0.5, 0.75]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(strip_heights(&unit_square(), 1).is_empty());
    }

    #[test]
    fn triangle_median_height() {
        let tri = ConvexPolygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        let h = strip_heights(&tri, 2);
        // area below h in the triangle is h − h²/2; equal to 1/4 at 1 − 1/√2
        assert_eq!(h.len(), 1);
        assert!((h[0] - (1.0 - 1.0 / 2.0f64.sqrt())).abs() < 1e-10);
    }

    #[test]
    fn assignment_is_argsort_by_ordinate() {
        let omega = unit_square();
        let sorted = Atoms::new(
            vec![
                Point::new(0.5, 0.1),
                Point::new(0.2, 0.5),
                Point::new(0.8, 0.9),
            ],
            &omega,
        )
        .unwrap();
        assert_eq!(knothe_assignment(&sorted), vec![0, 1, 2]);
        let reversed = Atoms::new(
            vec![
                Point::new(0.5, 0.9),
                Point::new(0.2, 0.5),
                Point::new(0.8, 0.1),
            ],
            &omega,
        )
        .unwrap();
        assert_eq!(knothe_assignment(&reversed), vec![2, 1, 0]);
    }

    #[test]
    fn initial_prices_of_symmetric_pair_are_zero() {
        let omega = unit_square();
        let atoms = Atoms::new(vec![Point::new(0.5, 0.25), Point::new(0.5, 0.75)], &omega).unwrap();
        let p = initial_prices(&atoms, &omega).unwrap();
        assert!(p.values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn initial_prices_chain_hand_example() {
        let omega = unit_square();
        let atoms = Atoms::new(vec![Point::new(0.3, 0.1), Point::new(0.7, 0.4)], &omega).unwrap();
        let p = initial_prices(&atoms, &omega).unwrap();
        // boundary at 0.5: p₂ − p₁ = (0.5−0.4)² − (0.5−0.1)² = −0.15
        assert_eq!(p.values()[0], 0.0);
        assert!((p.values()[1] - (-0.15)).abs() < 1e-12);
    }

    #[test]
    fn initial_prices_reproduce_equal_strips() {
        let omega = unit_square();
        let atoms = Atoms::new(
            vec![
                Point::new(0.31, 0.82),
                Point::new(0.77, 0.14),
                Point::new(0.52, 0.47),
                Point::new(0.15, 0.65),
                Point::new(0.88, 0.29),
            ],
            &omega,
        )
        .unwrap();
        let p = initial_prices(&atoms, &omega).unwrap();
        let complex = build(&atoms, Metric::new(0.0), &p, &omega);
        for &a in &complex.areas {
            assert!((a - 0.2).abs() <= 1e-9, "strip area {a}");
        }
    }

    #[test]
    fn gaussian_limit_matches_closed_form() {
        let spec = GaussianSpec::new(2.0, 0.5, 1.0).unwrap();
        let near = gaussian_transport(spec, 1e-8);
        let limit = gaussian_transport_limit(spec);
        assert!((near - limit).abs().max() < 1e-6);
        // lower-triangular with positive diagonal
        assert_eq!(limit[(1, 0)], 0.0);
        assert!(limit[(0, 0)] > 0.0 && limit[(1, 1)] > 0.0);
    }

    #[test]
    fn gaussian_identity_target_gives_identity_map() {
        let spec = GaussianSpec::new(1.0, 0.0, 1.0).unwrap();
        for eps in [0.0, 0.3, 1.0] {
            let t = gaussian_transport(spec, eps);
            assert!((t - Matrix2::identity()).abs().max() < 1e-14, "eps {eps}");
        }
    }

    #[test]
    fn gaussian_transport_pushes_identity_to_target_for_all_eps() {
        let spec = GaussianSpec::new(2.0, 0.5, 1.0).unwrap();
        for k in 0..=10 {
            let eps = k as f64 / 10.0;
            let t = gaussian_transport(spec, eps);
            let pushed = t * t.transpose();
            assert!(
                (pushed - spec.covariance()).abs().max() < 1e-12,
                "eps {eps}"
            );
        }
        // Brenier condition at eps = 1: symmetric positive definite
        let t1 = gaussian_transport(spec, 1.0);
        assert!((t1[(0, 1)] - t1[(1, 0)]).abs() < 1e-14);
        assert!(t1.symmetric_eigenvalues().min() > 0.0);
    }

    #[test]
    fn rejects_indefinite_covariance() {
        assert!(GaussianSpec::new(1.0, 2.0, 1.0).is_err());
        assert!(GaussianSpec::new(-1.0, 0.0, 1.0).is_err());
    }
}
