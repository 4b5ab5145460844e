//! SVG snapshots of a tesselation: one filled polygon per cell and one
//! dot per atom, in an 800×800 viewbox mapped affinely from the domain's
//! bounding box.

use std::path::Path;

use sdot_core::{Atoms, CellComplex, ConvexPolygon, Point};

use crate::CliError;

const SIZE: f64 = 800.0;

/// Affine map from the domain bounding box onto the viewbox (ordinate
/// flipped so the picture reads the usual way up).
pub struct ViewMap {
    lo1: f64,
    lo2: f64,
    sx: f64,
    sy: f64,
}

impl ViewMap {
    pub fn new(omega: &ConvexPolygon) -> Self {
        let (mut lo1, mut hi1, mut lo2, mut hi2) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for v in omega.vertices() {
            lo1 = lo1.min(v.x1);
            hi1 = hi1.max(v.x1);
            lo2 = lo2.min(v.x2);
            hi2 = hi2.max(v.x2);
        }
        Self {
            lo1,
            lo2,
            sx: SIZE / (hi1 - lo1),
            sy: SIZE / (hi2 - lo2),
        }
    }

    pub fn apply(&self, p: Point) -> (f64, f64) {
        (
            (p.x1 - self.lo1) * self.sx,
            SIZE - (p.x2 - self.lo2) * self.sy,
        )
    }
}

/// Writes one snapshot with exactly N polygon elements and N atom markers.
pub fn write_snapshot(
    path: &Path,
    complex: &CellComplex,
    atoms: &Atoms,
    omega: &ConvexPolygon,
) -> Result<(), CliError> {
    let view = ViewMap::new(omega);
    let n = complex.len();
    let mut out = String::new();
    out.push_str(r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    out.push('\n');
    out.push_str(&format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SIZE} {SIZE}" width="{SIZE}" height="{SIZE}">"#
    ));
    out.push('\n');
    for (i, cell) in complex.cells.iter().enumerate() {
        let hue = (i * 360) / n.max(1);
        let points: Vec<String> = cell
            .vertices()
            .iter()
            .map(|&v| {
                let (x, y) = view.apply(v);
                format!("{x:.6},{y:.6}")
            })
            .collect();
        out.push_str(&format!(
            r##"<polygon points="{}" fill="hsl({hue}, 65%, 72%)" stroke="#333333" stroke-width="1"/>"##,
            points.join(" ")
        ));
        out.push('\n');
    }
    for y in atoms.points() {
        let (cx, cy) = view.apply(*y);
        out.push_str(&format!(
            r##"<circle cx="{cx:.6}" cy="{cy:.6}" r="5" fill="#1a1a1a"/>"##
        ));
        out.push('\n');
    }
    out.push_str("</svg>\n");
    std::fs::write(path, out)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}
