//! Dependency-free SVG rendering of a polygon and an optional sampling set.

use prony2d::geometry::Polygon;
use prony2d::sampling::LatticeSet2D;
use std::fmt::Write;

const PANEL: f64 = 400.0;
const MARGIN: f64 = 20.0;

/// Polygon panel on the left; when a lattice set is given, a scatter panel
/// on the right with point radii growing with `ln(2 + m + n)`.
pub fn render(p: &Polygon, set: Option<&LatticeSet2D>) -> String {
    let width = if set.is_some() {
        2.0 * (PANEL + 2.0 * MARGIN)
    } else {
        PANEL + 2.0 * MARGIN
    };
    let height = PANEL + 2.0 * MARGIN;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(
        out,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{PANEL}\" height=\"{PANEL}\" fill=\"none\" stroke=\"#999\"/>"
    );
    // unit square maps to the panel with the y axis flipped
    let map = |x: f64, y: f64| (MARGIN + x * PANEL, MARGIN + (1.0 - y) * PANEL);
    let mut path = String::new();
    for (i, v) in p.vertices().iter().enumerate() {
        let (px, py) = map(v.x, v.y);
        let _ = write!(path, "{}{px:.2},{py:.2} ", if i == 0 { "M" } else { "L" });
    }
    path.push('Z');
    let _ = writeln!(
        out,
        "<path d=\"{path}\" fill=\"#4179bd\" fill-opacity=\"0.3\" stroke=\"#1a3a66\" stroke-width=\"1.5\"/>"
    );
    for v in p.vertices() {
        let (px, py) = map(v.x, v.y);
        let _ = writeln!(
            out,
            "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"2.5\" fill=\"#1a3a66\"/>"
        );
    }
    if let Some(set) = set {
        let x0 = PANEL + 3.0 * MARGIN;
        let max_coord = set
            .points()
            .iter()
            .map(|&(m, n)| m.max(n))
            .max()
            .unwrap_or(1)
            .max(1) as f64;
        let _ = writeln!(
            out,
            "<rect x=\"{x0}\" y=\"{MARGIN}\" width=\"{PANEL}\" height=\"{PANEL}\" fill=\"none\" stroke=\"#999\"/>"
        );
        let pad = 8.0;
        for &(m, n) in set.points() {
            let px = x0 + pad + m as f64 / max_coord * (PANEL - 2.0 * pad);
            let py = MARGIN + pad + (1.0 - n as f64 / max_coord) * (PANEL - 2.0 * pad);
            let r = 0.8 * (2.0 + (m + n) as f64).ln();
            let _ = writeln!(
                out,
                "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"{r:.2}\" fill=\"#bd6241\" fill-opacity=\"0.7\"/>"
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
